#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "chemostat/config.hpp"
#include "chemostat/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Chemostat simulation and verification toolkit"};
    app.set_version_flag("--version", "chemostat 1.0.0");
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    if (const char* env = std::getenv("CHEMOSTAT_OUT_DIR"); env && *env) out_dir = env;
    std::uint64_t seed = 0;
    std::uint64_t replicates = 0;
    double horizon = 0.0;
    unsigned threads = 0;

    CLI::App* run = app.add_subcommand("run", "Execute a run configuration file");
    run->add_option("config", config_path, "Path to the configuration file")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed, "Override [run] seed");
    CLI::Option* reps_opt = run->add_option("--replicates", replicates, "Override [run] replicates");
    CLI::Option* horizon_opt = run->add_option("--horizon", horizon, "Override [run] horizon (h)");
    CLI::Option* threads_opt =
        run->add_option("--threads", threads, "Worker threads; 0 picks the hardware concurrency");
    run->add_option("--out-dir", out_dir,
                    "Output directory (default: $CHEMOSTAT_OUT_DIR or the working directory)");

    CLI11_PARSE(app, argc, argv);

    try {
        chemostat::RunConfig cfg = chemostat::load_config(config_path);
        if (*seed_opt) cfg.seed = seed;
        if (*reps_opt) cfg.replicates = replicates;
        if (*horizon_opt) cfg.horizon = horizon;
        if (*threads_opt) cfg.threads = threads;
        try {
            cfg.validate();
        } catch (const chemostat::ConfigError& e) {
            // Overridden configs lose their file anchor; restore it.
            throw chemostat::ConfigError(config_path, e.line(), e.message());
        }
        chemostat::run_to_directory(cfg, out_dir);
    } catch (const chemostat::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

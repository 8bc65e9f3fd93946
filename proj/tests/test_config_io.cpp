#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "chemostat/config.hpp"
#include "chemostat/format.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/output.hpp"
#include "chemostat/runner.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace chemostat;
using doctest::Approx;

namespace {

Trajectory synth(const std::string& model, std::vector<double> times, std::vector<double> pops,
                 std::vector<double> subs) {
    Trajectory t;
    t.model = model;
    for (std::size_t k = 0; k < times.size(); ++k)
        t.frames.push_back({times[k], pops[k], subs[k], std::nan(""), std::nan("")});
    return t;
}

int error_line(const std::string& text) {
    try {
        (void)parse_config(text, "t.ini");
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_CASE("shortest round-trip number format") {
    for (double v : {0.5, 0.1, 7e-13, 1.0 / 3.0, -2.75e8, 0.0, 1e-300, 1234567.0}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1e-06) == "1e-06");
}

TEST_CASE("empty config text yields the documented defaults") {
    const RunConfig cfg = parse_config("");
    CHECK(cfg.scenario == Scenario::ode);
    CHECK(cfg.params.dilution == 0.5);
    CHECK(cfg.params.substrate_in == 0.003);
    CHECK(cfg.params.volume == 1e-6);
    CHECK(cfg.params.scale == 1.0);
    CHECK(cfg.kinetics.type == "monod");
    CHECK(cfg.horizon == 10.0);
    CHECK(cfg.dt == 1e-3);
    CHECK(cfg.frames == 201);
    CHECK(cfg.replicates == 1);
    CHECK(cfg.seed == 1);
    CHECK(cfg.threads == 0);
    CHECK(cfg.trajectory_limit == -1);
    CHECK_FALSE(cfg.analysis.qsd);
}

TEST_CASE("full config parses every section") {
    const std::string text = R"(
# comment line
[scenario]
type = ibm          ; trailing comment

[params]
dilution = 0.4
substrate_in = 0.005
stoichiometry = 0.2
cell_mass = 6e-13
volume = 2e-8
scale = 2

[kinetics]
type = tabulated
s  = 0, 0.002, 0.005
mu = 0, 0.8,   1.1

[mass_kinetics]
growth = pinned_growth
max_mass = 2e-12
rate_scale = 1.5
kernel = symmetric_beta
beta_shape = 3

[init]
population = 24
substrate = 0.004

[run]
horizon = 4.5
dt = 5e-4
macro_step = 0.02
frames = 31
replicates = 12
seed = 99
threads = 3

[analysis]
qsd = true
fluctuations = true
qv = true
extinction = true
ellipse = true
ellipse_level = 0.9

[output]
trajectories = 5
)";
    const RunConfig cfg = parse_config(text, "full.ini");
    CHECK(cfg.scenario == Scenario::ibm);
    CHECK(cfg.params.dilution == 0.4);
    CHECK(cfg.params.scale == 2.0);
    CHECK(cfg.kinetics.type == "tabulated");
    REQUIRE(cfg.kinetics.s.size() == 3);
    CHECK(cfg.kinetics.s[1] == 0.002);
    CHECK(cfg.kinetics.mu[2] == 1.1);
    CHECK(cfg.mass_kinetics.growth == "pinned_growth");
    CHECK(cfg.mass_kinetics.max_mass == 2e-12);
    CHECK(cfg.mass_kinetics.kernel == "symmetric_beta");
    CHECK(cfg.mass_kinetics.beta_shape == 3.0);
    CHECK(cfg.init.population == 24.0);
    CHECK(cfg.horizon == 4.5);
    CHECK(cfg.frames == 31);
    CHECK(cfg.replicates == 12);
    CHECK(cfg.seed == 99);
    CHECK(cfg.threads == 3);
    CHECK(cfg.analysis.qv);
    CHECK(cfg.analysis.ellipse_level == 0.9);
    CHECK(cfg.trajectory_limit == 5);
}

TEST_CASE("scenario names round-trip") {
    for (Scenario s : {Scenario::ode, Scenario::crump_young, Scenario::ibm, Scenario::sde_cyeds,
                       Scenario::sde_hat, Scenario::sde_feller, Scenario::compare})
        CHECK(scenario_from_name(scenario_name(s)) == s);
    CHECK_THROWS_AS(scenario_from_name("gillespie"), std::invalid_argument);
}

TEST_CASE("parse errors carry the offending line") {
    CHECK(error_line("[nope]\n") == 1);
    CHECK(error_line("\n[params]\nwat = 1\n") == 3);                      // unknown key
    CHECK(error_line("[params]\ndilution = 0.5\ndilution = 0.6\n") == 3);  // duplicate
    CHECK(error_line("[params]\ndilution\n") == 2);                       // no '='
    CHECK(error_line("dilution = 0.5\n") == 1);                           // outside section
    CHECK(error_line("[params]\ndilution = abc\n") == 2);                 // bad number
    CHECK(error_line("[params]\ndilution =\n") == 2);                     // empty value
    CHECK(error_line("[run]\nseed = -4\n") == 2);                         // negative seed
    CHECK(error_line("[analysis]\nqsd = maybe\n") == 2);                  // bad bool
    CHECK(error_line("[params\n") == 1);                                  // unterminated header
    CHECK(error_line("[scenario]\ntype = gillespie\n") == 2);

    try {
        (void)parse_config("[run]\nframes = 1\n", "grid.ini");
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
        CHECK(e.file() == "grid.ini");
        CHECK(std::string(e.what()) == "grid.ini:2: [run] frames: need at least 2 frames");
    }
}

TEST_CASE("semantic validation is scenario-aware") {
    // replicate count of zero is rejected
    CHECK(error_line("[run]\nreplicates = 0\n") == 2);
    // jump models need whole individuals
    CHECK(error_line("[scenario]\ntype = crump_young\n[init]\npopulation = 2.5\n") == 4);
    // analysis toggles are tied to scenarios that can honor them
    CHECK(error_line("[scenario]\ntype = crump_young\n[analysis]\nqv = true\n") == 4);
    CHECK(error_line("[scenario]\ntype = sde_hat\n[analysis]\nextinction = true\n") == 4);
    CHECK(error_line("[analysis]\nellipse_level = 1\n") == 2);
    // compare needs matched sweep lists
    CHECK(error_line("[scenario]\ntype = compare\n[compare]\nvolumes = 1e-8, 1e-6\npopulations = "
                     "40\n") == 5);
    // a compare config without the sweep section anchors at the whole file
    CHECK(error_line("[scenario]\ntype = compare\n") == 0);
    // tabulated curves validate through the builder
    CHECK(error_line("[kinetics]\ntype = tabulated\ns = 0, 0.002\nmu = 0\n") == 2);

    RunConfig cfg;
    cfg.replicates = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("serialize and reparse is idempotent") {
    std::vector<std::string> texts;
    texts.push_back("");
    texts.push_back("[scenario]\ntype = sde_cyeds\n[init]\npopulation = 4019\nq = 1.5\nr = "
                    "-2e-5\n[run]\nreplicates = 7\nseed = 123\n");
    texts.push_back("[scenario]\ntype = ibm\n[mass_kinetics]\ngrowth = pinned_growth\nmax_mass = "
                    "2e-12\nrate_scale = 1.5\nkernel = symmetric_beta\nbeta_shape = "
                    "2\n[init]\npopulation = 10\nsubstrate = 0.003\n");
    texts.push_back("[scenario]\ntype = sde_feller\n[kinetics]\ntype = haldane\nmu_max = "
                    "2.5\nhalf_saturation = 0.002\ninhibition = 0.01\n[params]\nsubstrate_in = "
                    "0.1\nvolume = 1e-9\n[init]\npopulation = 200\nsubstrate = 0.0655\n");
    texts.push_back("[scenario]\ntype = compare\n[compare]\nvolumes = 1e-8, 1e-6\npopulations = "
                    "40, 4019\n[init]\nsubstrate = 0.003\n[run]\nreplicates = 3\n");
    texts.push_back("[kinetics]\ntype = tabulated\ns = 0, 0.001, 0.003\nmu = 0, 0.25, 0.4\n");
    for (const auto& text : texts) {
        const RunConfig once = parse_config(text);
        const std::string canon = once.serialize();
        const RunConfig twice = parse_config(canon);
        CHECK(twice.serialize() == canon);
    }
}

TEST_CASE("trajectory csv schema and replicate cap") {
    std::vector<Trajectory> ens;
    ens.push_back(synth("ode", {0.0, 0.5}, {10.0, 12.0}, {0.003, 0.002}));
    ens.push_back(synth("ode", {0.0, 0.5}, {10.0, 9.0}, {0.003, 0.0025}));
    ens[1].frames[1].q = 1.5;
    ens[1].frames[1].r = -0.25;

    const std::string all = trajectory_csv(ens, -1);
    CHECK(all ==
          "# chemostat-trajectory v1\n"
          "time,model,replicate,n,s,q,r\n"
          "0,ode,0,10,0.003,,\n"
          "0.5,ode,0,12,0.002,,\n"
          "0,ode,1,10,0.003,,\n"
          "0.5,ode,1,9,0.0025,1.5,-0.25\n");
    const std::string one = trajectory_csv(ens, 1);
    CHECK(one.find(",1,") == std::string::npos);
    const std::string none = trajectory_csv(ens, 0);
    CHECK(none == "# chemostat-trajectory v1\ntime,model,replicate,n,s,q,r\n");
}

TEST_CASE("timing report totals and json shape") {
    TimingReport report;
    report.entries.push_back({"a", "crump_young", 1e-8, 40, 3, 120, 0, 0.25});
    report.entries.push_back({"b", "sde_cyeds", 1e-8, 40, 3, 0, 3000, 0.75});
    report.finalize();
    CHECK(report.total_wall_seconds == Approx(1.0));

    const auto j = nlohmann::json::parse(timing_json(report));
    CHECK(j["schema"] == "chemostat-timing v1");
    REQUIRE(j["entries"].size() == 2);
    CHECK(j["entries"][0]["label"] == "a");
    CHECK(j["entries"][0]["events"] == 120);
    CHECK(j["entries"][1]["steps"] == 3000);
    CHECK(j["total_wall_seconds"].get<double>() == Approx(1.0));
}

TEST_CASE("ode scenario reproduces the integrator on the frame grid") {
    RunConfig cfg;
    cfg.scenario = Scenario::ode;
    cfg.init.population = 500.0;
    cfg.init.substrate = 0.003;
    cfg.horizon = 2.0;
    cfg.dt = 1e-3;
    cfg.frames = 5;
    const RunBundle bundle = run_scenario(cfg);
    REQUIRE(bundle.trajectories.size() == 1);
    const auto& t = bundle.trajectories.front();
    CHECK(t.model == "ode");
    REQUIRE(t.frames.size() == 5);
    const Kinetics kin = cfg.kinetics.build();
    const OdePath path =
        integrate_chemostat_ode(cfg.params, kin, {500.0, 0.003}, 2.0, 1e-3, OdeScheme::rk4);
    for (std::size_t k = 0; k < 5; ++k) {
        const double tk = 2.0 * static_cast<double>(k) / 4.0;
        CHECK(t.frames[k].time == Approx(tk).epsilon(1e-15));
        CHECK(t.frames[k].population == Approx(path.state_at(tk).population).epsilon(1e-15));
    }
    CHECK(bundle.summary["scenario"] == "ode");
    CHECK(bundle.summary.contains("limit_law"));
    REQUIRE(bundle.timing.entries.size() == 1);
    CHECK(bundle.timing.entries[0].steps == 2000);
    CHECK(bundle.timing.entries[0].events == 0);
}

TEST_CASE("ensembles are reproducible and thread-count independent") {
    RunConfig cfg;
    cfg.scenario = Scenario::crump_young;
    cfg.params.volume = 1e-8;
    cfg.init.population = 40;
    cfg.init.substrate = 0.003;
    cfg.horizon = 2.0;
    cfg.frames = 9;
    cfg.replicates = 6;
    cfg.seed = 31;
    cfg.threads = 1;
    const RunBundle a = run_scenario(cfg);
    const RunBundle b = run_scenario(cfg);
    cfg.threads = 3;
    const RunBundle c = run_scenario(cfg);
    const std::string csv_a = trajectory_csv(a.trajectories, -1);
    CHECK(csv_a == trajectory_csv(b.trajectories, -1));
    CHECK(csv_a == trajectory_csv(c.trajectories, -1));
    CHECK(a.summary.dump() == b.summary.dump());
    CHECK(a.summary.dump() == c.summary.dump());

    cfg.seed = 32;
    const RunBundle d = run_scenario(cfg);
    CHECK(csv_a != trajectory_csv(d.trajectories, -1));
}

TEST_CASE("analysis blocks land in the summary") {
    RunConfig cfg;
    cfg.scenario = Scenario::ibm;
    cfg.params.volume = 1e-8;
    cfg.init.population = 30;
    cfg.init.substrate = 0.003;
    cfg.horizon = 1.5;
    cfg.frames = 4;
    cfg.replicates = 25;
    cfg.seed = 11;
    cfg.threads = 1;
    cfg.analysis.qv = true;
    cfg.analysis.fluctuations = true;
    const RunBundle bundle = run_scenario(cfg);
    REQUIRE(bundle.summary.contains("qv"));
    REQUIRE(bundle.summary["qv"].size() == 2);
    CHECK(bundle.summary["qv"][0]["function"] == "one");
    CHECK(bundle.summary["qv"][0]["ratio"].size() == 4);
    REQUIRE(bundle.summary.contains("fluctuations"));
    const auto& fl = bundle.summary["fluctuations"];
    CHECK(fl["replicates"] == 25);
    CHECK(fl["terminal"]["cov"].size() == 2);
    CHECK(fl.contains("moment_ode"));
    CHECK(fl.contains("bootstrap_se"));
    CHECK(fl.contains("stationary"));  // stable interior law exists here

    // All replicates of a washout curve go extinct: the survivor estimate
    // reports the failure instead of aborting the run.
    RunConfig dead;
    dead.scenario = Scenario::crump_young;
    dead.kinetics.type = "tabulated";
    dead.kinetics.s = {0.0, 0.003};
    dead.kinetics.mu = {0.0, 0.0};
    dead.params.volume = 1e-8;
    dead.init.population = 3;
    dead.init.substrate = 0.003;
    dead.horizon = 40.0;
    dead.frames = 5;
    dead.replicates = 8;
    dead.seed = 5;
    dead.analysis.qsd = true;
    dead.analysis.extinction = true;
    const RunBundle gone = run_scenario(dead);
    CHECK(gone.summary["qsd"].contains("error"));
    CHECK(gone.summary["extinction"]["extinct"] == 8);
    CHECK_FALSE(gone.summary.contains("limit_law"));
}

TEST_CASE("compare scenario times both models per size") {
    RunConfig cfg;
    cfg.scenario = Scenario::compare;
    cfg.compare.volumes = {1e-8, 1e-7};
    cfg.compare.populations = {40, 400};
    cfg.init.substrate = 0.003;
    cfg.horizon = 1.0;
    cfg.dt = 1e-2;
    cfg.frames = 3;
    cfg.replicates = 2;
    cfg.seed = 3;
    const RunBundle bundle = run_scenario(cfg);
    CHECK(bundle.trajectories.empty());
    REQUIRE(bundle.timing.entries.size() == 4);
    CHECK(bundle.timing.entries[0].model == "crump_young");
    CHECK(bundle.timing.entries[0].volume == 1e-8);
    CHECK(bundle.timing.entries[0].events > 0);
    CHECK(bundle.timing.entries[1].model == "sde_cyeds");
    CHECK(bundle.timing.entries[1].steps == 200);
    CHECK(bundle.timing.entries[3].volume == 1e-7);
    CHECK(bundle.summary["sizes"].size() == 2);
    double total = 0.0;
    for (const auto& e : bundle.timing.entries) total += e.wall_seconds;
    CHECK(bundle.timing.total_wall_seconds == Approx(total));
}

TEST_CASE("run_to_directory writes a deterministic bundle") {
    RunConfig cfg;
    cfg.scenario = Scenario::sde_feller;
    cfg.params.volume = 1e-8;
    cfg.init.population = 5;
    cfg.init.substrate = 0.003;
    cfg.horizon = 3.0;
    cfg.dt = 1e-2;
    cfg.frames = 7;
    cfg.replicates = 10;
    cfg.seed = 77;
    cfg.analysis.extinction = true;

    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "chemostat_io_test";
    fs::remove_all(base);
    run_to_directory(cfg, (base / "one").string());
    run_to_directory(cfg, (base / "two").string());
    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        REQUIRE(in);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    const std::string csv = slurp(base / "one" / "trajectories.csv");
    CHECK(csv == slurp(base / "two" / "trajectories.csv"));
    CHECK(csv.rfind("# chemostat-trajectory v1\n", 0) == 0);
    const std::string summary = slurp(base / "one" / "summary.json");
    CHECK(summary == slurp(base / "two" / "summary.json"));
    const auto parsed = nlohmann::json::parse(summary);
    CHECK(parsed["scenario"] == "sde_feller");
    CHECK(parsed.contains("extinction"));
    // timing exists and parses; its numbers are allowed to differ between runs
    CHECK(nlohmann::json::parse(slurp(base / "one" / "timing.json")).contains("entries"));
    fs::remove_all(base);
}

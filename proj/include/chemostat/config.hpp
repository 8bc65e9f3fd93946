#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemostat/kinetics.hpp"
#include "chemostat/params.hpp"

namespace chemostat {

enum class Scenario {
    ode,          // deterministic limit system
    crump_young,  // exact birth-death jump model
    ibm,          // mass-structured individual-based model
    sde_cyeds,    // coupled central-limit system (N, S, Q, R)
    sde_hat,      // diffusion linearized along the deterministic path
    sde_feller,   // square-root diffusion with absorption at zero
    compare,      // timing sweep: jump model vs diffusion across sizes
};

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);  // throws std::invalid_argument

// Growth-curve description; build() materializes the curve.
struct KineticsSpec {
    std::string type = "monod";  // monod | haldane | tabulated
    double mu_max = 1.35;
    double half_saturation = 0.004;
    double inhibition = 0.01;           // haldane only
    std::vector<double> s, mu;          // tabulated only
    Kinetics build() const;
};

// Individual-level rates of the IBM; build() needs the growth curve and the
// substrate cap of the run (rate bounds are taken over [0, s_cap]).
struct MassKineticsSpec {
    std::string growth = "crump_young_reduction";  // crump_young_reduction | pinned_growth
    double max_mass = 0.0;                         // pinned_growth
    double rate_scale = 1.0;                       // pinned_growth
    std::string kernel = "uniform";                // uniform | symmetric_beta | dirac_half
    double beta_shape = 2.0;                       // symmetric_beta
    MassKinetics build(const Kinetics& kin, const ChemostatParams& params, double s_cap) const;
};

// Initial condition. population is a head count; scenarios that integrate the
// deterministic limit divide by params.scale internally.
struct InitSpec {
    double population = 0.0;
    double substrate = 0.0;
    double q = 0.0;  // sde_cyeds fluctuation coordinates
    double r = 0.0;
};

struct AnalysisSpec {
    bool qsd = false;           // survivor moments at the horizon
    bool fluctuations = false;  // centred (Q, R) paths and terminal moments
    bool qv = false;            // martingale quadratic-variation check (ibm)
    bool extinction = false;    // survival curve and tail fit
    bool ellipse = false;       // confidence region of the count law
    double ellipse_level = 0.95;
};

// Size sweep of the compare scenario; parallel lists.
struct CompareSpec {
    std::vector<double> volumes;
    std::vector<double> populations;
};

struct RunConfig {
    Scenario scenario = Scenario::ode;
    ChemostatParams params;
    KineticsSpec kinetics;
    MassKineticsSpec mass_kinetics;
    InitSpec init;

    double horizon = 10.0;
    double dt = 1e-3;          // diffusion / limit-ODE step
    double macro_step = 0.01;  // jump-model integration cap between events
    std::size_t frames = 201;
    std::size_t replicates = 1;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0 picks the hardware concurrency

    AnalysisSpec analysis;
    CompareSpec compare;

    // Replicates written to the trajectory CSV; -1 writes all, 0 none.
    std::int64_t trajectory_limit = -1;

    // Semantic validation; throws ConfigError (line 0 when there is no file).
    void validate() const;

    // Canonical text form; parse_config(serialize()) reproduces the config.
    std::string serialize() const;
};

// Parse or validation failure, anchored to the offending line when known.
// what() formats "file:line: message"; line 0 means the whole file.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& file, int line, const std::string& message);
    const std::string& file() const { return file_; }
    int line() const { return line_; }
    const std::string& message() const { return message_; }

  private:
    std::string file_;
    int line_ = 0;
    std::string message_;
};

// Parse the key/value text form. Sections: [scenario] [params] [kinetics]
// [mass_kinetics] [init] [run] [analysis] [compare] [output]. '#' and ';'
// start comments. Unknown sections or keys, duplicate keys, malformed
// numbers, and semantic violations all raise ConfigError with the line.
RunConfig parse_config(const std::string& text, const std::string& filename = "<config>");

// Read and parse a config file; I/O failures raise ConfigError at line 0.
RunConfig load_config(const std::string& path);

}  // namespace chemostat

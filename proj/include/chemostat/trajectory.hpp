#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace chemostat {

// One recorded frame of any model: population (count or ODE scale), substrate,
// and optionally centred fluctuation coordinates (NaN when undefined).
struct TrajectoryFrame {
    double time = 0.0;
    double population = 0.0;
    double substrate = 0.0;
    double q = std::numeric_limits<double>::quiet_NaN();
    double r = std::numeric_limits<double>::quiet_NaN();
};

// Per-test-function record of the martingale bookkeeping accumulated during an
// individual-based run: the population integral of f, the drift integral, and
// the two parts of the predicted quadratic variation, all on the frame grid.
struct QvFunctionRecord {
    std::string name;
    double scale = 1.0;                    // population scale n of the run
    std::vector<double> observable;        // <nu_t, f> / n at frame times
    std::vector<double> drift_integral;    // integral of the generator part
    std::vector<double> qv_division;       // division contribution to <M(f)>_t
    std::vector<double> qv_death;          // withdrawal contribution to <M(f)>_t
};

struct Trajectory {
    std::string model;                 // ode | crump_young | ibm | sde_cyeds | sde_hat | sde_feller
    std::vector<TrajectoryFrame> frames;
    std::uint64_t births = 0;
    std::uint64_t deaths = 0;          // withdrawals
    bool extinct = false;
    double extinction_time = std::numeric_limits<double>::infinity();
    std::vector<QvFunctionRecord> qv_records;

    std::uint64_t event_count() const { return births + deaths; }
};

}  // namespace chemostat

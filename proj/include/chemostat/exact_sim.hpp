#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "chemostat/kinetics.hpp"
#include "chemostat/params.hpp"
#include "chemostat/rng.hpp"
#include "chemostat/trajectory.hpp"

namespace chemostat {

// Jump-model state: integer head count plus substrate concentration.
struct CrumpYoungState {
    std::int64_t count = 0;
    double substrate = 0.0;
};

// Mass-structured state: one mass per individual (order is not meaningful;
// withdrawal uses swap-remove).
struct PopulationState {
    std::vector<double> masses;
    double substrate = 0.0;
};

struct SimOptions {
    double horizon = 10.0;
    // Cap on the ODE integration step between events; also the refresh
    // interval of the thinning clock.
    double macro_step = 0.01;
    std::size_t frames = 201;  // recorded frames including t = 0 and horizon

    void validate() const;
};

// First accepted event of an inhomogeneous Poisson process with intensity
// rate(t) <= rate_bound on [t0, window_end], by exponential candidates at the
// bound thinned with probability rate(t)/bound.  Returns the accepted time or
// nullopt when no candidate lands in the window.  Throws std::logic_error if
// the intensity ever exceeds the bound: a wrong dominator silently biases the
// law, so it is never clipped.
std::optional<double> thinning_next_event(double rate_bound, double t0, double window_end,
                                          const std::function<double(double)>& rate,
                                          RngStream& rng);

// Exact path of the birth-death chemostat: births at rate mu(S) * count,
// withdrawals at rate D * count, substrate integrated between jumps.  After
// absorption at count 0 the substrate relaxes exactly (linear ODE).
Trajectory simulate_crump_young(const ChemostatParams& params, const Kinetics& kin,
                                CrumpYoungState init, const SimOptions& options, RngStream& rng);

// Observer of the continuous-time population path; used to accumulate
// path functionals (martingale bookkeeping) online during an IBM run.
// at_state is called at every smooth-path knot (the path between consecutive
// calls is one ODE step with no jump inside); at_event after each applied
// jump; at_frame right after the matching at_state at a frame boundary.
class IbmObserver {
  public:
    virtual ~IbmObserver() = default;
    virtual void at_state(double t, const std::vector<double>& masses, double substrate) = 0;
    virtual void at_event(double t, const std::vector<double>& masses, double substrate) = 0;
    virtual void at_frame(std::size_t frame_index, double t) = 0;
    virtual std::vector<QvFunctionRecord> take_records() = 0;
};

// Exact path of the mass-structured model: individual i divides at rate
// b(S, x_i) into fractions (alpha, 1-alpha) drawn from the kernel, is
// withdrawn at rate D, and grows along dx/dt = g(S, x) between events.
Trajectory simulate_ibm(const ChemostatParams& params, const MassKinetics& mk,
                        PopulationState init, const SimOptions& options, RngStream& rng,
                        IbmObserver* observer = nullptr);

}  // namespace chemostat

#pragma once

#include "chemostat/kinetics.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/params.hpp"
#include "chemostat/rng.hpp"
#include "chemostat/trajectory.hpp"

namespace chemostat {

// State of the coupled central-limit system: deterministic pair at ODE scale
// plus the centred fluctuation pair.
struct SdeState4 {
    double population = 0.0;  // N, ODE scale
    double substrate = 0.0;   // S
    double q = 0.0;           // population fluctuation
    double r = 0.0;           // substrate fluctuation
};

// Population-linearized diffusion state at count scale; the population
// coordinate is a real number and may go negative.
struct HatState {
    double population = 0.0;
    double substrate = 0.0;
};

// Square-root diffusion state at count scale; the population is truncated at
// zero, where it is permanently absorbed.
struct FellerState {
    double population = 0.0;
    double substrate = 0.0;
};

struct SdeOptions {
    double horizon = 10.0;
    double dt = 1e-3;
    std::size_t frames = 201;
    // Scales the Brownian increments; 0 turns the noise off, leaving the drift flow.
    double noise_scale = 1.0;

    void validate() const;
};

// Euler-Maruyama for the 4-dimensional central-limit system
//   dN = (mu(S) - D) N dt
//   dS = [D (S_in - S) - (k m / V) mu(S) N] dt
//   dQ = [(mu(S) - D) Q + mu'(S) N R] dt + sqrt((mu(S) + D) N) dW
//   dR = -[D R + (k m / V) (mu(S) Q + mu'(S) N R)] dt
// The (N, S) pair advances by the shared Euler step, so with the same dt it
// matches integrate_chemostat_ode(..., euler) bitwise.
Trajectory integrate_cyeds(const ChemostatParams& params, const Kinetics& kin, SdeState4 init,
                           const SdeOptions& options, RngStream& rng);

// Euler-Maruyama for the diffusion linearized along a deterministic path
// (N_t, S_t) (count scale n = params.scale):
//   dNh = [(mu(S_t) - D) Nh + mu'(S_t) (Sh - S_t) n N_t] dt + sqrt((mu(S_t) + D) n N_t) dW
//   dSh = [D (S_in - Sh) - (k m/(n V)) mu(S_t) Nh - (k/(n V)) mu'(S_t) (Sh - S_t) m n N_t] dt
// The population is not clipped: paths may go negative, and near an unstable
// equilibrium they leave every bounded set.
Trajectory integrate_hat(const ChemostatParams& params, const Kinetics& kin, const OdePath& path,
                         HatState init, const SdeOptions& options, RngStream& rng);

// Euler-Maruyama with full truncation for the square-root diffusion
//   dNt = (mu(St) - D) Nt dt + sqrt((mu(St) + D) max(Nt, 0)) dW
//   dSt = [D (S_in - St) - (k m/(n V)) mu(St) Nt] dt
// A step landing at or below zero absorbs the population permanently; the
// extinction time is recorded and the substrate then relaxes exactly.
Trajectory integrate_feller(const ChemostatParams& params, const Kinetics& kin, FellerState init,
                            const SdeOptions& options, RngStream& rng);

}  // namespace chemostat

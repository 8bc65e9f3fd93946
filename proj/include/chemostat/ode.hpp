#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "chemostat/kinetics.hpp"
#include "chemostat/linalg.hpp"
#include "chemostat/params.hpp"

namespace chemostat {

// State of the limit ODE: population at ODE scale and substrate concentration.
struct OdeState2 {
    double population = 0.0;
    double substrate = 0.0;
};

enum class OdeScheme { rk4, euler };

// Densely stored solution on a uniform grid, linearly interpolated between nodes.
class OdePath {
  public:
    OdePath() = default;
    OdePath(double dt, std::vector<OdeState2> states) : dt_(dt), states_(std::move(states)) {}

    double dt() const { return dt_; }
    double horizon() const { return dt_ * static_cast<double>(states_.size() - 1); }
    const std::vector<OdeState2>& states() const { return states_; }

    OdeState2 state_at(double t) const;

  private:
    double dt_ = 0.0;
    std::vector<OdeState2> states_;
};

// Number of uniform steps covering [0, horizon] at nominal step dt.
std::int64_t uniform_grid_steps(double horizon, double dt);

// Right-hand side of the chemostat limit ODE:
//   dN/dt = (mu(S) - D) N
//   dS/dt = D (S_in - S) - (k m / V) mu(S) N
OdeState2 chemostat_rhs(const ChemostatParams& params, const Kinetics& kin, OdeState2 state);

// One forward Euler step with the substrate clamped to [0, s_cap]; shared by
// the ODE integrator and the diffusion integrators so that trajectories agree
// bitwise under the same scheme and step.
OdeState2 euler_ode_step(const ChemostatParams& params, const Kinetics& kin, OdeState2 state,
                         double dt, double s_cap);

// Integrate the limit ODE on [0, horizon] with fixed step dt.
OdePath integrate_chemostat_ode(const ChemostatParams& params, const Kinetics& kin,
                                OdeState2 init, double horizon, double dt,
                                OdeScheme scheme = OdeScheme::rk4);

// First- and second-moment field of the centred fluctuation pair (Q, R) around
// a deterministic path:
//   A = [ mu(S)-D              mu'(S) N          ]
//       [ -(k m / V) mu(S)     -D - (k m / V) mu'(S) N ]
//   C = ( sqrt((mu(S)+D) N), 0 )
Mat2 fluctuation_drift(const ChemostatParams& params, const Kinetics& kin, OdeState2 state);
Vec2 fluctuation_noise(const ChemostatParams& params, const Kinetics& kin, OdeState2 state);

// Gaussian law on the plane.
struct GaussianLaw2 {
    Vec2 mean;
    Sym2 cov;
};

// Gaussian law of (N, S, Q, R); only the (Q, R) block of the covariance is
// populated by the limit construction.
struct GaussianLaw4 {
    std::array<double, 4> mean{};
    Sym2 qr_cov;
};

// Integrate the exact moment equations of a linear SDE with time-dependent
// coefficients. dm = A m dt, dSigma = A Sigma + Sigma A^T + C C^T dt, RK4.
GaussianLaw2 integrate_moment_odes(const std::function<Mat2(double)>& drift,
                                   const std::function<Vec2(double)>& noise, GaussianLaw2 init,
                                   double horizon, double dt);

// Same, with coefficients evaluated along a chemostat ODE path.
GaussianLaw2 integrate_fluctuation_moments(const ChemostatParams& params, const Kinetics& kin,
                                           const OdePath& path, GaussianLaw2 init, double horizon,
                                           double dt);

struct LyapunovResult {
    Sym2 cov;
    bool degenerate = false;  // zero noise: point-mass convention Sigma = 0
};

// Stationary covariance of dZ = A Z dt + C dW: solves A S + S A^T + C C^T = 0.
// Requires A Hurwitz unless C = 0, in which case Sigma = 0 with the degenerate
// flag set. Throws std::runtime_error for non-Hurwitz A with C != 0.
LyapunovResult lyapunov_stationary_cov(Mat2 drift, Vec2 noise);

}  // namespace chemostat

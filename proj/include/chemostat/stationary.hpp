#pragma once

#include "chemostat/kinetics.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/params.hpp"

namespace chemostat {

// Closed-form stationary law of the fluctuation pair (Q, R) at a stable
// interior equilibrium, together with the induced finite-scale Gaussian
// approximation of (population count, substrate).
struct LimitLaw {
    Equilibrium equilibrium;
    double alpha = 0.0;       // stationary Var(Q)
    double beta = 0.0;        // stationary Var(R)
    double cross = 0.0;       // stationary Cov(Q, R)
    double decay_rate = 0.0;  // L = (k m / V) mu'(S*) N*; relaxation eigenvalues are -L and -D

    Sym2 qr_cov() const { return {alpha, cross, beta}; }
    double correlation() const { return qr_cov().correlation(); }

    // Joint limit law of (N, S, Q, R): deterministic (N*, S*) plus the Gaussian (Q, R).
    GaussianLaw4 joint() const {
        GaussianLaw4 g;
        g.mean = {equilibrium.population, equilibrium.substrate, 0.0, 0.0};
        g.qr_cov = qr_cov();
        return g;
    }
};

// Build the limit law at a stable interior equilibrium; throws
// std::runtime_error for washout, unstable, or degenerate equilibria.
LimitLaw limit_law(const ChemostatParams& params, const Kinetics& kin, const Equilibrium& eq);

// Gaussian approximation of the quasi-stationary (count, substrate) pair at
// population scale n: mean (n N*, S*), covariance [[n alpha, cross], [cross, beta/n]].
GaussianLaw2 discrete_gaussian_approx(const LimitLaw& law, double n);

}  // namespace chemostat

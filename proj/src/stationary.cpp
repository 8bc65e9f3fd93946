#include "chemostat/stationary.hpp"

#include <cmath>
#include <stdexcept>

namespace chemostat {

LimitLaw limit_law(const ChemostatParams& params, const Kinetics& kin, const Equilibrium& eq) {
    params.validate();
    if (eq.kind != EquilibriumKind::stable_interior || eq.degenerate)
        throw std::runtime_error("limit law exists only at a stable interior equilibrium");

    const double d = params.dilution;
    const double slope = kin.mu_prime(eq.substrate);
    const double gk = params.consumption_coeff() * slope;  // (k m / V) mu'(S*)
    const double l = gk * eq.population;

    LimitLaw law;
    law.equilibrium = eq;
    law.decay_rate = l;
    law.alpha = ((l + 1.5 * d) * (l + 1.5 * d) - 1.25 * d * d) / (gk * (d + l));
    law.beta = params.consumption_coeff() * d * d / (slope * (d + l));
    law.cross = -d / slope;
    return law;
}

GaussianLaw2 discrete_gaussian_approx(const LimitLaw& law, double n) {
    if (!(n > 0.0)) throw std::invalid_argument("population scale must be positive");
    GaussianLaw2 g;
    g.mean = {n * law.equilibrium.population, law.equilibrium.substrate};
    g.cov = {n * law.alpha, law.cross, law.beta / n};
    if (!g.cov.is_psd()) throw std::runtime_error("limit covariance lost positive semidefiniteness");
    return g;
}

}  // namespace chemostat

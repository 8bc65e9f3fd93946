#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "chemostat/interp.hpp"
#include "chemostat/params.hpp"
#include "chemostat/rng.hpp"

namespace chemostat {

// Specific growth rate curve s -> mu(s), defined for s >= 0.
//
// Variants: Monod (increasing, saturating), Haldane (unimodal, substrate
// inhibition), and tabulated curves interpolated by a monotone cubic
// (Fritsch-Carlson), which preserves the range of the samples so that
// sup-bounds taken over knots are honest.
class Kinetics {
  public:
    static Kinetics monod(double mu_max, double half_saturation);
    static Kinetics haldane(double mu_max, double half_saturation, double inhibition);
    // Samples (s_i, mu_i) with s strictly increasing from s_0 = 0 and mu_i >= 0.
    // The curve extends flat beyond the last knot.
    static Kinetics tabulated(std::vector<double> s, std::vector<double> mu);

    // Growth rate at substrate concentration s; throws std::domain_error for s < 0.
    double mu(double s) const;
    // Derivative of the growth rate.
    double mu_prime(double s) const;
    // sup of mu over [0, s_cap]; used as a thinning bound, so it must dominate.
    double max_mu(double s_cap) const;

    const std::string& label() const { return label_; }

  private:
    enum class Kind { monod, haldane, table };

    Kind kind_ = Kind::monod;
    double mu_max_ = 0.0;
    double k_s_ = 0.0;
    double inhibition_ = 0.0;
    std::string label_;
    MonotoneCubic table_;
};

// Symmetric division kernel Q on [0,1]: the law of the mass fraction kept by
// one daughter.  Symmetry (alpha ~ 1 - alpha) holds by construction for every
// variant.
class DivisionKernel {
  public:
    static DivisionKernel uniform();
    static DivisionKernel symmetric_beta(double shape);
    static DivisionKernel dirac_half();

    double sample(RngStream& rng) const;
    // E[alpha^j]
    double moment(int j) const;
    // E[alpha^j (1-alpha)^k]
    double moment_mixed(int j, int k) const;
    // \int f(alpha) Q(dalpha) for smooth f, by fixed quadrature.
    double integrate(const std::function<double(double)>& f) const;

    const std::string& label() const { return label_; }

  private:
    enum class Kind { uniform, beta, dirac };
    Kind kind_ = Kind::uniform;
    double shape_ = 1.0;
    std::string label_;
};

// Mass-structured individual dynamics: growth speed g(s, x), division rate
// b(s, x), daughter-mass kernel.  max_mass may be +inf (unbounded masses with
// mass-independent rates); the bounds are sup over the admissible rectangle
// [0, s_cap] x [0, max_mass] and are used as thinning dominators.
struct MassKinetics {
    std::function<double(double, double)> growth;
    std::function<double(double, double)> division;
    DivisionKernel kernel = DivisionKernel::uniform();
    double max_mass = std::numeric_limits<double>::infinity();
    double division_bound = 0.0;
    double growth_bound = 0.0;

    // Individuals of fixed reference mass growing at m*mu(s), dividing at rate
    // mu(s): division then leaves total mass statistics governed by mu alone.
    static MassKinetics crump_young_reduction(const Kinetics& kin, double cell_mass, double s_cap);
    // Masses pinned to [0, max_mass]: g(s,x) = rate_scale*mu(s)*x*(1 - x/max_mass),
    // b(s,x) = mu(s).  g vanishes at both mass endpoints.
    static MassKinetics pinned_growth(const Kinetics& kin, double max_mass, double rate_scale,
                                      double s_cap);

    void validate() const;
};

enum class EquilibriumKind { washout, stable_interior, unstable_interior };

struct Equilibrium {
    EquilibriumKind kind = EquilibriumKind::washout;
    double population = 0.0;  // N* at ODE scale
    double substrate = 0.0;   // S*
    double lambda_fast = 0.0;  // population-direction eigenvalue of the linearized flow
    double lambda_slow = 0.0;  // substrate-direction eigenvalue (-D)
    bool degenerate = false;   // tangent root: mu'(S*) = 0
};

// All equilibria of the limit ODE on [0, substrate_in]: the washout state
// (0, S_in) plus one interior equilibrium per root of mu(S) = D, located by a
// 10000-point scan and bisection to 1e-12.
std::vector<Equilibrium> find_equilibria(const ChemostatParams& params, const Kinetics& kin);

}  // namespace chemostat

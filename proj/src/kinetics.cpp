#include "chemostat/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chemostat {

namespace {

void check_domain(double s) {
    if (s < 0.0) throw std::domain_error("growth rate evaluated at negative substrate");
}

// 32-point Gauss-Legendre nodes/weights on (-1, 1), positive half; mirrored below.
constexpr int kGlHalf = 16;
constexpr double kGlNode[kGlHalf] = {
    0.0483076656877383162348126, 0.1444719615827964934851864, 0.2392873622521370745446032,
    0.3318686022821276497799168, 0.4213512761306353453641194, 0.5068999089322293900237475,
    0.5877157572407623290407455, 0.6630442669302152009751152, 0.7321821187402896803874267,
    0.7944837959679424069630973, 0.8493676137325699701336930, 0.8963211557660521239653072,
    0.9349060759377396891709191, 0.9647622555875064307738119, 0.9856115115452683354001750,
    0.9972638618494815635449811};
constexpr double kGlWeight[kGlHalf] = {
    0.0965400885147278005667648, 0.0956387200792748594190820, 0.0938443990808045656391802,
    0.0911738786957638847128686, 0.0876520930044038111427715, 0.0833119242269467552221991,
    0.0781938957870703064717409, 0.0723457941088485062253994, 0.0658222227763618468376501,
    0.0586840934785355471452836, 0.0509980592623761761961632, 0.0428358980222266806568786,
    0.0342738629130214331026877, 0.0253920653092620594557526, 0.0162743947309056706051706,
    0.0070186100094700966004071};

}  // namespace

// ---------------------------------------------------------------------------
// Kinetics

Kinetics Kinetics::monod(double mu_max, double half_saturation) {
    if (!(mu_max > 0.0)) throw std::invalid_argument("monod: mu_max must be positive");
    if (!(half_saturation > 0.0)) throw std::invalid_argument("monod: half_saturation must be positive");
    Kinetics k;
    k.kind_ = Kind::monod;
    k.mu_max_ = mu_max;
    k.k_s_ = half_saturation;
    k.label_ = "monod";
    return k;
}

Kinetics Kinetics::haldane(double mu_max, double half_saturation, double inhibition) {
    if (!(mu_max > 0.0)) throw std::invalid_argument("haldane: mu_max must be positive");
    if (!(half_saturation > 0.0)) throw std::invalid_argument("haldane: half_saturation must be positive");
    if (!(inhibition > 0.0)) throw std::invalid_argument("haldane: inhibition must be positive");
    Kinetics k;
    k.kind_ = Kind::haldane;
    k.mu_max_ = mu_max;
    k.k_s_ = half_saturation;
    k.inhibition_ = inhibition;
    k.label_ = "haldane";
    return k;
}

Kinetics Kinetics::tabulated(std::vector<double> s, std::vector<double> mu) {
    if (s.size() != mu.size() || s.size() < 2)
        throw std::invalid_argument("tabulated: need matching s/mu samples, at least two");
    if (s.front() != 0.0) throw std::invalid_argument("tabulated: first sample must be at s = 0");
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        if (!(s[i] < s[i + 1])) throw std::invalid_argument("tabulated: s samples must increase strictly");
    for (double v : mu)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("tabulated: mu samples must be finite and nonnegative");

    Kinetics k;
    k.kind_ = Kind::table;
    k.label_ = "tabulated";
    // Fritsch-Carlson interpolation keeps the curve inside the sample range,
    // so knot values give honest sup-bounds for thinning.
    k.table_ = MonotoneCubic(std::move(s), std::move(mu));
    return k;
}

double Kinetics::mu(double s) const {
    check_domain(s);
    switch (kind_) {
        case Kind::monod:
            return mu_max_ * s / (k_s_ + s);
        case Kind::haldane:
            return mu_max_ * s / (k_s_ + s + s * s / inhibition_);
        case Kind::table:
            return table_.value(s);
    }
    return 0.0;
}

double Kinetics::mu_prime(double s) const {
    check_domain(s);
    switch (kind_) {
        case Kind::monod: {
            const double denom = k_s_ + s;
            return mu_max_ * k_s_ / (denom * denom);
        }
        case Kind::haldane: {
            const double denom = k_s_ + s + s * s / inhibition_;
            return mu_max_ * (k_s_ - s * s / inhibition_) / (denom * denom);
        }
        case Kind::table:
            return table_.deriv(s);
    }
    return 0.0;
}

double Kinetics::max_mu(double s_cap) const {
    if (!(s_cap >= 0.0)) throw std::domain_error("max_mu needs a nonnegative cap");
    switch (kind_) {
        case Kind::monod:
            return mu(s_cap);  // increasing
        case Kind::haldane: {
            const double peak = std::sqrt(k_s_ * inhibition_);  // unique maximum
            return mu(std::min(peak, s_cap));
        }
        case Kind::table: {
            double best = mu(s_cap);
            const auto& xs = table_.knots();
            const auto& ys = table_.samples();
            for (std::size_t i = 0; i < xs.size() && xs[i] <= s_cap; ++i)
                best = std::max(best, ys[i]);
            return best;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// DivisionKernel

DivisionKernel DivisionKernel::uniform() {
    DivisionKernel q;
    q.kind_ = Kind::uniform;
    q.label_ = "uniform";
    return q;
}

DivisionKernel DivisionKernel::symmetric_beta(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("symmetric_beta: shape must be positive");
    DivisionKernel q;
    q.kind_ = Kind::beta;
    q.shape_ = shape;
    q.label_ = "beta";
    return q;
}

DivisionKernel DivisionKernel::dirac_half() {
    DivisionKernel q;
    q.kind_ = Kind::dirac;
    q.label_ = "dirac_half";
    return q;
}

double DivisionKernel::sample(RngStream& rng) const {
    switch (kind_) {
        case Kind::uniform:
            return rng.uniform01();
        case Kind::beta:
            return rng.beta(shape_, shape_);
        case Kind::dirac:
            return 0.5;
    }
    return 0.5;
}

double DivisionKernel::moment(int j) const {
    if (j < 0) throw std::invalid_argument("moment order must be nonnegative");
    switch (kind_) {
        case Kind::uniform:
            return 1.0 / (j + 1);
        case Kind::beta: {
            // E[alpha^j] for Beta(a, a): prod_{i<j} (a+i)/(2a+i)
            double p = 1.0;
            for (int i = 0; i < j; ++i) p *= (shape_ + i) / (2.0 * shape_ + i);
            return p;
        }
        case Kind::dirac:
            return std::pow(0.5, j);
    }
    return 0.0;
}

double DivisionKernel::moment_mixed(int j, int k) const {
    if (j < 0 || k < 0) throw std::invalid_argument("moment orders must be nonnegative");
    switch (kind_) {
        case Kind::uniform: {
            // Beta integral: j! k! / (j + k + 1)!
            double p = 1.0 / (j + k + 1);
            for (int i = 1; i <= k; ++i) p *= static_cast<double>(i) / (j + i);
            return p;
        }
        case Kind::beta:
            return std::exp(std::lgamma(shape_ + j) + std::lgamma(shape_ + k) -
                            std::lgamma(2.0 * shape_ + j + k) - 2.0 * std::lgamma(shape_) +
                            std::lgamma(2.0 * shape_));
        case Kind::dirac:
            return std::pow(0.5, j + k);
    }
    return 0.0;
}

double DivisionKernel::integrate(const std::function<double(double)>& f) const {
    switch (kind_) {
        case Kind::dirac:
            return f(0.5);
        case Kind::uniform: {
            double acc = 0.0;
            for (int i = 0; i < kGlHalf; ++i) {
                const double a = 0.5 * (1.0 + kGlNode[i]);
                const double b = 0.5 * (1.0 - kGlNode[i]);
                acc += 0.5 * kGlWeight[i] * (f(a) + f(b));
            }
            return acc;
        }
        case Kind::beta: {
            const double lognorm = 2.0 * std::lgamma(shape_) - std::lgamma(2.0 * shape_);
            double acc = 0.0;
            for (int i = 0; i < kGlHalf; ++i) {
                const double a = 0.5 * (1.0 + kGlNode[i]);
                const double b = 0.5 * (1.0 - kGlNode[i]);
                const double wa = std::exp((shape_ - 1.0) * std::log(a * (1.0 - a)) - lognorm);
                const double wb = std::exp((shape_ - 1.0) * std::log(b * (1.0 - b)) - lognorm);
                acc += 0.5 * kGlWeight[i] * (wa * f(a) + wb * f(b));
            }
            return acc;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// MassKinetics

MassKinetics MassKinetics::crump_young_reduction(const Kinetics& kin, double cell_mass,
                                                 double s_cap) {
    if (!(cell_mass > 0.0)) throw std::invalid_argument("cell_mass must be positive");
    MassKinetics mk;
    mk.growth = [kin, cell_mass](double s, double) { return cell_mass * kin.mu(s); };
    mk.division = [kin](double s, double) { return kin.mu(s); };
    mk.kernel = DivisionKernel::uniform();
    mk.max_mass = std::numeric_limits<double>::infinity();
    mk.division_bound = kin.max_mu(s_cap);
    mk.growth_bound = cell_mass * kin.max_mu(s_cap);
    return mk;
}

MassKinetics MassKinetics::pinned_growth(const Kinetics& kin, double max_mass, double rate_scale,
                                         double s_cap) {
    if (!(max_mass > 0.0) || !std::isfinite(max_mass))
        throw std::invalid_argument("pinned_growth: max_mass must be finite and positive");
    if (!(rate_scale > 0.0)) throw std::invalid_argument("pinned_growth: rate_scale must be positive");
    MassKinetics mk;
    mk.growth = [kin, max_mass, rate_scale](double s, double x) {
        return rate_scale * kin.mu(s) * x * (1.0 - x / max_mass);
    };
    mk.division = [kin](double s, double) { return kin.mu(s); };
    mk.kernel = DivisionKernel::uniform();
    mk.max_mass = max_mass;
    mk.division_bound = kin.max_mu(s_cap);
    mk.growth_bound = rate_scale * kin.max_mu(s_cap) * max_mass * 0.25;
    return mk;
}

void MassKinetics::validate() const {
    if (!growth || !division) throw std::invalid_argument("mass kinetics needs growth and division");
    if (!(max_mass > 0.0)) throw std::invalid_argument("max_mass must be positive");
    if (!(division_bound >= 0.0) || !std::isfinite(division_bound))
        throw std::invalid_argument("division_bound must be finite and nonnegative");
    if (!(growth_bound >= 0.0) || !std::isfinite(growth_bound))
        throw std::invalid_argument("growth_bound must be finite and nonnegative");
    if (std::isfinite(max_mass)) {
        // Mass endpoints are invariant: growth pinned to zero at 0 and max_mass.
        if (std::abs(growth(0.0, 0.0)) > 0.0 || std::abs(growth(0.0, max_mass)) > 0.0)
            throw std::invalid_argument("growth must vanish at mass 0 and max_mass");
    }
}

// ---------------------------------------------------------------------------
// Equilibria

std::vector<Equilibrium> find_equilibria(const ChemostatParams& params, const Kinetics& kin) {
    params.validate();
    const double d = params.dilution;
    const double s_in = params.substrate_in;
    const double coeff = params.consumption_coeff();  // k m / V

    std::vector<Equilibrium> out;
    {
        Equilibrium w;
        w.kind = EquilibriumKind::washout;
        w.population = 0.0;
        w.substrate = s_in;
        w.lambda_fast = kin.mu(s_in) - d;
        w.lambda_slow = -d;
        out.push_back(w);
    }

    const auto f = [&](double s) { return kin.mu(s) - d; };
    constexpr int kScan = 10000;
    constexpr double kTol = 1e-12;
    std::vector<double> roots;
    double prev_s = 0.0, prev_f = f(0.0);
    for (int i = 1; i <= kScan; ++i) {
        const double s = s_in * static_cast<double>(i) / kScan;
        const double fs = f(s);
        if (prev_f == 0.0) {
            roots.push_back(prev_s);
        } else if (fs * prev_f < 0.0) {
            double lo = prev_s, hi = s, flo = prev_f;
            while (hi - lo > kTol) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                } else if (fm * flo < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            // Bisection stalls at kTol; the closed-form laws downstream want
            // the root at machine precision, so polish with guarded Newton.
            double root = 0.5 * (lo + hi);
            for (int it = 0; it < 6; ++it) {
                const double deriv = kin.mu_prime(root);
                if (deriv == 0.0) break;
                const double next = root - f(root) / deriv;
                if (!(next > prev_s && next < s) || next == root) break;
                root = next;
            }
            roots.push_back(root);
        }
        prev_s = s;
        prev_f = fs;
    }
    if (prev_f == 0.0 && prev_s < s_in) roots.push_back(prev_s);

    const double dedupe = s_in / kScan * 0.5;
    double last = -1.0;
    for (double s_star : roots) {
        if (last >= 0.0 && s_star - last < dedupe) continue;
        last = s_star;
        if (s_star <= 0.0 || s_star >= s_in) continue;  // washout handled above
        Equilibrium e;
        e.substrate = s_star;
        e.population = (s_in - s_star) / coeff;
        const double slope = kin.mu_prime(s_star);
        e.lambda_fast = -coeff * slope * e.population;  // = -(S_in - S*) mu'(S*)
        e.lambda_slow = -d;
        e.degenerate = std::abs(slope) < 1e-9 * d / std::max(s_in, 1e-300);
        e.kind = (slope > 0.0 && !e.degenerate) ? EquilibriumKind::stable_interior
                                                : EquilibriumKind::unstable_interior;
        out.push_back(e);
    }
    return out;
}

}  // namespace chemostat

#include "chemostat/exact_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace chemostat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative slack on the dominating rate: anything beyond accumulated rounding
// means the bound is wrong and the sampled law would be biased.
constexpr double kBoundSlack = 1e-12;

double frame_time(const SimOptions& opt, std::size_t k) {
    return opt.horizon * static_cast<double>(k) / static_cast<double>(opt.frames - 1);
}

// Substrate relaxation with no consumers: dS/dt = D (S_in - S), solved exactly.
double relax_substrate(const ChemostatParams& p, double s0, double dt) {
    return p.substrate_in + (s0 - p.substrate_in) * std::exp(-p.dilution * dt);
}

}  // namespace

void SimOptions::validate() const {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(macro_step > 0.0)) throw std::invalid_argument("macro_step must be positive");
    if (frames < 2) throw std::invalid_argument("need at least two frames");
}

std::optional<double> thinning_next_event(double rate_bound, double t0, double window_end,
                                          const std::function<double(double)>& rate,
                                          RngStream& rng) {
    if (!(rate_bound > 0.0)) throw std::invalid_argument("rate bound must be positive");
    if (!(window_end >= t0)) throw std::invalid_argument("window must not precede its start");
    double t = t0;
    for (;;) {
        t += rng.exponential(rate_bound);
        if (t > window_end) return std::nullopt;
        const double lam = rate(t);
        if (lam > rate_bound * (1.0 + kBoundSlack))
            throw std::logic_error("thinning bound violated: intensity exceeds its dominator");
        if (rng.uniform01() * rate_bound < lam) return t;
    }
}

// ---------------------------------------------------------------------------
// Birth-death chemostat

Trajectory simulate_crump_young(const ChemostatParams& params, const Kinetics& kin,
                                CrumpYoungState init, const SimOptions& options, RngStream& rng) {
    params.validate();
    options.validate();
    if (init.count < 0) throw std::invalid_argument("initial count must be nonnegative");
    if (!(init.substrate >= 0.0)) throw std::invalid_argument("initial substrate must be nonnegative");

    const double d = params.dilution;
    const double s_cap = params.substrate_cap(init.substrate);
    const double mu_bar = kin.max_mu(s_cap);
    const double coeff = params.consumption_coeff_scaled();  // k m / (n V)

    Trajectory traj;
    traj.model = "crump_young";
    traj.frames.reserve(options.frames);

    std::int64_t count = init.count;
    double s = init.substrate;
    double t = 0.0;
    std::size_t next_frame = 0;

    const auto rhs = [&](double sub, double pop) {
        const double sv = sub > 0.0 ? sub : 0.0;
        return d * (params.substrate_in - sv) - coeff * kin.mu(sv) * pop;
    };
    // One RK4 step of the substrate with the head count frozen (exact between jumps).
    const auto rk4 = [&](double sub, double pop, double h) {
        const double k1 = rhs(sub, pop);
        const double k2 = rhs(sub + 0.5 * h * k1, pop);
        const double k3 = rhs(sub + 0.5 * h * k2, pop);
        const double k4 = rhs(sub + h * k3, pop);
        double out = sub + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        return std::clamp(out, 0.0, s_cap);
    };
    const auto advance_to = [&](double target) {
        while (t < target) {
            const double h = std::min(options.macro_step, target - t);
            s = rk4(s, static_cast<double>(count), h);
            t = (target - t <= options.macro_step) ? target : t + h;
        }
    };
    const auto record = [&](double ft) {
        traj.frames.push_back({ft, static_cast<double>(count), s, std::nan(""), std::nan("")});
        ++next_frame;
    };
    // Advance the substrate to `stop`, recording any frames passed on the way.
    const auto run_to = [&](double stop) {
        while (next_frame < options.frames && frame_time(options, next_frame) <= stop) {
            advance_to(frame_time(options, next_frame));
            record(t);
        }
        advance_to(stop);
    };

    record(0.0);
    while (t < options.horizon) {
        if (count == 0) {
            traj.extinct = true;
            traj.extinction_time = t;
            const double t_ext = t, s_ext = s;
            while (next_frame < options.frames) {
                const double ft = frame_time(options, next_frame);
                t = ft;
                s = relax_substrate(params, s_ext, ft - t_ext);
                record(ft);
            }
            t = options.horizon;
            break;
        }
        const double lam = (mu_bar + d) * static_cast<double>(count);
        const double cand = t + rng.exponential(lam);
        run_to(std::min(cand, options.horizon));
        if (cand > options.horizon) break;

        const double growth = kin.mu(s) * static_cast<double>(count);
        const double total = growth + d * static_cast<double>(count);
        if (total > lam * (1.0 + kBoundSlack))
            throw std::logic_error("thinning bound violated: intensity exceeds its dominator");
        // One uniform classifies the candidate: [0, growth) birth,
        // [growth, total) death, [total, lam) rejection.
        const double u = rng.uniform01() * lam;
        if (u < growth) {
            ++count;
            ++traj.births;
        } else if (u < total) {
            --count;
            ++traj.deaths;
        }
    }
    while (next_frame < options.frames) {  // no event landed past the last frames
        advance_to(frame_time(options, next_frame));
        record(t);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Mass-structured model

namespace {

// Coupled RK4 of all masses and the substrate with the population composition
// frozen; workspace reused across steps.
class IbmIntegrator {
  public:
    IbmIntegrator(const ChemostatParams& p, const MassKinetics& mk, double s_cap)
        : p_(p), mk_(mk), s_cap_(s_cap),
          coeff_(p.stoichiometry / (p.scale * p.volume)) {}

    void step(std::vector<double>& masses, double& s, double h) {
        const std::size_t n = masses.size();
        resize(n);
        rhs(masses, s, k1_, &ks1_);
        stage(masses, k1_, 0.5 * h, tmp_);
        rhs(tmp_, s + 0.5 * h * ks1_, k2_, &ks2_);
        stage(masses, k2_, 0.5 * h, tmp_);
        rhs(tmp_, s + 0.5 * h * ks2_, k3_, &ks3_);
        stage(masses, k3_, h, tmp_);
        rhs(tmp_, s + h * ks3_, k4_, &ks4_);
        for (std::size_t i = 0; i < n; ++i) {
            double x = masses[i] + h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
            if (std::isfinite(mk_.max_mass)) x = std::clamp(x, 0.0, mk_.max_mass);
            masses[i] = x;
        }
        s = std::clamp(s + h / 6.0 * (ks1_ + 2.0 * ks2_ + 2.0 * ks3_ + ks4_), 0.0, s_cap_);
    }

  private:
    void resize(std::size_t n) {
        if (k1_.size() != n) {
            k1_.resize(n);
            k2_.resize(n);
            k3_.resize(n);
            k4_.resize(n);
            tmp_.resize(n);
        }
    }
    void rhs(const std::vector<double>& masses, double s, std::vector<double>& dx, double* ds) {
        const double sv = std::clamp(s, 0.0, s_cap_);
        double growth_sum = 0.0;
        for (std::size_t i = 0; i < masses.size(); ++i) {
            const double g = mk_.growth(sv, masses[i]);
            dx[i] = g;
            growth_sum += g;
        }
        // dS/dt = D (S_in - S) - (k / (n V)) * sum_i g(S, x_i)
        *ds = p_.dilution * (p_.substrate_in - sv) - coeff_ * growth_sum;
    }
    static void stage(const std::vector<double>& base, const std::vector<double>& k, double h,
                      std::vector<double>& out) {
        for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + h * k[i];
    }

    const ChemostatParams& p_;
    const MassKinetics& mk_;
    double s_cap_;
    double coeff_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
    double ks1_ = 0, ks2_ = 0, ks3_ = 0, ks4_ = 0;
};

}  // namespace

Trajectory simulate_ibm(const ChemostatParams& params, const MassKinetics& mk,
                        PopulationState init, const SimOptions& options, RngStream& rng,
                        IbmObserver* observer) {
    params.validate();
    options.validate();
    mk.validate();
    if (!(init.substrate >= 0.0)) throw std::invalid_argument("initial substrate must be nonnegative");
    for (double x : init.masses)
        if (!(x >= 0.0) || x > mk.max_mass)
            throw std::invalid_argument("initial masses must lie in [0, max_mass]");

    const double d = params.dilution;
    const double s_cap = params.substrate_cap(init.substrate);

    Trajectory traj;
    traj.model = "ibm";
    traj.frames.reserve(options.frames);

    std::vector<double> masses = std::move(init.masses);
    double s = init.substrate;
    double t = 0.0;
    std::size_t next_frame = 0;
    IbmIntegrator integ(params, mk, s_cap);

    const auto notify_state = [&] {
        if (observer) observer->at_state(t, masses, s);
    };
    const auto advance_to = [&](double target) {
        while (t < target) {
            const double h = std::min(options.macro_step, target - t);
            integ.step(masses, s, h);
            t = (target - t <= options.macro_step) ? target : t + h;
            notify_state();
        }
    };
    const auto record = [&](double ft) {
        traj.frames.push_back(
            {ft, static_cast<double>(masses.size()), s, std::nan(""), std::nan("")});
        if (observer) observer->at_frame(next_frame, ft);
        ++next_frame;
    };
    const auto run_to = [&](double stop) {
        while (next_frame < options.frames && frame_time(options, next_frame) <= stop) {
            advance_to(frame_time(options, next_frame));
            record(t);
        }
        advance_to(stop);
    };

    notify_state();
    record(0.0);
    while (t < options.horizon) {
        const auto n = masses.size();
        if (n == 0) {
            traj.extinct = true;
            traj.extinction_time = t;
            const double t_ext = t, s_ext = s;
            while (next_frame < options.frames) {
                const double ft = frame_time(options, next_frame);
                t = ft;
                s = relax_substrate(params, s_ext, ft - t_ext);
                notify_state();
                record(ft);
            }
            t = options.horizon;
            break;
        }
        const double lam = (mk.division_bound + d) * static_cast<double>(n);
        const double cand = t + rng.exponential(lam);
        run_to(std::min(cand, options.horizon));
        if (cand > options.horizon) break;

        double division_sum = 0.0;
        for (double x : masses) division_sum += mk.division(s, x);
        const double total = division_sum + d * static_cast<double>(n);
        if (total > lam * (1.0 + kBoundSlack))
            throw std::logic_error("thinning bound violated: intensity exceeds its dominator");
        const double u = rng.uniform01() * lam;
        if (u < division_sum) {
            // Accepted division: the coordinate of u inside the running sum
            // selects the individual with probability proportional to its rate.
            std::size_t idx = 0;
            double cum = 0.0;
            for (; idx + 1 < n; ++idx) {
                cum += mk.division(s, masses[idx]);
                if (u < cum) break;
            }
            const double x = masses[idx];
            const double frac = mk.kernel.sample(rng);
            masses[idx] = frac * x;
            masses.push_back((1.0 - frac) * x);
            ++traj.births;
            if (observer) observer->at_event(t, masses, s);
        } else if (u < total) {
            const auto idx = std::min(
                static_cast<std::size_t>((u - division_sum) / d), n - 1);
            masses[idx] = masses.back();
            masses.pop_back();
            ++traj.deaths;
            if (observer) observer->at_event(t, masses, s);
        }
    }
    while (next_frame < options.frames) {
        advance_to(frame_time(options, next_frame));
        record(t);
    }
    if (observer) traj.qv_records = observer->take_records();
    return traj;
}

}  // namespace chemostat

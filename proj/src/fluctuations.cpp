#include "chemostat/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chemostat {

namespace {

double poly_eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) acc = acc * x + c[j];
    return acc;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double w = pos - static_cast<double>(lo);
    return sorted[lo] + w * (sorted[lo + 1] - sorted[lo]);
}

void check_aligned(std::span<const Trajectory> ensemble) {
    if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
    const auto& first = ensemble.front().frames;
    if (first.empty()) throw std::invalid_argument("ensemble trajectories have no frames");
    for (const auto& traj : ensemble) {
        if (traj.frames.size() != first.size())
            throw std::invalid_argument("ensemble frame grids are not aligned");
        for (std::size_t k = 0; k < first.size(); ++k)
            if (std::abs(traj.frames[k].time - first[k].time) >
                1e-9 * std::max(1.0, std::abs(first.back().time)))
                throw std::invalid_argument("ensemble frame grids are not aligned");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// TestFunction

TestFunction TestFunction::constant(double c) {
    TestFunction f;
    f.poly_ = true;
    f.coeffs_ = {c};
    f.name_ = c == 1.0 ? "one" : "constant";
    return f;
}

TestFunction TestFunction::identity() {
    TestFunction f;
    f.poly_ = true;
    f.coeffs_ = {0.0, 1.0};
    f.name_ = "identity";
    return f;
}

TestFunction TestFunction::polynomial(std::vector<double> coeffs, std::string name) {
    if (coeffs.empty()) throw std::invalid_argument("polynomial needs at least one coefficient");
    TestFunction f;
    f.poly_ = true;
    f.coeffs_ = std::move(coeffs);
    f.name_ = std::move(name);
    return f;
}

TestFunction TestFunction::sampled(std::vector<double> xs, std::vector<double> ys,
                                   std::string name) {
    TestFunction f;
    f.poly_ = false;
    f.curve_ = MonotoneCubic(std::move(xs), std::move(ys));
    f.name_ = std::move(name);
    return f;
}

double TestFunction::value(double x) const { return poly_ ? poly_eval(coeffs_, x) : curve_.value(x); }

double TestFunction::deriv(double x) const {
    if (!poly_) return curve_.deriv(x);
    double acc = 0.0;
    for (std::size_t j = coeffs_.size(); j-- > 1;)
        acc = acc * x + coeffs_[j] * static_cast<double>(j);
    return acc;
}

// ---------------------------------------------------------------------------
// DivisionBracket

DivisionBracket::DivisionBracket(TestFunction f, DivisionKernel kernel)
    : f_(std::move(f)), kernel_(std::move(kernel)) {
    const auto* coeffs = f_.coefficients();
    if (!coeffs) return;
    poly_ = true;
    const auto& c = *coeffs;
    const std::size_t d = c.size();
    // f(ax) + f((1-a)x) - f(x) = sum_j c_j x^j e_j(a), e_j(a) = a^j + (1-a)^j - 1.
    b1_.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j)
        b1_[j] = c[j] * (2.0 * kernel_.moment(static_cast<int>(j)) - 1.0);
    b2_.assign(2 * d - 1, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < d; ++k) {
            const int ji = static_cast<int>(j), ki = static_cast<int>(k);
            const double e2 = 2.0 * kernel_.moment(ji + ki) + 2.0 * kernel_.moment_mixed(ji, ki) -
                              2.0 * kernel_.moment(ji) - 2.0 * kernel_.moment(ki) + 1.0;
            b2_[j + k] += c[j] * c[k] * e2;
        }
    }
}

double DivisionBracket::first(double x) const {
    if (poly_) return poly_eval(b1_, x);
    return kernel_.integrate([&](double a) {
        return f_.value(a * x) + f_.value((1.0 - a) * x) - f_.value(x);
    });
}

double DivisionBracket::second(double x) const {
    if (poly_) return poly_eval(b2_, x);
    return kernel_.integrate([&](double a) {
        const double jump = f_.value(a * x) + f_.value((1.0 - a) * x) - f_.value(x);
        return jump * jump;
    });
}

// ---------------------------------------------------------------------------
// MartingaleObserver

MartingaleObserver::MartingaleObserver(std::vector<TestFunction> functions,
                                       const MassKinetics& mk, const ChemostatParams& params,
                                       std::size_t frames)
    : mk_(&mk), scale_(params.scale), dilution_(params.dilution) {
    if (functions.empty()) throw std::invalid_argument("observer needs at least one test function");
    slots_.reserve(functions.size());
    for (auto& f : functions) {
        Slot slot{DivisionBracket(f, mk.kernel), 0, 0, 0, 0, 0, 0, 0, {}};
        slot.record.name = f.name();
        slot.record.scale = scale_;
        slot.record.observable.assign(frames, 0.0);
        slot.record.drift_integral.assign(frames, 0.0);
        slot.record.qv_division.assign(frames, 0.0);
        slot.record.qv_death.assign(frames, 0.0);
        slots_.push_back(std::move(slot));
    }
}

void MartingaleObserver::evaluate(const std::vector<double>& masses, double substrate) {
    for (auto& slot : slots_) {
        slot.value = 0.0;
        slot.drift_rate = 0.0;
        slot.div_rate = 0.0;
        slot.death_rate = 0.0;
    }
    for (double x : masses) {
        const double b = mk_->division(substrate, x);
        const double g = mk_->growth(substrate, x);
        for (auto& slot : slots_) {
            const double fx = slot.bracket.function().value(x);
            slot.value += fx;
            slot.drift_rate += b * slot.bracket.first(x) + g * slot.bracket.function().deriv(x) -
                               dilution_ * fx;
            slot.div_rate += b * slot.bracket.second(x);
            slot.death_rate += dilution_ * fx * fx;
        }
    }
    const double inv = 1.0 / scale_;
    for (auto& slot : slots_) {
        slot.value *= inv;
        slot.drift_rate *= inv;
        slot.div_rate *= inv;
        slot.death_rate *= inv;
    }
}

void MartingaleObserver::at_state(double t, const std::vector<double>& masses, double substrate) {
    if (!primed_) {
        evaluate(masses, substrate);
        last_t_ = t;
        primed_ = true;
        return;
    }
    const double span = t - last_t_;
    std::vector<double> prev_drift(slots_.size()), prev_div(slots_.size()), prev_death(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        prev_drift[i] = slots_[i].drift_rate;
        prev_div[i] = slots_[i].div_rate;
        prev_death[i] = slots_[i].death_rate;
    }
    evaluate(masses, substrate);
    if (span > 0.0) {
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            slots_[i].drift_acc += 0.5 * span * (prev_drift[i] + slots_[i].drift_rate);
            slots_[i].div_acc += 0.5 * span * (prev_div[i] + slots_[i].div_rate);
            slots_[i].death_acc += 0.5 * span * (prev_death[i] + slots_[i].death_rate);
        }
    }
    last_t_ = t;
}

void MartingaleObserver::at_event(double t, const std::vector<double>& masses, double substrate) {
    // The integrand jumps with the population; restart the trapezoid from the
    // post-event rates without accumulating across the jump instant.
    evaluate(masses, substrate);
    last_t_ = t;
}

void MartingaleObserver::at_frame(std::size_t frame_index, double) {
    for (auto& slot : slots_) {
        if (frame_index >= slot.record.observable.size())
            throw std::logic_error("frame index out of range in martingale observer");
        slot.record.observable[frame_index] = slot.value;
        slot.record.drift_integral[frame_index] = slot.drift_acc;
        slot.record.qv_division[frame_index] = slot.div_acc;
        slot.record.qv_death[frame_index] = slot.death_acc;
    }
}

std::vector<QvFunctionRecord> MartingaleObserver::take_records() {
    std::vector<QvFunctionRecord> out;
    out.reserve(slots_.size());
    for (auto& slot : slots_) out.push_back(std::move(slot.record));
    return out;
}

// ---------------------------------------------------------------------------
// qv_check

QvReport qv_check(std::span<const Trajectory> ensemble, const std::string& function_name) {
    check_aligned(ensemble);
    const auto find_record = [&](const Trajectory& traj) -> const QvFunctionRecord* {
        for (const auto& rec : traj.qv_records)
            if (rec.name == function_name) return &rec;
        return nullptr;
    };
    const QvFunctionRecord* first = find_record(ensemble.front());
    if (!first)
        throw std::runtime_error("martingale bookkeeping for '" + function_name +
                                 "' was not recorded during simulation");
    const std::size_t frames = first->observable.size();
    const std::size_t reps = ensemble.size();

    QvReport report;
    report.function = function_name;
    report.replicates = reps;
    report.times.resize(frames);
    for (std::size_t k = 0; k < frames; ++k) report.times[k] = ensemble.front().frames[k].time;

    std::vector<double> sum_sq(frames, 0.0), sum_sq2(frames, 0.0);
    std::vector<double> sum_div(frames, 0.0), sum_death(frames, 0.0);
    for (const auto& traj : ensemble) {
        const QvFunctionRecord* rec = find_record(traj);
        if (!rec || rec->observable.size() != frames)
            throw std::runtime_error("martingale bookkeeping for '" + function_name +
                                     "' is missing or misaligned in the ensemble");
        for (std::size_t k = 0; k < frames; ++k) {
            const double mart = rec->observable[k] - rec->observable[0] - rec->drift_integral[k];
            const double sq = rec->scale * mart * mart;
            sum_sq[k] += sq;
            sum_sq2[k] += sq * sq;
            sum_div[k] += rec->qv_division[k];
            sum_death[k] += rec->qv_death[k];
        }
    }
    report.observed.resize(frames);
    report.observed_se.resize(frames);
    report.predicted.resize(frames);
    report.predicted_division.resize(frames);
    report.predicted_death.resize(frames);
    report.ratio.resize(frames);
    const double r = static_cast<double>(reps);
    for (std::size_t k = 0; k < frames; ++k) {
        const double mean_sq = sum_sq[k] / r;
        const double var_sq = std::max(sum_sq2[k] / r - mean_sq * mean_sq, 0.0);
        report.observed[k] = mean_sq;
        report.observed_se[k] = reps > 1 ? std::sqrt(var_sq / (r - 1.0)) : 0.0;
        report.predicted_division[k] = sum_div[k] / r;
        report.predicted_death[k] = sum_death[k] / r;
        report.predicted[k] = report.predicted_division[k] + report.predicted_death[k];
        report.ratio[k] = report.predicted[k] > 0.0
                              ? mean_sq / report.predicted[k]
                              : std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

// ---------------------------------------------------------------------------
// fluctuation_paths

FluctuationEnsemble fluctuation_paths(std::span<const Trajectory> ensemble, const OdePath& path,
                                      double n) {
    check_aligned(ensemble);
    if (!(n > 0.0)) throw std::invalid_argument("population scale must be positive");
    const auto& frames = ensemble.front().frames;
    if (path.horizon() < frames.back().time - 1e-9)
        throw std::invalid_argument("ode path does not cover the ensemble horizon");

    FluctuationEnsemble out;
    out.times.reserve(frames.size());
    std::vector<OdeState2> ref;
    ref.reserve(frames.size());
    for (const auto& f : frames) {
        out.times.push_back(f.time);
        ref.push_back(path.state_at(f.time));
    }
    const double sqrt_n = std::sqrt(n);
    out.paths.reserve(ensemble.size());
    for (const auto& traj : ensemble) {
        std::vector<Vec2> qr(frames.size());
        for (std::size_t k = 0; k < frames.size(); ++k) {
            qr[k] = {(traj.frames[k].population - n * ref[k].population) / sqrt_n,
                     sqrt_n * (traj.frames[k].substrate - ref[k].substrate)};
        }
        out.paths.push_back(std::move(qr));
    }
    return out;
}

// ---------------------------------------------------------------------------
// estimate_qsd

QsdReport estimate_qsd(std::span<const Trajectory> ensemble, const GaussianLaw2* reference) {
    check_aligned(ensemble);
    QsdReport rep;
    rep.replicates = ensemble.size();

    const std::size_t last = ensemble.front().frames.size() - 1;
    const std::size_t mid = last / 2;
    double sp = 0, ss = 0, sp_mid = 0, ss_mid = 0;
    std::size_t ns = 0;
    for (const auto& traj : ensemble) {
        if (traj.extinct) continue;
        ++ns;
        sp += traj.frames[last].population;
        ss += traj.frames[last].substrate;
        sp_mid += traj.frames[mid].population;
        ss_mid += traj.frames[mid].substrate;
    }
    rep.survivors = ns;
    if (ns == 0)
        throw std::runtime_error("quasi-stationary estimate needs surviving replicates; all went extinct");
    const double dn = static_cast<double>(ns);
    rep.mean = {sp / dn, ss / dn};
    const Vec2 mean_mid{sp_mid / dn, ss_mid / dn};
    rep.mean_drift_pop = std::abs(rep.mean.x - mean_mid.x) / std::max(std::abs(rep.mean.x), 1e-300);
    rep.mean_drift_sub = std::abs(rep.mean.y - mean_mid.y) / std::max(std::abs(rep.mean.y), 1e-300);

    double cpp = 0, css = 0, cps = 0;
    for (const auto& traj : ensemble) {
        if (traj.extinct) continue;
        const double dp = traj.frames[last].population - rep.mean.x;
        const double ds = traj.frames[last].substrate - rep.mean.y;
        cpp += dp * dp;
        css += ds * ds;
        cps += dp * ds;
    }
    if (ns > 1) {
        rep.cov = {cpp / (dn - 1.0), cps / (dn - 1.0), css / (dn - 1.0)};
    } else {
        rep.degenerate = true;
    }
    if (rep.cov.xx <= 0.0 || rep.cov.yy <= 0.0) {
        rep.degenerate = true;
    } else {
        rep.correlation = rep.cov.correlation();
    }

    if (reference) {
        rep.compared = true;
        if (rep.cov.xx > 0.0)
            rep.z_mean_pop = (rep.mean.x - reference->mean.x) / std::sqrt(rep.cov.xx / dn);
        if (rep.cov.yy > 0.0)
            rep.z_mean_sub = (rep.mean.y - reference->mean.y) / std::sqrt(rep.cov.yy / dn);
        const double se_ratio = ns > 1 ? std::sqrt(2.0 / (dn - 1.0)) : 0.0;
        if (reference->cov.xx > 0.0 && se_ratio > 0.0)
            rep.z_var_pop = (rep.cov.xx / reference->cov.xx - 1.0) / se_ratio;
        if (reference->cov.yy > 0.0 && se_ratio > 0.0)
            rep.z_var_sub = (rep.cov.yy / reference->cov.yy - 1.0) / se_ratio;
        if (!rep.degenerate && reference->cov.xx > 0.0 && reference->cov.yy > 0.0)
            rep.corr_diff = rep.correlation - reference->cov.correlation();
        const auto exceeds = [](double z, double lim) { return std::isfinite(z) && std::abs(z) > lim; };
        rep.deviates = exceeds(rep.z_mean_pop, 4.0) || exceeds(rep.z_mean_sub, 4.0) ||
                       exceeds(rep.z_var_pop, 4.0) || exceeds(rep.z_var_sub, 4.0) ||
                       exceeds(rep.corr_diff, 0.1) || rep.degenerate;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// confidence_ellipse

Ellipse confidence_ellipse(const GaussianLaw2& law, double level) {
    if (!(level > 0.0) || !(level < 1.0))
        throw std::invalid_argument("confidence level must lie strictly between 0 and 1");
    const double q = -2.0 * std::log1p(-level);  // chi-square(2) quantile
    const auto ev = law.cov.eigenvalues();
    Ellipse e;
    e.center = law.mean;
    e.level = level;
    const double lo = std::max(ev[1], 0.0);
    e.semi_major = std::sqrt(q * std::max(ev[0], 0.0));
    e.semi_minor = std::sqrt(q * lo);
    e.degenerate = !(ev[1] > 0.0);
    const Vec2 axis = law.cov.principal_axis();
    e.angle = std::atan2(axis.y, axis.x);
    if (e.angle > 1.5707963267948966) e.angle -= 3.141592653589793;
    if (e.angle <= -1.5707963267948966) e.angle += 3.141592653589793;
    return e;
}

// ---------------------------------------------------------------------------
// extinction_stats

SurvivalReport extinction_stats(std::span<const Trajectory> ensemble,
                                const SurvivalOptions& options) {
    check_aligned(ensemble);
    if (options.grid_points < 2) throw std::invalid_argument("survival grid needs at least two points");
    SurvivalReport rep;
    rep.replicates = ensemble.size();

    std::vector<double> ext_times;
    for (const auto& traj : ensemble)
        if (traj.extinct) ext_times.push_back(traj.extinction_time);
    rep.extinct = ext_times.size();
    std::sort(ext_times.begin(), ext_times.end());

    const double horizon = ensemble.front().frames.back().time;
    rep.times.resize(options.grid_points);
    rep.survival.resize(options.grid_points);
    const double r = static_cast<double>(rep.replicates);
    for (std::size_t k = 0; k < options.grid_points; ++k) {
        const double t =
            horizon * static_cast<double>(k) / static_cast<double>(options.grid_points - 1);
        rep.times[k] = t;
        const auto dead = static_cast<std::size_t>(
            std::upper_bound(ext_times.begin(), ext_times.end(), t) - ext_times.begin());
        rep.survival[k] = (r - static_cast<double>(dead)) / r;
    }

    if (rep.extinct < 10) return rep;  // too few deaths for a tail fit
    double wb = options.window_begin, we = options.window_end;
    if (!std::isfinite(wb)) wb = quantile_sorted(ext_times, 0.5);
    if (!std::isfinite(we)) we = quantile_sorted(ext_times, 0.99);
    rep.window_begin = wb;
    rep.window_end = we;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < options.grid_points; ++k) {
        if (rep.times[k] < wb || rep.times[k] > we || rep.survival[k] <= 0.0) continue;
        const double x = rep.times[k], y = std::log(rep.survival[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 3) return rep;
    const double dc = static_cast<double>(count);
    const double denom = dc * sxx - sx * sx;
    if (denom <= 0.0) return rep;
    const double slope = (dc * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / dc;
    double ss_res = 0, ss_tot = 0;
    const double y_mean = sy / dc;
    for (std::size_t k = 0; k < options.grid_points; ++k) {
        if (rep.times[k] < wb || rep.times[k] > we || rep.survival[k] <= 0.0) continue;
        const double y = std::log(rep.survival[k]);
        const double fit = intercept + slope * rep.times[k];
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - y_mean) * (y - y_mean);
    }
    rep.fitted = true;
    rep.decay_rate = -slope;
    rep.log_intercept = intercept;
    rep.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return rep;
}

// ---------------------------------------------------------------------------
// summarize_ensemble

EnsembleSummary summarize_ensemble(std::span<const Trajectory> ensemble, std::uint64_t seed) {
    check_aligned(ensemble);
    EnsembleSummary sum;
    sum.replicates = ensemble.size();
    sum.seed = seed;
    const std::size_t frames = ensemble.front().frames.size();
    const double r = static_cast<double>(ensemble.size());
    sum.times.resize(frames);
    sum.mean_pop.assign(frames, 0.0);
    sum.var_pop.assign(frames, 0.0);
    sum.mean_sub.assign(frames, 0.0);
    sum.var_sub.assign(frames, 0.0);
    sum.cov_ps.assign(frames, 0.0);
    sum.survival.assign(frames, 0.0);
    for (std::size_t k = 0; k < frames; ++k) sum.times[k] = ensemble.front().frames[k].time;

    for (const auto& traj : ensemble) {
        if (traj.extinct) sum.extinction_times.push_back(traj.extinction_time);
        for (std::size_t k = 0; k < frames; ++k) {
            sum.mean_pop[k] += traj.frames[k].population;
            sum.mean_sub[k] += traj.frames[k].substrate;
            if (!traj.extinct || traj.extinction_time > sum.times[k]) sum.survival[k] += 1.0;
        }
    }
    for (std::size_t k = 0; k < frames; ++k) {
        sum.mean_pop[k] /= r;
        sum.mean_sub[k] /= r;
        sum.survival[k] /= r;
    }
    for (const auto& traj : ensemble) {
        for (std::size_t k = 0; k < frames; ++k) {
            const double dp = traj.frames[k].population - sum.mean_pop[k];
            const double ds = traj.frames[k].substrate - sum.mean_sub[k];
            sum.var_pop[k] += dp * dp;
            sum.var_sub[k] += ds * ds;
            sum.cov_ps[k] += dp * ds;
        }
    }
    const double denom = ensemble.size() > 1 ? r - 1.0 : 1.0;
    for (std::size_t k = 0; k < frames; ++k) {
        sum.var_pop[k] /= denom;
        sum.var_sub[k] /= denom;
        sum.cov_ps[k] /= denom;
    }
    return sum;
}

}  // namespace chemostat

#include "chemostat/ode.hpp"

#include <cmath>
#include <stdexcept>

namespace chemostat {

std::int64_t uniform_grid_steps(double horizon, double dt) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    const double raw = horizon / dt;
    auto n = static_cast<std::int64_t>(std::ceil(raw - 1e-9));
    return n > 0 ? n : 1;
}

namespace {

double clamp(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

OdeState2 OdePath::state_at(double t) const {
    if (states_.empty()) throw std::logic_error("empty ode path");
    if (t <= 0.0) return states_.front();
    const double pos = t / dt_;
    const auto idx = static_cast<std::size_t>(pos);
    if (idx + 1 >= states_.size()) return states_.back();
    const double w = pos - static_cast<double>(idx);
    const OdeState2& a = states_[idx];
    const OdeState2& b = states_[idx + 1];
    return {a.population + w * (b.population - a.population),
            a.substrate + w * (b.substrate - a.substrate)};
}

OdeState2 chemostat_rhs(const ChemostatParams& params, const Kinetics& kin, OdeState2 state) {
    // Drift evaluated on the invariant region: transient integrator stages may
    // step slightly below zero substrate.
    const double s = state.substrate > 0.0 ? state.substrate : 0.0;
    const double growth = kin.mu(s);
    return {(growth - params.dilution) * state.population,
            params.dilution * (params.substrate_in - s) -
                params.consumption_coeff() * growth * state.population};
}

OdeState2 euler_ode_step(const ChemostatParams& params, const Kinetics& kin, OdeState2 state,
                         double dt, double s_cap) {
    const OdeState2 f = chemostat_rhs(params, kin, state);
    OdeState2 next{state.population + dt * f.population, state.substrate + dt * f.substrate};
    next.substrate = clamp(next.substrate, 0.0, s_cap);
    return next;
}

namespace {

OdeState2 rk4_ode_step(const ChemostatParams& params, const Kinetics& kin, OdeState2 y, double dt,
                       double s_cap) {
    const OdeState2 k1 = chemostat_rhs(params, kin, y);
    const OdeState2 k2 = chemostat_rhs(
        params, kin, {y.population + 0.5 * dt * k1.population, y.substrate + 0.5 * dt * k1.substrate});
    const OdeState2 k3 = chemostat_rhs(
        params, kin, {y.population + 0.5 * dt * k2.population, y.substrate + 0.5 * dt * k2.substrate});
    const OdeState2 k4 =
        chemostat_rhs(params, kin, {y.population + dt * k3.population, y.substrate + dt * k3.substrate});
    OdeState2 next{
        y.population + dt / 6.0 * (k1.population + 2.0 * k2.population + 2.0 * k3.population + k4.population),
        y.substrate + dt / 6.0 * (k1.substrate + 2.0 * k2.substrate + 2.0 * k3.substrate + k4.substrate)};
    next.substrate = clamp(next.substrate, 0.0, s_cap);
    return next;
}

}  // namespace

OdePath integrate_chemostat_ode(const ChemostatParams& params, const Kinetics& kin, OdeState2 init,
                                double horizon, double dt, OdeScheme scheme) {
    params.validate();
    if (!(init.population >= 0.0)) throw std::invalid_argument("initial population must be nonnegative");
    if (!(init.substrate >= 0.0)) throw std::invalid_argument("initial substrate must be nonnegative");
    const std::int64_t n = uniform_grid_steps(horizon, dt);
    const double h = horizon / static_cast<double>(n);
    const double s_cap = params.substrate_cap(init.substrate);

    std::vector<OdeState2> states;
    states.reserve(static_cast<std::size_t>(n) + 1);
    states.push_back(init);
    OdeState2 y = init;
    for (std::int64_t i = 0; i < n; ++i) {
        y = scheme == OdeScheme::rk4 ? rk4_ode_step(params, kin, y, h, s_cap)
                                     : euler_ode_step(params, kin, y, h, s_cap);
        states.push_back(y);
    }
    return OdePath(h, std::move(states));
}

Mat2 fluctuation_drift(const ChemostatParams& params, const Kinetics& kin, OdeState2 state) {
    const double growth = kin.mu(state.substrate);
    const double slope = kin.mu_prime(state.substrate);
    const double coeff = params.consumption_coeff();
    return {growth - params.dilution, slope * state.population, -coeff * growth,
            -params.dilution - coeff * slope * state.population};
}

Vec2 fluctuation_noise(const ChemostatParams& params, const Kinetics& kin, OdeState2 state) {
    const double growth = kin.mu(state.substrate);
    const double v = (growth + params.dilution) * state.population;
    return {std::sqrt(v > 0.0 ? v : 0.0), 0.0};
}

namespace {

struct MomentState {
    Vec2 m;
    Sym2 sig;
};

MomentState moment_rhs(Mat2 a, Vec2 c, const MomentState& y) {
    return {a * y.m, lyapunov_flow(a, y.sig) + outer(c)};
}

MomentState axpy(const MomentState& y, double h, const MomentState& k) {
    return {{y.m.x + h * k.m.x, y.m.y + h * k.m.y},
            {y.sig.xx + h * k.sig.xx, y.sig.xy + h * k.sig.xy, y.sig.yy + h * k.sig.yy}};
}

}  // namespace

GaussianLaw2 integrate_moment_odes(const std::function<Mat2(double)>& drift,
                                   const std::function<Vec2(double)>& noise, GaussianLaw2 init,
                                   double horizon, double dt) {
    const std::int64_t n = uniform_grid_steps(horizon, dt);
    const double h = horizon / static_cast<double>(n);
    MomentState y{init.mean, init.cov};
    for (std::int64_t i = 0; i < n; ++i) {
        const double t = h * static_cast<double>(i);
        const Mat2 a0 = drift(t), am = drift(t + 0.5 * h), a1 = drift(t + h);
        const Vec2 c0 = noise(t), cm = noise(t + 0.5 * h), c1 = noise(t + h);
        const MomentState k1 = moment_rhs(a0, c0, y);
        const MomentState k2 = moment_rhs(am, cm, axpy(y, 0.5 * h, k1));
        const MomentState k3 = moment_rhs(am, cm, axpy(y, 0.5 * h, k2));
        const MomentState k4 = moment_rhs(a1, c1, axpy(y, h, k3));
        y = {{y.m.x + h / 6.0 * (k1.m.x + 2.0 * k2.m.x + 2.0 * k3.m.x + k4.m.x),
              y.m.y + h / 6.0 * (k1.m.y + 2.0 * k2.m.y + 2.0 * k3.m.y + k4.m.y)},
             {y.sig.xx + h / 6.0 * (k1.sig.xx + 2.0 * k2.sig.xx + 2.0 * k3.sig.xx + k4.sig.xx),
              y.sig.xy + h / 6.0 * (k1.sig.xy + 2.0 * k2.sig.xy + 2.0 * k3.sig.xy + k4.sig.xy),
              y.sig.yy + h / 6.0 * (k1.sig.yy + 2.0 * k2.sig.yy + 2.0 * k3.sig.yy + k4.sig.yy)}};
    }
    return {y.m, y.sig};
}

GaussianLaw2 integrate_fluctuation_moments(const ChemostatParams& params, const Kinetics& kin,
                                           const OdePath& path, GaussianLaw2 init, double horizon,
                                           double dt) {
    if (path.horizon() < horizon - 1e-9)
        throw std::invalid_argument("ode path does not cover the moment integration horizon");
    const auto drift = [&](double t) { return fluctuation_drift(params, kin, path.state_at(t)); };
    const auto noise = [&](double t) { return fluctuation_noise(params, kin, path.state_at(t)); };
    return integrate_moment_odes(drift, noise, init, horizon, dt);
}

LyapunovResult lyapunov_stationary_cov(Mat2 drift, Vec2 noise) {
    const Sym2 rhs = outer(noise);
    if (rhs.xx == 0.0 && rhs.xy == 0.0 && rhs.yy == 0.0) return {{0.0, 0.0, 0.0}, true};
    if (!drift.is_hurwitz())
        throw std::runtime_error("stationary covariance requires a Hurwitz drift matrix");

    const auto u = solve3({{{2.0 * drift.a11, 2.0 * drift.a12, 0.0},
                            {drift.a21, drift.a11 + drift.a22, drift.a12},
                            {0.0, 2.0 * drift.a21, 2.0 * drift.a22}}},
                          {-rhs.xx, -rhs.xy, -rhs.yy});
    const Sym2 sig{u[0], u[1], u[2]};

    const Sym2 res = lyapunov_flow(drift, sig) + rhs;
    const double rnorm = std::abs(res.xx) + std::abs(res.xy) + std::abs(res.yy);
    const double scale = std::abs(rhs.xx) + std::abs(rhs.xy) + std::abs(rhs.yy);
    if (rnorm > 1e-10 * scale) throw std::runtime_error("stationary covariance solve lost precision");
    return {sig, false};
}

}  // namespace chemostat

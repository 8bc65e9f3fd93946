#include "chemostat/sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace chemostat {

namespace {

// Frame k is recorded at the nearest step index; frame times are step times.
std::vector<std::int64_t> frame_steps(std::int64_t n_steps, std::size_t frames) {
    std::vector<std::int64_t> idx(frames);
    for (std::size_t k = 0; k < frames; ++k)
        idx[k] = static_cast<std::int64_t>(std::llround(
            static_cast<double>(n_steps) * static_cast<double>(k) / static_cast<double>(frames - 1)));
    return idx;
}

double relax_substrate(const ChemostatParams& p, double s0, double dt) {
    return p.substrate_in + (s0 - p.substrate_in) * std::exp(-p.dilution * dt);
}

}  // namespace

void SdeOptions::validate() const {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (frames < 2) throw std::invalid_argument("need at least two frames");
    if (!(noise_scale >= 0.0)) throw std::invalid_argument("noise_scale must be nonnegative");
}

Trajectory integrate_cyeds(const ChemostatParams& params, const Kinetics& kin, SdeState4 init,
                           const SdeOptions& options, RngStream& rng) {
    params.validate();
    options.validate();
    if (!(init.population >= 0.0) || !(init.substrate >= 0.0))
        throw std::invalid_argument("deterministic pair must start nonnegative");

    const std::int64_t n_steps = uniform_grid_steps(options.horizon, options.dt);
    const double h = options.horizon / static_cast<double>(n_steps);
    const double sqrt_h = std::sqrt(h);
    const double s_cap = params.substrate_cap(init.substrate);
    const double coeff = params.consumption_coeff();  // k m / V
    const double d = params.dilution;

    Trajectory traj;
    traj.model = "sde_cyeds";
    traj.frames.reserve(options.frames);
    const auto fsteps = frame_steps(n_steps, options.frames);
    std::size_t next_frame = 0;

    SdeState4 y = init;
    const auto record = [&](std::int64_t i) {
        while (next_frame < options.frames && fsteps[next_frame] == i) {
            traj.frames.push_back({h * static_cast<double>(i), y.population, y.substrate, y.q, y.r});
            ++next_frame;
        }
    };
    record(0);
    for (std::int64_t i = 0; i < n_steps; ++i) {
        const double growth = kin.mu(y.substrate);
        const double slope = kin.mu_prime(y.substrate);
        const double diff = (growth + d) * y.population;
        const double dw = options.noise_scale * sqrt_h * rng.normal();

        const double q_next =
            y.q + h * ((growth - d) * y.q + slope * y.population * y.r) +
            std::sqrt(diff > 0.0 ? diff : 0.0) * dw;
        const double r_next =
            y.r - h * (d * y.r + coeff * (growth * y.q + slope * y.population * y.r));
        const OdeState2 det =
            euler_ode_step(params, kin, {y.population, y.substrate}, h, s_cap);
        y = {det.population, det.substrate, q_next, r_next};
        record(i + 1);
    }
    return traj;
}

Trajectory integrate_hat(const ChemostatParams& params, const Kinetics& kin, const OdePath& path,
                         HatState init, const SdeOptions& options, RngStream& rng) {
    params.validate();
    options.validate();
    if (path.horizon() < options.horizon - 1e-9)
        throw std::invalid_argument("ode path does not cover the diffusion horizon");

    const std::int64_t n_steps = uniform_grid_steps(options.horizon, options.dt);
    const double h = options.horizon / static_cast<double>(n_steps);
    const double sqrt_h = std::sqrt(h);
    const double s_cap = params.substrate_cap(std::max(init.substrate, path.state_at(0.0).substrate));
    const double n = params.scale;
    const double coeff_m = params.consumption_coeff_scaled();  // k m / (n V)
    const double d = params.dilution;

    Trajectory traj;
    traj.model = "sde_hat";
    traj.frames.reserve(options.frames);
    const auto fsteps = frame_steps(n_steps, options.frames);
    std::size_t next_frame = 0;

    double pop = init.population, sub = init.substrate;
    const auto record = [&](std::int64_t i) {
        while (next_frame < options.frames && fsteps[next_frame] == i) {
            traj.frames.push_back({h * static_cast<double>(i), pop, sub, std::nan(""), std::nan("")});
            ++next_frame;
        }
    };
    record(0);
    for (std::int64_t i = 0; i < n_steps; ++i) {
        const double t = h * static_cast<double>(i);
        const OdeState2 ref = path.state_at(t);
        const double growth = kin.mu(ref.substrate);
        const double slope = kin.mu_prime(ref.substrate);
        const double count_ref = n * ref.population;  // n N_t
        const double diff = (growth + d) * count_ref;
        const double dw = options.noise_scale * sqrt_h * rng.normal();

        const double dev = sub - ref.substrate;
        const double pop_next = pop + h * ((growth - d) * pop + slope * dev * count_ref) +
                                std::sqrt(diff > 0.0 ? diff : 0.0) * dw;
        double sub_next = sub + h * (d * (params.substrate_in - sub) - coeff_m * growth * pop -
                                     coeff_m * slope * dev * count_ref);
        sub_next = std::clamp(sub_next, 0.0, s_cap);
        pop = pop_next;
        sub = sub_next;
        record(i + 1);
    }
    return traj;
}

Trajectory integrate_feller(const ChemostatParams& params, const Kinetics& kin, FellerState init,
                            const SdeOptions& options, RngStream& rng) {
    params.validate();
    options.validate();
    if (!(init.population >= 0.0) || !(init.substrate >= 0.0))
        throw std::invalid_argument("initial state must be nonnegative");

    const std::int64_t n_steps = uniform_grid_steps(options.horizon, options.dt);
    const double h = options.horizon / static_cast<double>(n_steps);
    const double sqrt_h = std::sqrt(h);
    const double s_cap = params.substrate_cap(init.substrate);
    const double coeff_m = params.consumption_coeff_scaled();  // k m / (n V)
    const double d = params.dilution;

    Trajectory traj;
    traj.model = "sde_feller";
    traj.frames.reserve(options.frames);
    const auto fsteps = frame_steps(n_steps, options.frames);
    std::size_t next_frame = 0;

    double pop = init.population, sub = init.substrate;
    const auto record = [&](std::int64_t i) {
        while (next_frame < options.frames && fsteps[next_frame] == i) {
            traj.frames.push_back({h * static_cast<double>(i), pop, sub, std::nan(""), std::nan("")});
            ++next_frame;
        }
    };
    record(0);
    for (std::int64_t i = 0; i < n_steps; ++i) {
        if (pop <= 0.0 && !traj.extinct) {
            // Absorbed exactly at a step boundary (possible when starting at 0).
            traj.extinct = true;
            traj.extinction_time = h * static_cast<double>(i);
        }
        if (traj.extinct) {
            // Remaining frames: the substrate relaxes exactly, the population stays 0.
            const double t_ext = h * static_cast<double>(i);
            const double s_ext = sub;
            while (next_frame < options.frames) {
                const double ft = h * static_cast<double>(fsteps[next_frame]);
                traj.frames.push_back(
                    {ft, 0.0, relax_substrate(params, s_ext, ft - t_ext), std::nan(""), std::nan("")});
                ++next_frame;
            }
            return traj;
        }
        const double growth = kin.mu(sub);
        const double diff = (growth + d) * pop;
        const double dw = options.noise_scale * sqrt_h * rng.normal();
        const double pop_next = pop + h * (growth - d) * pop + std::sqrt(diff) * dw;
        double sub_next = sub + h * (d * (params.substrate_in - sub) - coeff_m * growth * pop);
        sub_next = std::clamp(sub_next, 0.0, s_cap);
        if (pop_next <= 0.0) {
            pop = 0.0;
            sub = sub_next;
            traj.extinct = true;
            traj.extinction_time = h * static_cast<double>(i + 1);
        } else {
            pop = pop_next;
            sub = sub_next;
        }
        record(i + 1);
    }
    return traj;
}

}  // namespace chemostat

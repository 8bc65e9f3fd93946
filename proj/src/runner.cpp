#include "chemostat/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>

#include "chemostat/exact_sim.hpp"
#include "chemostat/fluctuations.hpp"
#include "chemostat/format.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/sde.hpp"
#include "chemostat/stationary.hpp"

namespace chemostat {
namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Replicate i is computed by make(i) on its own stream, so the result is a
// pure function of (config, seed) whatever the worker count or schedule.
std::vector<Trajectory> run_ensemble(std::size_t reps, unsigned threads_requested,
                                     const std::function<Trajectory(std::size_t)>& make) {
    unsigned threads =
        threads_requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads_requested;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));
    std::vector<Trajectory> out(reps);
    if (threads <= 1) {
        for (std::size_t i = 0; i < reps; ++i) out[i] = make(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex error_mutex;
    std::exception_ptr error;
    const auto worker = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= reps) return;
            try {
                out[i] = make(i);
            } catch (...) {
                {
                    const std::lock_guard<std::mutex> guard(error_mutex);
                    if (!error) error = std::current_exception();
                }
                stop.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

// ---------------------------------------------------------------------------
// json helpers

ordered_json vec2_json(const Vec2& v) { return ordered_json::array({v.x, v.y}); }

ordered_json cov_json(const Sym2& s) {
    return ordered_json::array(
        {ordered_json::array({s.xx, s.xy}), ordered_json::array({s.xy, s.yy})});
}

double zscore(double diff, double se) {
    return se > 0.0 ? diff / se : std::numeric_limits<double>::quiet_NaN();
}

std::optional<LimitLaw> try_limit_law(const ChemostatParams& params, const Kinetics& kin) {
    for (const auto& eq : find_equilibria(params, kin)) {
        if (eq.kind != EquilibriumKind::stable_interior || eq.degenerate) continue;
        try {
            return limit_law(params, kin, eq);
        } catch (const std::exception&) {
            continue;
        }
    }
    return std::nullopt;
}

ordered_json limit_law_json(const LimitLaw& law, double scale) {
    ordered_json j;
    j["population"] = law.equilibrium.population;  // deterministic-limit scale
    j["substrate"] = law.equilibrium.substrate;
    j["alpha"] = law.alpha;
    j["beta"] = law.beta;
    j["cross"] = law.cross;
    j["correlation"] = law.correlation();
    j["decay_rate"] = law.decay_rate;
    const GaussianLaw2 count = discrete_gaussian_approx(law, scale);
    j["count_scale"] = scale;
    j["count_law"] = {{"mean", vec2_json(count.mean)}, {"cov", cov_json(count.cov)}};
    return j;
}

ordered_json ensemble_json(const EnsembleSummary& s) {
    ordered_json j;
    j["replicates"] = s.replicates;
    j["times"] = s.times;
    j["mean_population"] = s.mean_pop;
    j["var_population"] = s.var_pop;
    j["mean_substrate"] = s.mean_sub;
    j["var_substrate"] = s.var_sub;
    j["cov_population_substrate"] = s.cov_ps;
    j["survival"] = s.survival;
    j["extinct"] = s.extinction_times.size();
    j["extinction_times"] = s.extinction_times;
    return j;
}

ordered_json qsd_json(const QsdReport& rep) {
    ordered_json j;
    j["replicates"] = rep.replicates;
    j["survivors"] = rep.survivors;
    j["mean"] = vec2_json(rep.mean);
    j["cov"] = cov_json(rep.cov);
    j["correlation"] = rep.correlation;
    j["mean_drift"] = ordered_json::array({rep.mean_drift_pop, rep.mean_drift_sub});
    j["degenerate"] = rep.degenerate;
    j["compared"] = rep.compared;
    if (rep.compared) {
        j["z_mean"] = ordered_json::array({rep.z_mean_pop, rep.z_mean_sub});
        j["z_var"] = ordered_json::array({rep.z_var_pop, rep.z_var_sub});
        j["corr_diff"] = rep.corr_diff;
        j["deviates"] = rep.deviates;
    }
    return j;
}

ordered_json ellipse_json(const Ellipse& e) {
    ordered_json j;
    j["center"] = vec2_json(e.center);
    j["semi_major"] = e.semi_major;
    j["semi_minor"] = e.semi_minor;
    j["angle_rad"] = e.angle;
    j["degenerate"] = e.degenerate;
    return j;
}

ordered_json survival_json(const SurvivalReport& rep) {
    ordered_json j;
    j["replicates"] = rep.replicates;
    j["extinct"] = rep.extinct;
    j["times"] = rep.times;
    j["survival"] = rep.survival;
    j["fitted"] = rep.fitted;
    j["decay_rate"] = rep.decay_rate;
    j["log_intercept"] = rep.log_intercept;
    j["r_squared"] = rep.r_squared;
    j["window"] = ordered_json::array({rep.window_begin, rep.window_end});
    return j;
}

ordered_json qv_json(const QvReport& rep) {
    ordered_json j;
    j["function"] = rep.function;
    j["replicates"] = rep.replicates;
    j["times"] = rep.times;
    j["observed"] = rep.observed;
    j["observed_se"] = rep.observed_se;
    j["predicted"] = rep.predicted;
    j["predicted_division"] = rep.predicted_division;
    j["predicted_death"] = rep.predicted_death;
    j["ratio"] = rep.ratio;
    return j;
}

// ---------------------------------------------------------------------------
// fluctuation analysis

struct Moments2 {
    Vec2 mean;
    Sym2 cov;  // sample covariance, divisor reps - 1
};

Moments2 sample_moments(const std::vector<Vec2>& pts) {
    Moments2 m;
    const double n = static_cast<double>(pts.size());
    for (const auto& p : pts) {
        m.mean.x += p.x;
        m.mean.y += p.y;
    }
    m.mean.x /= n;
    m.mean.y /= n;
    if (pts.size() < 2) return m;
    for (const auto& p : pts) {
        const double dx = p.x - m.mean.x, dy = p.y - m.mean.y;
        m.cov.xx += dx * dx;
        m.cov.xy += dx * dy;
        m.cov.yy += dy * dy;
    }
    m.cov.xx /= n - 1.0;
    m.cov.xy /= n - 1.0;
    m.cov.yy /= n - 1.0;
    return m;
}

// Standard error of each sample-covariance component by resampling replicates
// with replacement.
Sym2 bootstrap_cov_se(const std::vector<Vec2>& pts, std::size_t rounds, RngStream& rng) {
    const std::size_t n = pts.size();
    std::vector<Vec2> draw(n);
    double sx = 0, sxx = 0, sy = 0, syy = 0, sc = 0, scc = 0;
    for (std::size_t b = 0; b < rounds; ++b) {
        for (std::size_t i = 0; i < n; ++i)
            draw[i] = pts[static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n)) % n];
        const Sym2 cov = sample_moments(draw).cov;
        sx += cov.xx;
        sxx += cov.xx * cov.xx;
        sy += cov.yy;
        syy += cov.yy * cov.yy;
        sc += cov.xy;
        scc += cov.xy * cov.xy;
    }
    const double r = static_cast<double>(rounds);
    const auto sd = [r](double s1, double s2) {
        const double v = (s2 - s1 * s1 / r) / (r - 1.0);
        return std::sqrt(std::max(v, 0.0));
    };
    return {sd(sx, sxx), sd(sc, scc), sd(sy, syy)};
}

ordered_json fluctuations_json(const RunConfig& cfg, const Kinetics& kin,
                               std::span<const Trajectory> trajs,
                               const std::optional<LimitLaw>& law) {
    const double scale = cfg.params.scale;
    const OdeState2 ode_init{cfg.init.population / scale, cfg.init.substrate};

    std::vector<Vec2> terminal;
    terminal.reserve(trajs.size());
    GaussianLaw2 moment0;
    moment0.mean = {cfg.init.q, cfg.init.r};
    OdeScheme scheme = OdeScheme::rk4;
    if (cfg.scenario == Scenario::sde_cyeds) {
        // The diffusion carries its own fluctuation pair; its deterministic
        // pair is the Euler flow, so predict moments along the same flow.
        scheme = OdeScheme::euler;
        for (const auto& t : trajs) terminal.push_back({t.frames.back().q, t.frames.back().r});
    }
    const OdePath path =
        integrate_chemostat_ode(cfg.params, kin, ode_init, cfg.horizon, cfg.dt, scheme);
    if (cfg.scenario != Scenario::sde_cyeds) {
        const auto fl = fluctuation_paths(trajs, path, scale);
        for (const auto& rep : fl.paths) terminal.push_back(rep.back());
    }
    const GaussianLaw2 predicted =
        integrate_fluctuation_moments(cfg.params, kin, path, moment0, cfg.horizon, cfg.dt);

    const Moments2 emp = sample_moments(terminal);
    const double reps = static_cast<double>(terminal.size());
    RngStream boot_rng(cfg.seed, cfg.replicates);  // disjoint from replicate streams
    const Sym2 boot = bootstrap_cov_se(terminal, 200, boot_rng);

    ordered_json j;
    j["count_scale"] = scale;
    j["replicates"] = terminal.size();
    j["terminal"] = {{"time", cfg.horizon},
                     {"mean", vec2_json(emp.mean)},
                     {"cov", cov_json(emp.cov)}};
    j["bootstrap_se"] = {{"var_q", boot.xx}, {"cov_qr", boot.xy}, {"var_r", boot.yy}};
    j["moment_ode"] = {{"mean", vec2_json(predicted.mean)}, {"cov", cov_json(predicted.cov)}};

    const double se_pair = reps > 1.0 ? std::sqrt(2.0 / (reps - 1.0)) : 0.0;
    j["z_mean"] = ordered_json::array(
        {zscore(emp.mean.x - predicted.mean.x, std::sqrt(emp.cov.xx / reps)),
         zscore(emp.mean.y - predicted.mean.y, std::sqrt(emp.cov.yy / reps))});
    j["z_var"] = ordered_json::array(
        {zscore(emp.cov.xx - predicted.cov.xx, emp.cov.xx * se_pair),
         zscore(emp.cov.yy - predicted.cov.yy, emp.cov.yy * se_pair)});
    j["z_cov"] = zscore(
        emp.cov.xy - predicted.cov.xy,
        reps > 1.0 ? std::sqrt((emp.cov.xx * emp.cov.yy + emp.cov.xy * emp.cov.xy) / (reps - 1.0))
                   : 0.0);

    if (law) {
        ordered_json st;
        st["var_q"] = law->alpha;
        st["cov_qr"] = law->cross;
        st["var_r"] = law->beta;
        st["z"] = ordered_json::array({zscore(emp.cov.xx - law->alpha, boot.xx),
                                       zscore(emp.cov.xy - law->cross, boot.xy),
                                       zscore(emp.cov.yy - law->beta, boot.yy)});
        j["stationary"] = std::move(st);
    }
    return j;
}

// ---------------------------------------------------------------------------
// scenario execution

ordered_json summary_header(const RunConfig& cfg, std::size_t reps) {
    ordered_json j;
    j["schema"] = "chemostat-summary v1";
    j["scenario"] = scenario_name(cfg.scenario);
    j["seed"] = cfg.seed;
    j["replicates"] = reps;
    j["horizon"] = cfg.horizon;
    j["frames"] = cfg.frames;
    j["volume"] = cfg.params.volume;
    j["count_scale"] = cfg.params.scale;
    j["units"] = {{"time", "h"},     {"population", "count"}, {"substrate", "g/L"},
                  {"volume", "L"},   {"mass", "g"},           {"rate", "1/h"},
                  {"wall", "s"}};
    return j;
}

RunBundle run_single(const RunConfig& cfg) {
    const Kinetics kin = cfg.kinetics.build();
    const double scale = cfg.params.scale;
    const std::size_t reps = cfg.scenario == Scenario::ode ? 1 : cfg.replicates;

    SimOptions sim_opt;
    sim_opt.horizon = cfg.horizon;
    sim_opt.macro_step = cfg.macro_step;
    sim_opt.frames = cfg.frames;
    SdeOptions sde_opt;
    sde_opt.horizon = cfg.horizon;
    sde_opt.dt = cfg.dt;
    sde_opt.frames = cfg.frames;

    std::uint64_t steps_per_rep = 0;
    OdePath hat_path;  // referenced by the sde_hat lambda
    MassKinetics mk;   // referenced by the ibm lambda
    std::function<Trajectory(std::size_t)> make;

    switch (cfg.scenario) {
        case Scenario::ode: {
            steps_per_rep = static_cast<std::uint64_t>(std::llround(cfg.horizon / cfg.dt));
            make = [&cfg, &kin, scale](std::size_t) {
                const OdePath path = integrate_chemostat_ode(
                    cfg.params, kin, {cfg.init.population / scale, cfg.init.substrate},
                    cfg.horizon, cfg.dt, OdeScheme::rk4);
                Trajectory t;
                t.model = "ode";
                for (std::size_t k = 0; k < cfg.frames; ++k) {
                    const double tk = cfg.horizon * static_cast<double>(k) /
                                      static_cast<double>(cfg.frames - 1);
                    const OdeState2 s = path.state_at(tk);
                    t.frames.push_back({tk, scale * s.population, s.substrate, std::nan(""),
                                        std::nan("")});
                }
                return t;
            };
            break;
        }
        case Scenario::crump_young: {
            const CrumpYoungState init{std::llround(cfg.init.population), cfg.init.substrate};
            make = [&cfg, &kin, init, sim_opt](std::size_t rep) {
                RngStream rng(cfg.seed, rep);
                return simulate_crump_young(cfg.params, kin, init, sim_opt, rng);
            };
            break;
        }
        case Scenario::ibm: {
            mk = cfg.mass_kinetics.build(kin, cfg.params,
                                         cfg.params.substrate_cap(cfg.init.substrate));
            make = [&cfg, &mk, sim_opt](std::size_t rep) {
                PopulationState init;
                init.substrate = cfg.init.substrate;
                init.masses.assign(static_cast<std::size_t>(cfg.init.population),
                                   cfg.params.cell_mass);
                RngStream rng(cfg.seed, rep);
                if (cfg.analysis.qv) {
                    MartingaleObserver obs({TestFunction::constant(), TestFunction::identity()},
                                           mk, cfg.params, cfg.frames);
                    return simulate_ibm(cfg.params, mk, std::move(init), sim_opt, rng, &obs);
                }
                return simulate_ibm(cfg.params, mk, std::move(init), sim_opt, rng, nullptr);
            };
            break;
        }
        case Scenario::sde_cyeds: {
            const SdeState4 init{cfg.init.population / scale, cfg.init.substrate, cfg.init.q,
                                 cfg.init.r};
            steps_per_rep = static_cast<std::uint64_t>(std::llround(cfg.horizon / cfg.dt));
            make = [&cfg, &kin, init, sde_opt](std::size_t rep) {
                RngStream rng(cfg.seed, rep);
                return integrate_cyeds(cfg.params, kin, init, sde_opt, rng);
            };
            break;
        }
        case Scenario::sde_hat: {
            hat_path = integrate_chemostat_ode(
                cfg.params, kin, {cfg.init.population / scale, cfg.init.substrate}, cfg.horizon,
                cfg.dt, OdeScheme::rk4);
            const HatState init{cfg.init.population, cfg.init.substrate};
            steps_per_rep = static_cast<std::uint64_t>(std::llround(cfg.horizon / cfg.dt));
            make = [&cfg, &kin, &hat_path, init, sde_opt](std::size_t rep) {
                RngStream rng(cfg.seed, rep);
                return integrate_hat(cfg.params, kin, hat_path, init, sde_opt, rng);
            };
            break;
        }
        case Scenario::sde_feller: {
            const FellerState init{cfg.init.population, cfg.init.substrate};
            steps_per_rep = static_cast<std::uint64_t>(std::llround(cfg.horizon / cfg.dt));
            make = [&cfg, &kin, init, sde_opt](std::size_t rep) {
                RngStream rng(cfg.seed, rep);
                return integrate_feller(cfg.params, kin, init, sde_opt, rng);
            };
            break;
        }
        case Scenario::compare:
            throw std::logic_error("compare is handled by run_compare");
    }

    const auto t0 = Clock::now();
    RunBundle bundle;
    bundle.trajectories = run_ensemble(reps, cfg.threads, make);
    const double wall = seconds_since(t0);

    std::uint64_t events = 0;
    for (const auto& t : bundle.trajectories) events += t.event_count();
    TimingEntry entry;
    entry.label = scenario_name(cfg.scenario);
    entry.model = scenario_name(cfg.scenario);
    entry.volume = cfg.params.volume;
    entry.population = cfg.init.population;
    entry.replicates = reps;
    entry.events = events;
    entry.steps = steps_per_rep * reps;
    entry.wall_seconds = wall;
    bundle.timing.entries.push_back(std::move(entry));
    bundle.timing.finalize();

    bundle.summary = summary_header(cfg, reps);
    const std::optional<LimitLaw> law = try_limit_law(cfg.params, kin);
    if (law) bundle.summary["limit_law"] = limit_law_json(*law, scale);
    bundle.summary["ensemble"] = ensemble_json(summarize_ensemble(bundle.trajectories, cfg.seed));

    std::optional<QsdReport> qsd;
    if (cfg.analysis.qsd) {
        std::optional<GaussianLaw2> ref;
        if (law) ref = discrete_gaussian_approx(*law, scale);
        try {
            qsd = estimate_qsd(bundle.trajectories, ref ? &*ref : nullptr);
            bundle.summary["qsd"] = qsd_json(*qsd);
        } catch (const std::runtime_error& e) {
            bundle.summary["qsd"] = ordered_json{{"error", e.what()}};
        }
    }
    if (cfg.analysis.fluctuations)
        bundle.summary["fluctuations"] = fluctuations_json(cfg, kin, bundle.trajectories, law);
    if (cfg.analysis.qv) {
        ordered_json blocks = ordered_json::array();
        for (const char* name : {"one", "identity"})
            blocks.push_back(qv_json(qv_check(bundle.trajectories, name)));
        bundle.summary["qv"] = std::move(blocks);
    }
    if (cfg.analysis.extinction)
        bundle.summary["extinction"] = survival_json(extinction_stats(bundle.trajectories));
    if (cfg.analysis.ellipse) {
        ordered_json e;
        e["level"] = cfg.analysis.ellipse_level;
        if (law)
            e["theoretical"] = ellipse_json(confidence_ellipse(discrete_gaussian_approx(*law, scale),
                                                               cfg.analysis.ellipse_level));
        if (qsd && !qsd->degenerate) {
            GaussianLaw2 emp;
            emp.mean = qsd->mean;
            emp.cov = qsd->cov;
            e["empirical"] = ellipse_json(confidence_ellipse(emp, cfg.analysis.ellipse_level));
        }
        if (!e.contains("theoretical") && !e.contains("empirical"))
            e["error"] = "no stable interior law and no sample moments to draw from";
        bundle.summary["ellipse"] = std::move(e);
    }
    return bundle;
}

RunBundle run_compare(const RunConfig& cfg) {
    const Kinetics kin = cfg.kinetics.build();
    const std::size_t reps = cfg.replicates;

    SimOptions sim_opt;
    sim_opt.horizon = cfg.horizon;
    sim_opt.macro_step = cfg.macro_step;
    sim_opt.frames = cfg.frames;
    SdeOptions sde_opt;
    sde_opt.horizon = cfg.horizon;
    sde_opt.dt = cfg.dt;
    sde_opt.frames = cfg.frames;
    const auto steps_per_rep = static_cast<std::uint64_t>(std::llround(cfg.horizon / cfg.dt));

    RunBundle bundle;
    ordered_json sizes = ordered_json::array();
    // Timing loops are deliberately serial: wall times are only comparable
    // when each ensemble owns the machine.
    for (std::size_t i = 0; i < cfg.compare.volumes.size(); ++i) {
        ChemostatParams params = cfg.params;
        params.volume = cfg.compare.volumes[i];
        const double pop = cfg.compare.populations[i];
        const std::uint64_t base_stream = static_cast<std::uint64_t>(i) * 2 * reps;

        const CrumpYoungState jump_init{std::llround(pop), cfg.init.substrate};
        auto t0 = Clock::now();
        std::uint64_t events = 0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            RngStream rng(cfg.seed, base_stream + rep);
            events += simulate_crump_young(params, kin, jump_init, sim_opt, rng).event_count();
        }
        TimingEntry jump;
        jump.label = std::string("crump_young V=") + format_double(params.volume);
        jump.model = "crump_young";
        jump.volume = params.volume;
        jump.population = pop;
        jump.replicates = reps;
        jump.events = events;
        jump.wall_seconds = seconds_since(t0);
        bundle.timing.entries.push_back(std::move(jump));

        const SdeState4 sde_init{pop / params.scale, cfg.init.substrate, 0.0, 0.0};
        t0 = Clock::now();
        for (std::size_t rep = 0; rep < reps; ++rep) {
            RngStream rng(cfg.seed, base_stream + reps + rep);
            (void)integrate_cyeds(params, kin, sde_init, sde_opt, rng);
        }
        TimingEntry sde;
        sde.label = std::string("sde_cyeds V=") + format_double(params.volume);
        sde.model = "sde_cyeds";
        sde.volume = params.volume;
        sde.population = pop;
        sde.replicates = reps;
        sde.steps = steps_per_rep * reps;
        sde.wall_seconds = seconds_since(t0);
        bundle.timing.entries.push_back(std::move(sde));

        sizes.push_back({{"volume", params.volume}, {"population", pop}});
    }
    bundle.timing.finalize();
    bundle.summary = summary_header(cfg, reps);
    bundle.summary["sizes"] = std::move(sizes);
    return bundle;
}

}  // namespace

RunBundle run_scenario(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.scenario == Scenario::compare) return run_compare(cfg);
    return run_single(cfg);
}

void run_to_directory(const RunConfig& cfg, const std::string& out_dir) {
    RunBundle bundle = run_scenario(cfg);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_text_file((dir / "trajectories.csv").string(),
                    trajectory_csv(bundle.trajectories, cfg.trajectory_limit));
    write_text_file((dir / "summary.json").string(), bundle.summary.dump(2) + "\n");
    write_text_file((dir / "timing.json").string(), timing_json(bundle.timing));
}

}  // namespace chemostat

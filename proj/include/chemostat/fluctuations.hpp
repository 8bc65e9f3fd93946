#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chemostat/exact_sim.hpp"
#include "chemostat/interp.hpp"
#include "chemostat/kinetics.hpp"
#include "chemostat/linalg.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/trajectory.hpp"

namespace chemostat {

// C1 test function on the mass axis, used for martingale bookkeeping.
// Polynomials carry their coefficients so downstream integrals against the
// division kernel reduce to exact moment sums; sampled curves fall back to
// quadrature.
class TestFunction {
  public:
    static TestFunction constant(double c = 1.0);
    static TestFunction identity();
    // coeffs[j] multiplies x^j.
    static TestFunction polynomial(std::vector<double> coeffs, std::string name);
    static TestFunction sampled(std::vector<double> xs, std::vector<double> ys, std::string name);

    double value(double x) const;
    double deriv(double x) const;
    // nullptr for sampled curves.
    const std::vector<double>* coefficients() const { return poly_ ? &coeffs_ : nullptr; }
    const std::string& name() const { return name_; }

  private:
    bool poly_ = true;
    std::vector<double> coeffs_;
    MonotoneCubic curve_;
    std::string name_;
};

// Division bracket of f under a kernel Q, as a function of the parent mass x:
//   first(x)  = E_Q[ f(a x) + f((1-a) x) - f(x) ]
//   second(x) = E_Q[ (f(a x) + f((1-a) x) - f(x))^2 ]
// Polynomial f: both brackets are polynomials with exactly computed
// coefficients.  Sampled f: kernel quadrature per evaluation.
class DivisionBracket {
  public:
    DivisionBracket(TestFunction f, DivisionKernel kernel);
    double first(double x) const;
    double second(double x) const;
    const TestFunction& function() const { return f_; }

  private:
    TestFunction f_;
    DivisionKernel kernel_;
    bool poly_ = false;
    std::vector<double> b1_, b2_;
};

// Online accumulator of the compensated-martingale bookkeeping of an IBM run:
// for each test function, the normalized observable <nu_t, f>/n, the running
// generator integral, and the division/withdrawal parts of the predicted
// quadratic variation, snapshotted on the frame grid.
class MartingaleObserver final : public IbmObserver {
  public:
    MartingaleObserver(std::vector<TestFunction> functions, const MassKinetics& mk,
                       const ChemostatParams& params, std::size_t frames);

    void at_state(double t, const std::vector<double>& masses, double substrate) override;
    void at_event(double t, const std::vector<double>& masses, double substrate) override;
    void at_frame(std::size_t frame_index, double t) override;
    std::vector<QvFunctionRecord> take_records() override;

  private:
    struct Slot {
        DivisionBracket bracket;
        double value = 0.0;           // <nu, f>/n at the last knot
        double drift_acc = 0.0;
        double div_acc = 0.0;
        double death_acc = 0.0;
        double drift_rate = 0.0;      // integrand at the last knot
        double div_rate = 0.0;
        double death_rate = 0.0;
        QvFunctionRecord record;
    };

    void evaluate(const std::vector<double>& masses, double substrate);

    const MassKinetics* mk_;
    double scale_ = 1.0;
    double dilution_ = 0.0;
    std::vector<Slot> slots_;
    double last_t_ = 0.0;
    bool primed_ = false;
};

// Martingale-identity check: mean over the ensemble of n * (M̄_t(f))^2 against
// the mean predicted quadratic variation, on the frame grid.
struct QvReport {
    std::string function;
    std::size_t replicates = 0;
    std::vector<double> times;
    std::vector<double> observed;            // mean of squared scaled martingale
    std::vector<double> observed_se;         // standard error of that mean
    std::vector<double> predicted;           // mean compensator, division + withdrawal
    std::vector<double> predicted_division;  // division part alone
    std::vector<double> predicted_death;     // withdrawal part alone
    std::vector<double> ratio;               // observed / predicted; NaN when predicted ~ 0
};
QvReport qv_check(std::span<const Trajectory> ensemble, const std::string& function_name);

// Centred fluctuation paths of a count-model ensemble around a deterministic
// path: Q = (count - n N_t)/sqrt(n), R = sqrt(n) (S^n - S_t) at frame times.
struct FluctuationEnsemble {
    std::vector<double> times;
    std::vector<std::vector<Vec2>> paths;  // [replicate][frame] -> (Q, R)
};
FluctuationEnsemble fluctuation_paths(std::span<const Trajectory> ensemble, const OdePath& path,
                                      double n);

// Moments of the surviving population at the end of the run, with a
// stabilization diagnostic and an optional comparison against a reference
// Gaussian law.
struct QsdReport {
    std::size_t replicates = 0;
    std::size_t survivors = 0;
    Vec2 mean;  // (count, substrate)
    Sym2 cov;
    double correlation = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;  // a marginal variance vanished

    // Relative drift of survivor means between mid-horizon and horizon.
    double mean_drift_pop = std::numeric_limits<double>::quiet_NaN();
    double mean_drift_sub = std::numeric_limits<double>::quiet_NaN();

    bool compared = false;
    double z_mean_pop = std::numeric_limits<double>::quiet_NaN();
    double z_mean_sub = std::numeric_limits<double>::quiet_NaN();
    double z_var_pop = std::numeric_limits<double>::quiet_NaN();
    double z_var_sub = std::numeric_limits<double>::quiet_NaN();
    double corr_diff = std::numeric_limits<double>::quiet_NaN();
    bool deviates = false;  // significant departure from the reference law
};
QsdReport estimate_qsd(std::span<const Trajectory> ensemble,
                       const GaussianLaw2* reference = nullptr);

// Confidence region of a plane Gaussian at the given level.
struct Ellipse {
    Vec2 center;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double angle = 0.0;  // radians, major axis against the first coordinate
    double level = 0.0;
    bool degenerate = false;  // a zero eigenvalue collapses the region
};
Ellipse confidence_ellipse(const GaussianLaw2& law, double level);

// Empirical survival curve of an ensemble with an exponential tail fit of
// log-survival by least squares on [window_begin, window_end].
struct SurvivalReport {
    std::size_t replicates = 0;
    std::size_t extinct = 0;
    std::vector<double> times;
    std::vector<double> survival;
    bool fitted = false;
    double decay_rate = std::numeric_limits<double>::quiet_NaN();
    double log_intercept = std::numeric_limits<double>::quiet_NaN();
    double r_squared = std::numeric_limits<double>::quiet_NaN();
    double window_begin = std::numeric_limits<double>::quiet_NaN();
    double window_end = std::numeric_limits<double>::quiet_NaN();
};
struct SurvivalOptions {
    std::size_t grid_points = 101;
    // Tail window; NaN picks quantiles of the extinction times (0.5 and 0.99).
    double window_begin = std::numeric_limits<double>::quiet_NaN();
    double window_end = std::numeric_limits<double>::quiet_NaN();
};
SurvivalReport extinction_stats(std::span<const Trajectory> ensemble,
                                const SurvivalOptions& options = {});

// Per-frame ensemble moments of (population, substrate) over all replicates,
// with survival fractions and the extinction-time list.
struct EnsembleSummary {
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<double> mean_pop, var_pop, mean_sub, var_sub, cov_ps;
    std::vector<double> survival;
    std::vector<double> extinction_times;
};
EnsembleSummary summarize_ensemble(std::span<const Trajectory> ensemble, std::uint64_t seed);

}  // namespace chemostat

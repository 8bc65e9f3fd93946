#include "chemostat/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chemostat {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : xs_(std::move(x)), ys_(std::move(y)) {
    if (xs_.size() != ys_.size() || xs_.size() < 2)
        throw std::invalid_argument("interpolant needs matching samples, at least two");
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
        if (!(xs_[i] < xs_[i + 1]))
            throw std::invalid_argument("interpolant knots must increase strictly");
    for (double v : ys_)
        if (!std::isfinite(v)) throw std::invalid_argument("interpolant samples must be finite");

    const std::size_t n = xs_.size();
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = xs_[i + 1] - xs_[i];
        d[i] = (ys_[i + 1] - ys_[i]) / h[i];
    }
    ms_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0) {
            ms_[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            ms_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    const auto endpoint = [](double h0, double h1, double d0, double d1) {
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0) m = 0.0;
        else if (d0 * d1 <= 0.0 && std::abs(m) > 3.0 * std::abs(d0)) m = 3.0 * d0;
        return m;
    };
    if (n == 2) {
        ms_[0] = ms_[1] = d[0];
    } else {
        ms_[0] = endpoint(h[0], h[1], d[0], d[1]);
        ms_[n - 1] = endpoint(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    }
}

int MonotoneCubic::find_interval(double x) const {
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    int i = static_cast<int>(it - xs_.begin()) - 1;
    if (i < 0) i = 0;
    if (i >= static_cast<int>(xs_.size()) - 1) i = static_cast<int>(xs_.size()) - 2;
    return i;
}

double MonotoneCubic::value(double x) const {
    if (xs_.empty()) throw std::logic_error("empty interpolant");
    if (x <= xs_.front()) return ys_.front();
    if (x >= xs_.back()) return ys_.back();
    const int i = find_interval(x);
    const double h = xs_[i + 1] - xs_[i];
    const double t = (x - xs_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * ys_[i] + (t3 - 2.0 * t2 + t) * h * ms_[i] +
           (-2.0 * t3 + 3.0 * t2) * ys_[i + 1] + (t3 - t2) * h * ms_[i + 1];
}

double MonotoneCubic::deriv(double x) const {
    if (xs_.empty()) throw std::logic_error("empty interpolant");
    if (x <= xs_.front() || x >= xs_.back()) return 0.0;
    const int i = find_interval(x);
    const double h = xs_[i + 1] - xs_[i];
    const double t = (x - xs_[i]) / h;
    const double t2 = t * t;
    return ((6.0 * t2 - 6.0 * t) * ys_[i] + (3.0 * t2 - 4.0 * t + 1.0) * h * ms_[i] +
            (-6.0 * t2 + 6.0 * t) * ys_[i + 1] + (3.0 * t2 - 2.0 * t) * h * ms_[i + 1]) /
           h;
}

}  // namespace chemostat

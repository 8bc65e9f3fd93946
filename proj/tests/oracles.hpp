// Independent reference implementations used only by tests: quadrature,
// matrix exponentials, closed-form jump-process moments, and basic
// statistical machinery.  Kept deliberately separate from the library so the
// two sides of every comparison share no code.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "chemostat/linalg.hpp"

namespace oracles {

using chemostat::Mat2;
using chemostat::Sym2;
using chemostat::Vec2;

// exp(A) by scaling-and-squaring on a Taylor series.
inline Mat2 mat2_exp(Mat2 a) {
    const double norm = std::max(std::abs(a.a11) + std::abs(a.a12), std::abs(a.a21) + std::abs(a.a22));
    int squarings = 0;
    while (norm / std::pow(2.0, squarings) > 0.5) ++squarings;
    const double scale = std::pow(2.0, -squarings);
    const Mat2 b = scale * a;
    Mat2 term = Mat2::identity();
    Mat2 sum = term;
    for (int k = 1; k <= 20; ++k) {
        term = (1.0 / k) * (term * b);
        sum = sum + term;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

// integral over [0, horizon] of e^{A s} C C^T e^{A^T s} ds, composite Simpson.
inline Sym2 simpson_stationary_cov(Mat2 a, Vec2 c, double horizon, int panels) {
    if (panels % 2 != 0) throw std::invalid_argument("simpson needs an even panel count");
    const double h = horizon / panels;
    const auto integrand = [&](double s) {
        const Mat2 e = mat2_exp(s * a);
        const Vec2 ec = e * c;
        return chemostat::outer(ec);
    };
    Sym2 acc = integrand(0.0) + integrand(horizon);
    for (int i = 1; i < panels; ++i) {
        const double w = (i % 2 == 1) ? 4.0 : 2.0;
        acc = acc + w * integrand(h * i);
    }
    return (h / 3.0) * acc;
}

// Linear birth-death process with constant per-head rates (birth b, death d):
// mean and variance of the head count at time t from n0 individuals.
inline double bd_mean(double n0, double b, double d, double t) { return n0 * std::exp((b - d) * t); }
inline double bd_var(double n0, double b, double d, double t) {
    if (b == d) return 2.0 * b * t * n0;
    const double g = std::exp((b - d) * t);
    return n0 * (b + d) / (b - d) * g * (g - 1.0);
}

// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

// Asymptotic KS critical value at significance 0.01.
inline double ks_critical_01(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

// Two-sample KS statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i;
        else ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}
inline double ks_two_sample_critical_01(std::size_t n, std::size_t m) {
    return 1.628 * std::sqrt((static_cast<double>(n) + m) / (static_cast<double>(n) * m));
}

// Five-point central finite difference.
inline double fd_derivative(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h);
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;
    double se_mean = 0.0;
};
inline MeanVar mean_var(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double s = 0.0;
    for (double x : xs) s += x;
    const double m = s / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {m, var, std::sqrt(var / n)};
}

inline double covariance(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) acc += (xs[i] - mx) * (ys[i] - my);
    return acc / (n - 1.0);
}

}  // namespace oracles

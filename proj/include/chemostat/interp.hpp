#pragma once

#include <vector>

namespace chemostat {

// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes).  C1 on the knot
// span, monotone wherever the data are monotone, and never overshooting the
// sample range, so extrema over knots bound the curve.  Flat extension beyond
// both ends.
class MonotoneCubic {
  public:
    MonotoneCubic() = default;
    // x strictly increasing, at least two samples.
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double value(double x) const;
    double deriv(double x) const;

    const std::vector<double>& knots() const { return xs_; }
    const std::vector<double>& samples() const { return ys_; }
    bool empty() const { return xs_.empty(); }

  private:
    int find_interval(double x) const;
    std::vector<double> xs_, ys_, ms_;
};

}  // namespace chemostat

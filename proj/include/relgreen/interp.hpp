#pragma once

#include <vector>

namespace relgreen {

// Monotone cubic Hermite interpolant (Fritsch-Carlson slope limiting).
// Shape preserving: monotone data stays monotone and no interval
// overshoots its endpoint values, so squared-value expressions built on
// the interpolant cannot pick up spurious oscillation.  C^1 across knots.
class PchipCurve {
public:
    PchipCurve() = default;
    // x strictly increasing, sizes equal and >= 2.
    PchipCurve(std::vector<double> x, std::vector<double> y);

    double value(double x) const;       // clamped to the edge values outside
    double derivative(double x) const;  // 0 outside the table
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    const std::vector<double>& knots_x() const { return x_; }
    const std::vector<double>& knots_y() const { return y_; }

private:
    std::size_t interval(double x) const;
    std::vector<double> x_, y_, d_; // knots and limited knot slopes
};

} // namespace relgreen

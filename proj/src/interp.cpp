#include "relgreen/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relgreen {

PchipCurve::PchipCurve(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw std::invalid_argument("PchipCurve: need >= 2 samples with matching sizes");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(x_[i] < x_[i + 1]))
            throw std::invalid_argument("PchipCurve: abscissae must be strictly increasing");

    std::vector<double> hseg(n - 1), sec(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        hseg[i] = x_[i + 1] - x_[i];
        sec[i] = (y_[i + 1] - y_[i]) / hseg[i];
    }

    d_.assign(n, 0.0);
    // Interior slopes: weighted harmonic mean where the secants agree in
    // sign, zero at local extrema (the Fritsch-Carlson limiter).
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (sec[i - 1] == 0.0 || sec[i] == 0.0 || (sec[i - 1] > 0.0) != (sec[i] > 0.0)) {
            d_[i] = 0.0;
        } else {
            const double w1 = 2.0 * hseg[i] + hseg[i - 1];
            const double w2 = hseg[i] + 2.0 * hseg[i - 1];
            d_[i] = (w1 + w2) / (w1 / sec[i - 1] + w2 / sec[i]);
        }
    }
    // Endpoint slopes: one-sided three-point estimate, clamped so the end
    // interval stays shape preserving.
    auto end_slope = [](double h0, double h1, double s0, double s1) {
        double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (s0 == 0.0 || (d > 0.0) != (s0 > 0.0)) return 0.0;
        if ((s0 > 0.0) != (s1 > 0.0) && std::abs(d) > 3.0 * std::abs(s0)) d = 3.0 * s0;
        return d;
    };
    if (n == 2) {
        d_[0] = d_[1] = sec[0];
    } else {
        d_[0] = end_slope(hseg[0], hseg[1], sec[0], sec[1]);
        d_[n - 1] = end_slope(hseg[n - 2], hseg[n - 3], sec[n - 2], sec[n - 3]);
    }
}

std::size_t PchipCurve::interval(double x) const {
    // Index i with x_[i] <= x < x_[i+1], clamped to the table.
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    if (it == x_.begin()) return 0;
    std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    if (i + 1 >= x_.size()) i = x_.size() - 2;
    return i;
}

double PchipCurve::value(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double PchipCurve::derivative(double x) const {
    if (x <= x_.front() || x >= x_.back()) return 0.0;
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double dh00 = (6.0 * t2 - 6.0 * t) / h;
    const double dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    const double dh01 = (-6.0 * t2 + 6.0 * t) / h;
    const double dh11 = 3.0 * t2 - 2.0 * t;
    return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
}

} // namespace relgreen

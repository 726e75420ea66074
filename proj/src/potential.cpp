#include "relgreen/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relgreen {

Potential Potential::zero() {
    Potential v;
    v.kind_ = PotentialKind::zero;
    return v;
}

Potential Potential::constant(double v0) {
    Potential v;
    v.kind_ = PotentialKind::constant;
    v.params_["v0"] = v0;
    return v;
}

Potential Potential::square_well(double v0, double x_left, double x_right) {
    if (!(x_left < x_right))
        throw std::invalid_argument("Potential::square_well: needs x_left < x_right");
    Potential v;
    v.kind_ = PotentialKind::square_well;
    v.params_["v0"] = v0;
    v.params_["x_left"] = x_left;
    v.params_["x_right"] = x_right;
    v.breakpoints_ = {x_left, x_right};
    return v;
}

Potential Potential::tabulated(std::vector<double> x, std::vector<double> v) {
    Potential p;
    p.kind_ = PotentialKind::tabulated;
    p.table_ = PchipCurve(std::move(x), std::move(v));
    p.has_table_ = true;
    p.breakpoints_ = {p.table_.x_min(), p.table_.x_max()};
    return p;
}

double Potential::eval_raw(double x) const {
    switch (kind_) {
    case PotentialKind::zero:
        return 0.0;
    case PotentialKind::constant:
        return params_.at("v0");
    case PotentialKind::square_well: {
        const double l = params_.at("x_left"), r = params_.at("x_right");
        return (x >= l && x <= r) ? params_.at("v0") : 0.0;
    }
    case PotentialKind::tabulated:
        return table_.value(x);
    }
    return 0.0;
}

double Potential::operator()(double x) const {
    return eval_raw(mirrored_ ? std::abs(x) : x);
}

std::string Potential::kind_name() const {
    switch (kind_) {
    case PotentialKind::zero: return "zero";
    case PotentialKind::constant: return "constant";
    case PotentialKind::square_well: return "square-well";
    case PotentialKind::tabulated: return "tabulated";
    }
    return "?";
}

double Potential::asymptotic_left() const {
    if (mirrored_) return asymptotic_right();
    switch (kind_) {
    case PotentialKind::zero: return 0.0;
    case PotentialKind::constant: return params_.at("v0");
    case PotentialKind::square_well: return 0.0;
    case PotentialKind::tabulated: return table_.knots_y().front();
    }
    return 0.0;
}

double Potential::asymptotic_right() const {
    switch (kind_) {
    case PotentialKind::zero: return 0.0;
    case PotentialKind::constant: return params_.at("v0");
    case PotentialKind::square_well: return 0.0;
    case PotentialKind::tabulated: return table_.knots_y().back();
    }
    return 0.0;
}

Potential Potential::even_extension() const {
    if (mirrored_) return *this;
    for (double b : breakpoints_)
        if (b < 0.0)
            throw std::invalid_argument(
                "Potential::even_extension: all breakpoints must sit at x >= 0");
    Potential v = *this;
    v.mirrored_ = true;
    std::vector<double> bp;
    for (double b : breakpoints_) {
        bp.push_back(b);
        if (b > 0.0) bp.push_back(-b);
    }
    std::sort(bp.begin(), bp.end());
    v.breakpoints_ = std::move(bp);
    return v;
}

const std::vector<double>& Potential::table_x() const {
    static const std::vector<double> empty;
    return has_table_ ? table_.knots_x() : empty;
}

const std::vector<double>& Potential::table_v() const {
    static const std::vector<double> empty;
    return has_table_ ? table_.knots_y() : empty;
}

} // namespace relgreen

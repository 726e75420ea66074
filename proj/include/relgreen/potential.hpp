#pragma once

#include <map>
#include <string>
#include <vector>

#include "relgreen/interp.hpp"

namespace relgreen {

enum class PotentialKind { zero, constant, square_well, tabulated };

// Scalar potential V(x): a named analytic form or tabulated samples with
// monotone cubic interpolation.  Outside its breakpoints every kind
// continues with a constant value, which is what the resolvent
// construction relies on for exact decaying boundary data.
class Potential {
public:
    static Potential zero();
    static Potential constant(double v0);
    // v0 on [x_left, x_right], 0 outside; v0 < 0 is an attractive well.
    static Potential square_well(double v0, double x_left, double x_right);
    // Strictly increasing x samples; shape-preserving cubic through (x, v),
    // constant extension with the edge values outside [x.front, x.back].
    static Potential tabulated(std::vector<double> x, std::vector<double> v);

    double operator()(double x) const;

    PotentialKind kind() const { return kind_; }
    std::string kind_name() const;

    // Positions where V or one of its derivatives jumps; ODE segments and
    // grid samplers split or average across these.
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    // The constant values V settles to left/right of all breakpoints.
    double asymptotic_left() const;
    double asymptotic_right() const;

    // Even continuation V(|x|) for half-line (radial) problems; requires
    // every breakpoint at x >= 0.
    Potential even_extension() const;

    bool mirrored() const { return mirrored_; }
    // Named scalar parameters (config echo / output headers).
    const std::map<std::string, double>& parameters() const { return params_; }
    const std::vector<double>& table_x() const;
    const std::vector<double>& table_v() const;

private:
    Potential() = default;
    double eval_raw(double x) const;

    PotentialKind kind_ = PotentialKind::zero;
    bool mirrored_ = false;
    std::map<std::string, double> params_;
    std::vector<double> breakpoints_;
    PchipCurve table_;
    bool has_table_ = false;
};

} // namespace relgreen

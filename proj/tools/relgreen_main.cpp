// relgreen: batch CLI over the library.  Every run is driven by a structured
// JSON config (strictly validated, unknown keys rejected before any
// computation), produces a result envelope with a config echo that re-runs
// bit-exactly, and emits CSV or JSON.  Grid cells are dispatched
// data-parallel with ordering fixed by grid index, so repeated runs with the
// same config and seed give byte-identical payloads.

#include "relgreen/affine.hpp"
#include "relgreen/boundary.hpp"
#include "relgreen/dk.hpp"
#include "relgreen/errors.hpp"
#include "relgreen/free_green.hpp"
#include "relgreen/green_evaluator.hpp"
#include "relgreen/parallel.hpp"
#include "relgreen/potential.hpp"
#include "relgreen/resolvent.hpp"
#include "relgreen/transfer.hpp"
#include "relgreen/version.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;
using namespace relgreen;

namespace {

// Config errors abort with a diagnostic before any computation starts.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Schema helpers

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& where) {
    if (!obj.is_object())
        throw SchemaError(where + ": expected an object");
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const auto& k : allowed)
            if (item.key() == k) { ok = true; break; }
        if (!ok)
            throw SchemaError(where + ": unknown key \"" + item.key() + "\"");
    }
}

double get_num(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key))
        throw SchemaError(where + ": missing required key \"" + key + "\"");
    const json& v = obj.at(key);
    if (!v.is_number())
        throw SchemaError(where + "." + key + ": expected a number");
    return v.get<double>();
}

double get_num_or(const json& obj, const std::string& key, double dflt,
                  const std::string& where) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_number())
        throw SchemaError(where + "." + key + ": expected a number");
    return v.get<double>();
}

long get_int_or(const json& obj, const std::string& key, long dflt,
                const std::string& where) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw SchemaError(where + "." + key + ": expected an integer");
    return v.get<long>();
}

std::string get_str(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key))
        throw SchemaError(where + ": missing required key \"" + key + "\"");
    const json& v = obj.at(key);
    if (!v.is_string())
        throw SchemaError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> get_num_array(const json& v, const std::string& where) {
    if (!v.is_array())
        throw SchemaError(where + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number())
            throw SchemaError(where + ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

// Grid: a bare number, an array of values, {"values":[...]}, or
// {"start":a,"stop":b,"count":n} (inclusive linspace).
std::vector<double> parse_grid(const json& g, const std::string& where) {
    if (g.is_number()) return {g.get<double>()};
    if (g.is_array()) return get_num_array(g, where);
    if (g.is_object()) {
        if (g.contains("values")) {
            check_keys(g, {"values"}, where);
            return get_num_array(g.at("values"), where + ".values");
        }
        check_keys(g, {"start", "stop", "count"}, where);
        const double a = get_num(g, "start", where);
        const double b = get_num(g, "stop", where);
        const long n = get_int_or(g, "count", -1, where);
        if (n < 0) throw SchemaError(where + ": missing required key \"count\"");
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i)
            out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) /
                                            static_cast<double>(n - 1));
        return out;
    }
    throw SchemaError(where + ": expected a number, an array, or a grid object");
}

ParticleConfig parse_units(const json& cfg) {
    ParticleConfig p;
    if (!cfg.contains("units")) return p;
    const json& u = cfg.at("units");
    check_keys(u, {"mass", "c", "hbar"}, "units");
    p.mass = get_num_or(u, "mass", 1.0, "units");
    p.light_speed = get_num_or(u, "c", 1.0, "units");
    p.hbar = get_num_or(u, "hbar", 1.0, "units");
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw SchemaError(std::string("units: ") + e.what());
    }
    return p;
}

struct PotentialSpec {
    Potential V = Potential::zero();
    bool is_free = true;      // V == 0 everywhere
    bool is_constant = true;  // V == v0 everywhere
    double v0 = 0.0;
};

PotentialSpec parse_potential(const json& blk, const std::string& where) {
    PotentialSpec ps;
    if (!blk.contains("potential")) return ps;
    const json& pj = blk.at("potential");
    const std::string w = where + ".potential";
    const std::string type = get_str(pj, "type", w);
    if (type == "zero") {
        check_keys(pj, {"type"}, w);
    } else if (type == "constant") {
        check_keys(pj, {"type", "v0"}, w);
        ps.v0 = get_num(pj, "v0", w);
        ps.V = Potential::constant(ps.v0);
        ps.is_free = ps.v0 == 0.0;
    } else if (type == "square_well") {
        check_keys(pj, {"type", "v0", "from", "to"}, w);
        const double v0 = get_num(pj, "v0", w);
        const double a = get_num(pj, "from", w);
        const double b = get_num(pj, "to", w);
        ps.V = Potential::square_well(v0, a, b);
        ps.is_free = ps.is_constant = false;
    } else if (type == "tabulated") {
        check_keys(pj, {"type", "x", "v"}, w);
        ps.V = Potential::tabulated(get_num_array(pj.at("x"), w + ".x"),
                                    get_num_array(pj.at("v"), w + ".v"));
        ps.is_free = ps.is_constant = false;
    } else {
        throw SchemaError(w + ".type: unknown potential type \"" + type + "\"");
    }
    return ps;
}

GreenEvaluator make_evaluator(const PotentialSpec& ps, const ParticleConfig& p,
                              double tol) {
    if (ps.is_free) return free_evaluator(p);
    if (ps.is_constant) return constant_evaluator(ps.v0, p);
    return resolvent_evaluator(ps.V, p, tol);
}

BoxGeometry parse_box(const json& blk, const std::string& where) {
    if (!blk.contains("box"))
        throw SchemaError(where + ": missing required key \"box\"");
    const json& bj = blk.at("box");
    check_keys(bj, {"from", "to"}, where + ".box");
    BoxGeometry box;
    box.a = get_num(bj, "from", where + ".box");
    box.b = get_num(bj, "to", where + ".box");
    try {
        box.validate();
    } catch (const std::exception& e) {
        throw SchemaError(where + ".box: " + e.what());
    }
    return box;
}

// ---------------------------------------------------------------------------
// Output

struct Column {
    std::string name;
    std::string unit;  // empty = dimensionless / textual
};

struct Table {
    std::string title;  // CSV section comment; empty for the lone table
    std::vector<Column> cols;
    std::vector<json> rows;  // objects keyed by column name; null = flagged cell
};

json table_payload(const Table& t) {
    json cols = json::array();
    for (const auto& c : t.cols) cols.push_back({{"name", c.name}, {"unit", c.unit}});
    return json{{"columns", cols}, {"rows", t.rows}};
}

std::string format_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long>());
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
}

void write_csv(std::ostream& os, const std::string& command, const json& echo,
               const std::vector<Table>& tables) {
    os << "# relgreen " << command << " v" << version_string << "\n";
    os << "# config: " << echo.dump() << "\n";
    bool first = true;
    for (const auto& t : tables) {
        if (!first) os << "\n";
        first = false;
        if (!t.title.empty()) os << "# table: " << t.title << "\n";
        for (std::size_t i = 0; i < t.cols.size(); ++i) {
            if (i) os << ",";
            os << t.cols[i].name;
            if (!t.cols[i].unit.empty()) os << " [" << t.cols[i].unit << "]";
        }
        os << "\n";
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < t.cols.size(); ++i) {
                if (i) os << ",";
                os << format_cell(row.contains(t.cols[i].name) ? row.at(t.cols[i].name)
                                                               : json(nullptr));
            }
            os << "\n";
        }
    }
}

// ---------------------------------------------------------------------------
// Shared cell machinery

struct Cell {
    Complex value{0.0, 0.0};
    std::string flag;  // empty = clean
};

template <class Fn>
Cell eval_cell(Fn&& fn) {
    Cell c;
    try {
        c.value = fn();
    } catch (const ThresholdEnergyError&) {
        c.flag = "threshold";
    } catch (const PoleError&) {
        c.flag = "near_pole";
    } catch (const DivisionDegeneracyError&) {
        c.flag = "near_pole";
    } catch (const NonDecayingSolutionError&) {
        c.flag = "continuum";
    } catch (const WronskianDegeneracyError&) {
        c.flag = "degenerate";
    } catch (const std::invalid_argument&) {
        c.flag = "invalid";
    } catch (const std::exception&) {
        c.flag = "error";
    }
    return c;
}

void push_amplitude_row(Table& t, double x_b, double x_a, double e, const Cell& c) {
    json row{{"x_b", x_b}, {"x_a", x_a}, {"energy", e}, {"flag", c.flag}};
    if (c.flag.empty()) {
        row["re"] = c.value.real();
        row["im"] = c.value.imag();
    } else {
        row["re"] = nullptr;
        row["im"] = nullptr;
    }
    t.rows.push_back(std::move(row));
}

Table amplitude_table() {
    Table t;
    t.cols = {{"x_b", "len"}, {"x_a", "len"}, {"energy", "en"},
              {"re", "amp"},  {"im", "amp"},  {"flag", ""}};
    return t;
}

// Cartesian (x_b, x_a, E) sweep, parallel over cells, ordering fixed by index.
Table sweep_amplitude(const std::vector<double>& xb, const std::vector<double>& xa,
                      const std::vector<double>& en,
                      const std::function<Complex(double, double, double)>& f) {
    const std::size_t n = xb.size() * xa.size() * en.size();
    std::vector<Cell> cells(n);
    parallel_map(n, Exec::parallel, [&](std::size_t i) {
        const std::size_t ie = i % en.size();
        const std::size_t ia = (i / en.size()) % xa.size();
        const std::size_t ib = i / (en.size() * xa.size());
        cells[i] = eval_cell([&] { return f(xb[ib], xa[ia], en[ie]); });
    });
    Table t = amplitude_table();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ie = i % en.size();
        const std::size_t ia = (i / en.size()) % xa.size();
        const std::size_t ib = i / (en.size() * xa.size());
        push_amplitude_row(t, xb[ib], xa[ia], en[ie], cells[i]);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Commands.  Each returns the payload tables (plus optional extras merged
// into the payload object).

struct CommandResult {
    std::vector<Table> tables;
    json extras = json::object();
};

CommandResult cmd_free(const json& blk, const ParticleConfig& p, long seed) {
    check_keys(blk, {"x_b", "x_a", "energy", "random_points", "x_window",
                     "energy_window"},
               "free");
    const bool random_mode = blk.contains("random_points");
    CommandResult res;
    if (random_mode) {
        if (blk.contains("x_b") || blk.contains("x_a") || blk.contains("energy"))
            throw SchemaError("free: random_points excludes explicit grids");
        const long n = get_int_or(blk, "random_points", 0, "free");
        if (n < 0) throw SchemaError("free.random_points: must be nonnegative");
        if (!blk.contains("x_window") || !blk.contains("energy_window"))
            throw SchemaError("free: random_points requires x_window and energy_window");
        const auto xw = get_num_array(blk.at("x_window"), "free.x_window");
        const auto ew = get_num_array(blk.at("energy_window"), "free.energy_window");
        if (xw.size() != 2 || ew.size() != 2)
            throw SchemaError("free: windows must be [lo, hi] pairs");
        std::mt19937 rng(static_cast<std::uint32_t>(seed));
        std::uniform_real_distribution<double> ux(xw[0], xw[1]), ue(ew[0], ew[1]);
        std::vector<double> xb(n), xa(n), en(n);
        for (long i = 0; i < n; ++i) {
            xb[i] = ux(rng);
            xa[i] = ux(rng);
            en[i] = ue(rng);
        }
        std::vector<Cell> cells(n);
        parallel_map(static_cast<std::size_t>(n), Exec::parallel, [&](std::size_t i) {
            cells[i] = eval_cell([&] {
                return free_amplitude_1d(xb[i], xa[i], Complex(en[i], 0.0), p);
            });
        });
        Table t = amplitude_table();
        for (long i = 0; i < n; ++i)
            push_amplitude_row(t, xb[i], xa[i], en[i], cells[i]);
        res.tables.push_back(std::move(t));
        return res;
    }
    if (!blk.contains("x_b") || !blk.contains("x_a") || !blk.contains("energy"))
        throw SchemaError("free: requires x_b, x_a and energy grids");
    const auto xb = parse_grid(blk.at("x_b"), "free.x_b");
    const auto xa = parse_grid(blk.at("x_a"), "free.x_a");
    const auto en = parse_grid(blk.at("energy"), "free.energy");
    res.tables.push_back(sweep_amplitude(xb, xa, en, [&](double b, double a, double e) {
        return free_amplitude_1d(b, a, Complex(e, 0.0), p);
    }));
    return res;
}

CommandResult cmd_wall(const json& blk, const ParticleConfig& p, double tol) {
    check_keys(blk, {"wall_position", "potential", "x_b", "x_a", "energy"}, "wall");
    const double a_wall = get_num(blk, "wall_position", "wall");
    const PotentialSpec ps = parse_potential(blk, "wall");
    const GreenEvaluator g0 = make_evaluator(ps, p, tol);
    if (!blk.contains("x_b") || !blk.contains("x_a") || !blk.contains("energy"))
        throw SchemaError("wall: requires x_b, x_a and energy grids");
    const auto xb = parse_grid(blk.at("x_b"), "wall.x_b");
    const auto xa = parse_grid(blk.at("x_a"), "wall.x_a");
    const auto en = parse_grid(blk.at("energy"), "wall.energy");
    CommandResult res;
    res.tables.push_back(sweep_amplitude(xb, xa, en, [&](double b, double a, double e) {
        return wall_amplitude(g0, a_wall, b, a, Complex(e, 0.0));
    }));
    return res;
}

CommandResult cmd_box(const json& blk, const ParticleConfig& p, double tol) {
    check_keys(blk, {"box", "potential", "x_b", "x_a", "energy"}, "box");
    const BoxGeometry box = parse_box(blk, "box");
    const PotentialSpec ps = parse_potential(blk, "box");
    const GreenEvaluator g0 = make_evaluator(ps, p, tol);
    if (!blk.contains("x_b") || !blk.contains("x_a") || !blk.contains("energy"))
        throw SchemaError("box: requires x_b, x_a and energy grids");
    const auto xb = parse_grid(blk.at("x_b"), "box.x_b");
    const auto xa = parse_grid(blk.at("x_a"), "box.x_a");
    const auto en = parse_grid(blk.at("energy"), "box.energy");
    CommandResult res;
    res.tables.push_back(sweep_amplitude(xb, xa, en, [&](double b, double a, double e) {
        return box_amplitude(g0, box, b, a, Complex(e, 0.0));
    }));
    return res;
}

CommandResult cmd_spectrum(const json& blk, const ParticleConfig& p, double tol) {
    check_keys(blk, {"box", "potential", "energy_range", "scan_count"}, "spectrum");
    const BoxGeometry box = parse_box(blk, "spectrum");
    const PotentialSpec ps = parse_potential(blk, "spectrum");
    if (!blk.contains("energy_range"))
        throw SchemaError("spectrum: missing required key \"energy_range\"");
    const auto range = get_num_array(blk.at("energy_range"), "spectrum.energy_range");
    if (range.size() != 2)
        throw SchemaError("spectrum.energy_range: must be [lo, hi]");

    Table t;
    t.cols = {{"n", ""},         {"energy", "en"},       {"residual", ""},
              {"analytic", "en"}, {"analytic_rel_err", ""}};
    CommandResult res;
    res.extras["warnings"] = json::array();

    const GreenEvaluator g0 = make_evaluator(ps, p, tol);
    const double threshold = std::isfinite(g0.threshold_energy)
                                 ? g0.threshold_energy
                                 : p.rest_energy();
    double e_lo = range[0], e_hi = range[1];
    if (e_hi <= e_lo) {
        res.extras["note"] = "empty energy range";
        res.tables.push_back(std::move(t));
        return res;
    }
    if (e_hi <= threshold) {
        res.extras["note"] = "energy range lies below the bound-state threshold";
        res.tables.push_back(std::move(t));
        return res;
    }
    if (e_lo <= threshold) {
        e_lo = threshold + 1e-9 * std::max(1.0, std::abs(threshold));
        res.extras["note"] = "range start clamped to just above the threshold";
    }

    const double v_off = ps.is_constant ? ps.v0 : 0.0;
    long n_scan = get_int_or(blk, "scan_count", 0, "spectrum");
    if (n_scan <= 0) n_scan = default_scan_count(box, e_lo, e_hi, p, v_off);
    const Spectrum spec = find_box_poles(g0, box, e_lo, e_hi,
                                         static_cast<int>(n_scan), tol, p,
                                         Exec::parallel);
    for (const auto& w : spec.warnings) res.extras["warnings"].push_back(w);

    const double mc2 = p.rest_energy();
    const double L = box.length();
    for (const auto& line : spec.lines) {
        json row{{"n", line.n}, {"energy", line.energy}, {"residual", line.residual}};
        if (ps.is_constant) {
            const double ev = line.energy - v_off;
            const double k = std::sqrt(std::max(ev * ev - mc2 * mc2, 0.0)) /
                             (p.hbar * p.light_speed);
            const double n_phys = std::round(k * L / M_PI);
            const double ea = v_off + std::hypot(mc2, n_phys * M_PI * p.hbar *
                                                          p.light_speed / L);
            row["analytic"] = ea;
            row["analytic_rel_err"] = std::abs(line.energy - ea) / std::abs(ea);
        } else {
            row["analytic"] = nullptr;
            row["analytic_rel_err"] = nullptr;
        }
        t.rows.push_back(std::move(row));
    }
    res.tables.push_back(std::move(t));
    return res;
}

DkMap parse_dk_map(const json& blk, const std::string& where) {
    if (!blk.contains("map"))
        throw SchemaError(where + ": missing required key \"map\"");
    const json& mj = blk.at("map");
    const std::string w = where + ".map";
    if (mj.contains("samples")) {
        check_keys(mj, {"samples"}, w);
        const json& sj = mj.at("samples");
        check_keys(sj, {"q", "h"}, w + ".samples");
        if (!sj.contains("q") || !sj.contains("h"))
            throw SchemaError(w + ".samples: requires q and h arrays");
        try {
            return DkMap::from_samples(get_num_array(sj.at("q"), w + ".samples.q"),
                                       get_num_array(sj.at("h"), w + ".samples.h"));
        } catch (const std::exception& e) {
            throw SchemaError(w + ".samples: " + e.what());
        }
    }
    check_keys(mj, {"name", "alpha", "scale"}, w);
    const std::string name = get_str(mj, "name", w);
    DkMap base = DkMap::identity();
    if (name == "identity") {
    } else if (name == "square") {
        base = DkMap::square();
    } else if (name == "exponential") {
        base = DkMap::exponential();
    } else if (name == "power") {
        if (!mj.contains("alpha"))
            throw SchemaError(w + ": power map requires \"alpha\"");
        base = DkMap::power(get_num(mj, "alpha", w));
    } else {
        throw SchemaError(w + ".name: unknown map \"" + name + "\"");
    }
    if (mj.contains("alpha") && name != "power")
        throw SchemaError(w + ": \"alpha\" only applies to the power map");
    if (mj.contains("scale")) {
        const double s = get_num(mj, "scale", w);
        try {
            base = DkMap::scaled(base, s);
        } catch (const std::exception& e) {
            throw SchemaError(w + ".scale: " + e.what());
        }
    }
    return base;
}

CommandResult cmd_veff(const json& blk, const ParticleConfig& p) {
    check_keys(blk, {"map", "q", "rho"}, "veff");
    const DkMap map = parse_dk_map(blk, "veff");
    const double rho = get_num_or(blk, "rho", 1.0, "veff");
    if (!(rho > 0.0)) throw SchemaError("veff.rho: must be positive");
    if (!blk.contains("q"))
        throw SchemaError("veff: missing required key \"q\"");
    const auto qs = parse_grid(blk.at("q"), "veff.q");

    struct VeffCell {
        double f = 0.0;
        double v = 0.0;
        std::string f_flag, v_flag;
    };
    std::vector<VeffCell> cells(qs.size());
    parallel_map(qs.size(), Exec::parallel, [&](std::size_t i) {
        VeffCell& c = cells[i];
        try {
            c.f = profile_function(map, qs[i]);
        } catch (const std::exception&) {
            c.f_flag = "domain";
        }
        try {
            c.v = effective_potential(map, qs[i], rho, p);
        } catch (const DerivativeUnavailableError&) {
            c.v_flag = "derivative-unavailable";
        } catch (const std::exception&) {
            c.v_flag = "domain";
        }
    });

    Table t;
    t.cols = {{"q", "len"}, {"profile_f", ""}, {"veff", "en"}, {"flag", ""}};
    for (std::size_t i = 0; i < qs.size(); ++i) {
        json row{{"q", qs[i]}};
        row["profile_f"] = cells[i].f_flag.empty() ? json(cells[i].f) : json(nullptr);
        row["veff"] = cells[i].v_flag.empty() ? json(cells[i].v) : json(nullptr);
        row["flag"] = !cells[i].v_flag.empty() ? cells[i].v_flag : cells[i].f_flag;
        t.rows.push_back(std::move(row));
    }
    CommandResult res;
    res.tables.push_back(std::move(t));
    return res;
}

CoordinateMap parse_coordinate_map(const json& blk, const std::string& where) {
    if (!blk.contains("map"))
        throw SchemaError(where + ": missing required key \"map\"");
    const json& mj = blk.at("map");
    const std::string w = where + ".map";
    check_keys(mj, {"name", "dimension"}, w);
    const std::string name = get_str(mj, "name", w);
    if (name == "identity") {
        const long d = get_int_or(mj, "dimension", 1, w);
        if (d < 1 || d > static_cast<long>(kMaxAffineDim))
            throw SchemaError(w + ".dimension: must be 1..4");
        return CoordinateMap::identity(static_cast<std::size_t>(d));
    }
    if (name == "polar") {
        if (mj.contains("dimension") && get_int_or(mj, "dimension", 2, w) != 2)
            throw SchemaError(w + ": polar map is two-dimensional");
        return CoordinateMap::polar2d();
    }
    throw SchemaError(w + ".name: unknown map \"" + name + "\"");
}

CommandResult cmd_geometry(const json& blk, const ParticleConfig& p) {
    check_keys(blk, {"map", "points", "path"}, "geometry");
    const CoordinateMap map = parse_coordinate_map(blk, "geometry");
    const std::size_t dim = map.dimension();
    CommandResult res;

    Table pts;
    pts.title = "points";
    {
        std::vector<Column> cols;
        for (std::size_t i = 0; i < dim; ++i) cols.push_back({"q" + std::to_string(i), "len"});
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t m = 0; m < dim; ++m)
                cols.push_back({"e" + std::to_string(i) + std::to_string(m), ""});
        cols.push_back({"det", ""});
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t m = 0; m < dim; ++m)
                cols.push_back({"g" + std::to_string(i) + std::to_string(m), ""});
        cols.push_back({"sqrt_g", ""});
        for (std::size_t i = 0; i < dim; ++i) cols.push_back({"T" + std::to_string(i), ""});
        for (std::size_t i = 0; i < dim; ++i) cols.push_back({"S" + std::to_string(i), ""});
        cols.push_back({"flag", ""});
        pts.cols = std::move(cols);
    }
    if (blk.contains("points")) {
        const json& pj = blk.at("points");
        if (!pj.is_array())
            throw SchemaError("geometry.points: expected an array of points");
        for (std::size_t ip = 0; ip < pj.size(); ++ip) {
            const auto q = get_num_array(pj.at(ip), "geometry.points[" +
                                                        std::to_string(ip) + "]");
            if (q.size() != dim)
                throw SchemaError("geometry.points[" + std::to_string(ip) +
                                  "]: dimension mismatch with the map");
            json row;
            for (std::size_t i = 0; i < dim; ++i) row["q" + std::to_string(i)] = q[i];
            try {
                const ConnectionData cd = connection(map, q);
                const Frame fr = frame(map, q);
                for (std::size_t i = 0; i < dim; ++i)
                    for (std::size_t m = 0; m < dim; ++m)
                        row["e" + std::to_string(i) + std::to_string(m)] =
                            fr.e[i * dim + m];
                row["det"] = fr.det;
                for (std::size_t i = 0; i < dim; ++i)
                    for (std::size_t m = 0; m < dim; ++m)
                        row["g" + std::to_string(i) + std::to_string(m)] =
                            cd.metric.g[i * dim + m];
                row["sqrt_g"] = cd.metric.sqrt_g;
                for (std::size_t i = 0; i < dim; ++i) {
                    row["T" + std::to_string(i)] = cd.contraction_lower[i];
                    row["S" + std::to_string(i)] = cd.contraction_raised[i];
                }
                row["flag"] = "";
            } catch (const SingularJacobianError&) {
                row["flag"] = "singular";
            } catch (const std::domain_error&) {
                row["flag"] = "domain";
            }
            pts.rows.push_back(std::move(row));
        }
    }
    res.tables.push_back(std::move(pts));

    if (blk.contains("path")) {
        const json& pj = blk.at("path");
        check_keys(pj,
                   {"q", "rho", "eps_s", "energy", "charge", "scalar_v0",
                    "vector_potential"},
                   "geometry.path");
        SlicedPathState st;
        if (!pj.contains("q") || !pj.at("q").is_array())
            throw SchemaError("geometry.path.q: expected an array of points");
        for (std::size_t i = 0; i < pj.at("q").size(); ++i)
            st.q.push_back(get_num_array(pj.at("q").at(i),
                                         "geometry.path.q[" + std::to_string(i) + "]"));
        if (!pj.contains("rho"))
            throw SchemaError("geometry.path: missing required key \"rho\"");
        st.rho = get_num_array(pj.at("rho"), "geometry.path.rho");
        st.eps_s = get_num(pj, "eps_s", "geometry.path");
        if (pj.contains("energy")) {
            const json& ej = pj.at("energy");
            if (ej.is_number()) {
                st.energy = Complex(ej.get<double>(), 0.0);
            } else {
                const auto e2 = get_num_array(ej, "geometry.path.energy");
                if (e2.size() != 2)
                    throw SchemaError("geometry.path.energy: number or [re, im]");
                st.energy = Complex(e2[0], e2[1]);
            }
        }
        st.charge = get_num_or(pj, "charge", 1.0, "geometry.path");
        if (pj.contains("scalar_v0")) {
            const double v0 = get_num(pj, "scalar_v0", "geometry.path");
            st.scalar_potential = [v0](const std::vector<double>&) { return v0; };
        }
        if (pj.contains("vector_potential")) {
            const json& vj = pj.at("vector_potential");
            check_keys(vj, {"constant", "linear"}, "geometry.path.vector_potential");
            std::vector<double> a0(dim, 0.0);
            std::vector<std::vector<double>> lin(dim, std::vector<double>(dim, 0.0));
            if (vj.contains("constant")) {
                a0 = get_num_array(vj.at("constant"),
                                   "geometry.path.vector_potential.constant");
                if (a0.size() != dim)
                    throw SchemaError(
                        "geometry.path.vector_potential.constant: dimension mismatch");
            }
            if (vj.contains("linear")) {
                const json& lj = vj.at("linear");
                if (!lj.is_array() || lj.size() != dim)
                    throw SchemaError(
                        "geometry.path.vector_potential.linear: expected a DxD matrix");
                for (std::size_t i = 0; i < dim; ++i) {
                    lin[i] = get_num_array(lj.at(i),
                                           "geometry.path.vector_potential.linear");
                    if (lin[i].size() != dim)
                        throw SchemaError(
                            "geometry.path.vector_potential.linear: expected a DxD matrix");
                }
            }
            st.vector_potential = [a0, lin, dim](const std::vector<double>& q) {
                std::vector<double> a(dim, 0.0);
                for (std::size_t i = 0; i < dim; ++i) {
                    a[i] = a0[i];
                    for (std::size_t j = 0; j < dim; ++j) a[i] += lin[i][j] * q[j];
                }
                return a;
            };
        }
        try {
            st.validate(dim);
        } catch (const std::exception& e) {
            throw SchemaError(std::string("geometry.path: ") + e.what());
        }

        Table terms;
        terms.title = "path_terms";
        terms.cols = {{"slice", ""},     {"kinetic", "act"},  {"drift", "act"},
                      {"contraction", "act"}, {"gauge_re", "act"}, {"gauge_im", "act"},
                      {"energy_re", "act"},   {"energy_im", "act"}, {"mass", "act"},
                      {"total_re", "act"},    {"total_im", "act"},  {"flag", ""}};
        for (std::size_t n = 0; n < st.slice_count(); ++n) {
            json row{{"slice", static_cast<long>(n)}};
            try {
                const SlicedActionTerms tt = sliced_action_term(st, n, map, p);
                row["kinetic"] = tt.kinetic.real();
                row["drift"] = tt.drift.real();
                row["contraction"] = tt.contraction.real();
                row["gauge_re"] = tt.gauge.real();
                row["gauge_im"] = tt.gauge.imag();
                row["energy_re"] = tt.energy.real();
                row["energy_im"] = tt.energy.imag();
                row["mass"] = tt.mass.real();
                row["total_re"] = tt.total().real();
                row["total_im"] = tt.total().imag();
                row["flag"] = "";
            } catch (const std::exception&) {
                row["flag"] = "domain";
            }
            terms.rows.push_back(std::move(row));
        }
        res.tables.push_back(std::move(terms));
    }
    return res;
}

CommandResult cmd_oracle(const json& blk, const ParticleConfig& p, double tol) {
    check_keys(blk, {"potential", "energy", "x_b", "x_a", "refinements", "grid",
                     "slicing"},
               "oracle");
    const PotentialSpec ps = parse_potential(blk, "oracle");
    const double E = get_num(blk, "energy", "oracle");
    const double x_b = get_num(blk, "x_b", "oracle");
    const double x_a = get_num(blk, "x_a", "oracle");
    long refinements = get_int_or(blk, "refinements", 2, "oracle");
    if (refinements < 1) throw SchemaError("oracle.refinements: must be >= 1");

    GridSpec grid;
    if (blk.contains("grid")) {
        const json& gj = blk.at("grid");
        check_keys(gj, {"dx", "margin"}, "oracle.grid");
        grid.dx = get_num_or(gj, "dx", grid.dx, "oracle.grid");
        grid.margin = get_num_or(gj, "margin", grid.margin, "oracle.grid");
    }
    SlicingSpec slicing;
    if (blk.contains("slicing")) {
        const json& sj = blk.at("slicing");
        check_keys(sj, {"eps", "l_max", "l_split", "level", "tail_tol"},
                   "oracle.slicing");
        slicing.eps = get_num_or(sj, "eps", slicing.eps, "oracle.slicing");
        slicing.l_max = get_num_or(sj, "l_max", slicing.l_max, "oracle.slicing");
        slicing.l_split = get_num_or(sj, "l_split", slicing.l_split, "oracle.slicing");
        slicing.level = static_cast<int>(
            get_int_or(sj, "level", slicing.level, "oracle.slicing"));
        slicing.tail_tol = get_num_or(sj, "tail_tol", slicing.tail_tol, "oracle.slicing");
    }

    // Reference from the ODE-based resolvent; unavailable -> null column.
    Complex ref{0.0, 0.0};
    bool have_ref = true;
    try {
        ref = resolvent_evaluator(ps.V, p, std::min(tol, 1e-10))(x_b, x_a,
                                                                 Complex(E, 0.0));
    } catch (const std::exception&) {
        have_ref = false;
    }

    Table t;
    t.cols = {{"level", ""},   {"dx", "len"},   {"eps", "time"},
              {"re", "amp"},   {"im", "amp"},   {"tail_estimate", ""},
              {"abs_err", ""}, {"ratio", ""},   {"grid_points", ""},
              {"lattice_slices", ""}};
    std::vector<double> errs;
    for (long k = 0; k < refinements; ++k) {
        GridSpec g = grid;
        SlicingSpec s = slicing;
        const double f = std::pow(0.5, static_cast<double>(k));
        g.dx = grid.dx * f;
        s.eps = slicing.eps * f;
        const TransferReport rep =
            transfer_matrix_report(ps.V, Complex(E, 0.0), x_b, x_a, p, g, s,
                                   Exec::parallel);
        json row{{"level", k},
                 {"dx", rep.dx_used},
                 {"eps", s.eps},
                 {"re", rep.value.real()},
                 {"im", rep.value.imag()},
                 {"tail_estimate", rep.tail_estimate},
                 {"grid_points", rep.grid_points},
                 {"lattice_slices", rep.lattice_slices}};
        if (have_ref) {
            const double err = std::abs(rep.value - ref);
            row["abs_err"] = err;
            row["ratio"] = errs.empty() ? json(nullptr) : json(errs.back() / err);
            errs.push_back(err);
        } else {
            row["abs_err"] = nullptr;
            row["ratio"] = nullptr;
        }
        t.rows.push_back(std::move(row));
    }
    CommandResult res;
    if (have_ref) {
        res.extras["reference"] = json{{"re", ref.real()}, {"im", ref.imag()}};
    } else {
        res.extras["reference"] = nullptr;
    }
    res.tables.push_back(std::move(t));
    return res;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
    CLI::App app{"relativistic fixed-energy Green functions from the sliced "
                 "path integral"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"free", "free-particle amplitude over (x_b, x_a, E) grids"},
        {"wall", "amplitude with one impenetrable wall"},
        {"box", "amplitude inside a Dirichlet box"},
        {"spectrum", "bound-state energies from box-denominator zeros"},
        {"veff", "transformation profile and effective potential over q"},
        {"geometry", "frames, metric, connection contractions, sliced action"},
        {"oracle", "grid transfer-matrix amplitude with convergence report"},
    };

    std::string config_path, out_path, format_flag;
    long seed_flag = 0;
    bool seed_given = false;
    double tol_flag = 0.0;
    bool tol_given = false;

    for (const auto& [name, desc] : commands) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "run configuration (JSON)")
            ->required();
        sub->add_option("--out", out_path, "output path (default: stdout)");
        sub->add_option("--format", format_flag, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", seed_flag, "seed for randomized sweeps")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--tol", tol_flag, "tolerance override")
            ->each([&](const std::string&) { tol_given = true; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    const std::string command = app.get_subcommands().front()->get_name();

    json cfg;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "relgreen: cannot open config file: " << config_path << "\n";
            return 2;
        }
        try {
            cfg = json::parse(in);
        } catch (const json::parse_error& e) {
            std::cerr << "relgreen: config parse error: " << e.what() << "\n";
            return 2;
        }
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        check_keys(cfg,
                   {"units", "output", "tolerance", "seed", "command", command},
                   "config");
        if (cfg.contains("command")) {
            const std::string declared = get_str(cfg, "command", "config");
            if (declared != command)
                throw SchemaError("config.command: declares \"" + declared +
                                  "\" but the \"" + command +
                                  "\" subcommand was invoked");
        }
        const ParticleConfig p = parse_units(cfg);

        std::string format = "json";
        std::string out = out_path;
        if (cfg.contains("output")) {
            const json& oj = cfg.at("output");
            check_keys(oj, {"format", "path"}, "output");
            if (oj.contains("format")) format = get_str(oj, "format", "output");
            if (out.empty() && oj.contains("path")) out = get_str(oj, "path", "output");
        }
        if (!format_flag.empty()) format = format_flag;
        if (format != "csv" && format != "json")
            throw SchemaError("output.format: must be \"csv\" or \"json\"");

        double tol = 1e-10;
        if (cfg.contains("tolerance")) {
            if (!cfg.at("tolerance").is_number())
                throw SchemaError("config.tolerance: expected a number");
            tol = cfg.at("tolerance").get<double>();
        }
        if (tol_given) tol = tol_flag;
        if (!(tol > 0.0) || !std::isfinite(tol))
            throw SchemaError("tolerance: must be positive and finite");

        long seed = 0;
        if (cfg.contains("seed")) {
            if (!cfg.at("seed").is_number_integer())
                throw SchemaError("config.seed: expected an integer");
            seed = cfg.at("seed").get<long>();
        }
        if (seed_given) seed = seed_flag;

        if (!cfg.contains(command))
            throw SchemaError("config: missing the \"" + command +
                              "\" parameter block");
        const json& blk = cfg.at(command);
        if (!blk.is_object())
            throw SchemaError("config." + command + ": expected an object");

        CommandResult result;
        if (command == "free") {
            result = cmd_free(blk, p, seed);
        } else if (command == "wall") {
            result = cmd_wall(blk, p, tol);
        } else if (command == "box") {
            result = cmd_box(blk, p, tol);
        } else if (command == "spectrum") {
            result = cmd_spectrum(blk, p, tol);
        } else if (command == "veff") {
            result = cmd_veff(blk, p);
        } else if (command == "geometry") {
            result = cmd_geometry(blk, p);
        } else {
            result = cmd_oracle(blk, p, tol);
        }

        // Effective config echo: re-running it reproduces the payload.
        json echo;
        echo["command"] = command;
        echo["units"] = {{"mass", p.mass}, {"c", p.light_speed}, {"hbar", p.hbar}};
        echo["output"] = {{"format", format}};
        if (!out.empty()) echo["output"]["path"] = out;
        echo["tolerance"] = tol;
        echo["seed"] = seed;
        echo[command] = blk;

        json payload;
        payload["units"] = {{"mass", p.mass}, {"c", p.light_speed}, {"hbar", p.hbar}};
        if (result.tables.size() == 1 && result.tables[0].title.empty()) {
            payload.update(table_payload(result.tables[0]));
        } else {
            json tables = json::object();
            for (const auto& t : result.tables) tables[t.title] = table_payload(t);
            payload["tables"] = std::move(tables);
        }
        payload.update(result.extras);

        const double wall_clock =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();

        std::ostringstream body;
        if (format == "json") {
            json envelope;
            envelope["command"] = command;
            envelope["version"] = version_string;
            envelope["wall_clock_s"] = wall_clock;
            envelope["config"] = echo;
            envelope["payload"] = payload;
            body << envelope.dump(2) << "\n";
        } else {
            write_csv(body, command, echo, result.tables);
        }

        if (out.empty()) {
            std::cout << body.str();
        } else {
            std::ofstream os(out, std::ios::binary);
            if (!os) {
                std::cerr << "relgreen: cannot open output path: " << out << "\n";
                return 2;
            }
            os << body.str();
        }
        return 0;
    } catch (const SchemaError& e) {
        std::cerr << "relgreen: config error: " << e.what() << "\n";
        return 2;
    } catch (const TruncationBoundError& e) {
        std::cerr << "relgreen: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "relgreen: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }

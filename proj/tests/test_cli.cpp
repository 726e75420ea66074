#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

// RELGREEN_CLI_PATH is injected by the build as the absolute path of the
// relgreen executable.
#ifndef RELGREEN_CLI_PATH
#error "RELGREEN_CLI_PATH must point at the relgreen binary"
#endif

using nlohmann::json;

namespace {

std::string scratch_dir() {
    static const std::string dir = [] {
        std::string d = "relgreen_cli_scratch";
        if (std::system(("rm -rf " + d + " && mkdir -p " + d).c_str()) != 0)
            std::abort();
        return d;
    }();
    return dir;
}

std::string path_in_scratch(const std::string& name) {
    return scratch_dir() + "/" + name;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    os << text;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RELGREEN_CLI_PATH) + " " + args +
                            " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    if (st == -1) return -1;
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

json run_to_json(const std::string& cmd, const std::string& cfg_text,
                 const std::string& tag, int* exit_code = nullptr) {
    const std::string cfg = path_in_scratch(tag + "_cfg.json");
    const std::string out = path_in_scratch(tag + "_out.json");
    write_file(cfg, cfg_text);
    const int rc =
        run_cli(cmd + " --config " + cfg + " --out " + out + " --format json");
    if (exit_code) *exit_code = rc;
    if (rc != 0) return json();
    return json::parse(slurp(out));
}

} // namespace

TEST_CASE("free command emits the closed-form amplitude") {
    int rc = -1;
    const json env = run_to_json(
        "free", R"({"free": {"x_b": 0.0, "x_a": 0.0, "energy": 0.0}})",
        "free_basic", &rc);
    REQUIRE(rc == 0);
    CHECK(env.at("command") == "free");
    CHECK(env.contains("version"));
    CHECK(env.contains("wall_clock_s"));
    const json& rows = env.at("payload").at("rows");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].at("re").get<double>() == 0.0);
    CHECK(rows[0].at("im").get<double>() == 0.5);
    CHECK(rows[0].at("flag").get<std::string>().empty());
}

TEST_CASE("unknown keys are rejected before any computation") {
    int rc = 0;
    run_to_json("free",
                R"({"free": {"x_b": 0.0, "x_a": 0.0, "energy": 0.0, "bogus": 1}})",
                "schema_block", &rc);
    CHECK(rc == 2);
    run_to_json("free",
                R"({"free": {"x_b": 0.0, "x_a": 0.0, "energy": 0.0},
                    "unknown_top": 1})",
                "schema_top", &rc);
    CHECK(rc == 2);
    // A config block for a different command is a schema error, too.
    run_to_json("free",
                R"({"wall": {"wall_position": 0.0, "x_b": 1.0, "x_a": 1.0,
                             "energy": 0.0}})",
                "schema_mismatch", &rc);
    CHECK(rc == 2);
}

TEST_CASE("empty grids succeed with an empty row set") {
    int rc = -1;
    const json env = run_to_json(
        "free",
        R"({"free": {"x_b": {"values": []}, "x_a": 0.0, "energy": 0.0}})",
        "empty_grid", &rc);
    REQUIRE(rc == 0);
    CHECK(env.at("payload").at("rows").empty());
}

TEST_CASE("repeated runs produce byte-identical payloads") {
    const std::string cfg_text =
        R"({"free": {"x_b": [0.1, 0.7], "x_a": [-0.3], "energy": [0.0, 0.4]}})";
    const json a = run_to_json("free", cfg_text, "det_a");
    const json b = run_to_json("free", cfg_text, "det_b");
    REQUIRE(!a.is_null());
    CHECK(a.at("payload").dump() == b.at("payload").dump());
}

TEST_CASE("seeded random sweeps are reproducible") {
    const std::string cfg_text =
        R"({"seed": 42,
            "free": {"random_points": 6, "x_window": [-1.0, 1.0],
                     "energy_window": [-0.5, 0.9]}})";
    const json a = run_to_json("free", cfg_text, "rand_a");
    const json b = run_to_json("free", cfg_text, "rand_b");
    REQUIRE(!a.is_null());
    REQUIRE(a.at("payload").at("rows").size() == 6);
    CHECK(a.at("payload").dump() == b.at("payload").dump());
}

TEST_CASE("the seed flag overrides the config seed") {
    const std::string cfg = path_in_scratch("seedflag_cfg.json");
    write_file(cfg,
               R"({"seed": 42,
                   "free": {"random_points": 4, "x_window": [-1.0, 1.0],
                            "energy_window": [-0.5, 0.5]}})");
    const std::string o1 = path_in_scratch("seedflag_1.json");
    const std::string o2 = path_in_scratch("seedflag_2.json");
    const std::string o3 = path_in_scratch("seedflag_3.json");
    REQUIRE(run_cli("free --config " + cfg + " --out " + o1 + " --seed 7") == 0);
    REQUIRE(run_cli("free --config " + cfg + " --out " + o2 + " --seed 7") == 0);
    REQUIRE(run_cli("free --config " + cfg + " --out " + o3) == 0);
    const json a = json::parse(slurp(o1));
    const json b = json::parse(slurp(o2));
    const json c = json::parse(slurp(o3));
    CHECK(a.at("payload").dump() == b.at("payload").dump());
    CHECK(a.at("payload").dump() != c.at("payload").dump());
    CHECK(a.at("config").at("seed").get<int>() == 7);
}

TEST_CASE("the config echo reruns bit-exactly") {
    const json first = run_to_json(
        "wall",
        R"({"wall": {"wall_position": -0.5,
                     "potential": {"type": "square_well", "v0": -0.3,
                                   "from": 0.1, "to": 1.2},
                     "x_b": [0.2, 1.4], "x_a": [0.0], "energy": [0.3]}})",
        "echo_first");
    REQUIRE(!first.is_null());
    const std::string echo_cfg = path_in_scratch("echo_cfg.json");
    write_file(echo_cfg, first.at("config").dump());
    const std::string echo_out = path_in_scratch("echo_out.json");
    REQUIRE(run_cli("wall --config " + echo_cfg + " --out " + echo_out) == 0);
    const json second = json::parse(slurp(echo_out));
    CHECK(first.at("payload").dump() == second.at("payload").dump());
}

TEST_CASE("amplitudes on the wall are zero, not errors") {
    int rc = -1;
    const json env = run_to_json(
        "wall",
        R"({"wall": {"wall_position": 0.5, "x_b": 0.5, "x_a": 1.3,
                     "energy": 0.2}})",
        "wall_zero", &rc);
    REQUIRE(rc == 0);
    const json& row = env.at("payload").at("rows").at(0);
    CHECK(std::abs(row.at("re").get<double>()) <= 1e-12);
    CHECK(std::abs(row.at("im").get<double>()) <= 1e-12);
    CHECK(row.at("flag").get<std::string>().empty());
}

TEST_CASE("pole-adjacent box cells are flagged, not fatal") {
    int rc = -1;
    const json env = run_to_json(
        "box",
        R"({"box": {"box": {"from": 0.0, "to": 3.141592653589793},
                    "x_b": 1.0, "x_a": 2.0,
                    "energy": [0.5, 1.4142135623730951]}})",
        "box_pole", &rc);
    REQUIRE(rc == 0);
    const json& rows = env.at("payload").at("rows");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].at("flag").get<std::string>().empty());
    CHECK(rows[1].at("flag").get<std::string>() == "near_pole");
    CHECK(rows[1].at("re").is_null());
    CHECK(rows[1].at("im").is_null());
}

TEST_CASE("spectrum command reports levels with analytic residuals") {
    int rc = -1;
    const json env = run_to_json(
        "spectrum",
        R"({"spectrum": {"box": {"from": 0.0, "to": 3.141592653589793},
                         "energy_range": [1.0001, 4.5]},
            "tolerance": 1e-10})",
        "spec_free", &rc);
    REQUIRE(rc == 0);
    const json& rows = env.at("payload").at("rows");
    REQUIRE(rows.size() == 4);
    for (int n = 1; n <= 4; ++n) {
        const json& r = rows[n - 1];
        CHECK(r.at("n").get<int>() == n);
        const double exact = std::sqrt(1.0 + n * n);
        CHECK(std::abs(r.at("energy").get<double>() - exact) <= 1e-6 * exact);
        CHECK(std::abs(r.at("analytic").get<double>() - exact) <= 1e-12);
        CHECK(r.at("analytic_rel_err").get<double>() <= 1e-6);
    }
}

TEST_CASE("spectrum windows below threshold return a note") {
    int rc = -1;
    const json env = run_to_json(
        "spectrum",
        R"({"spectrum": {"box": {"from": 0.0, "to": 3.141592653589793},
                         "energy_range": [0.2, 0.8]}})",
        "spec_low", &rc);
    REQUIRE(rc == 0);
    CHECK(env.at("payload").at("rows").empty());
    CHECK(env.at("payload").at("note").get<std::string>().find("threshold") !=
          std::string::npos);
}

TEST_CASE("veff of the identity map vanishes") {
    int rc = -1;
    const json env = run_to_json(
        "veff",
        R"({"veff": {"map": {"name": "identity"},
                     "q": {"start": -1.0, "stop": 1.0, "count": 5}}})",
        "veff_id", &rc);
    REQUIRE(rc == 0);
    const json& rows = env.at("payload").at("rows");
    REQUIRE(rows.size() == 5);
    for (const json& r : rows) {
        CHECK(r.at("profile_f").get<double>() == 1.0);
        CHECK(r.at("veff").get<double>() == 0.0);
        CHECK(r.at("flag").get<std::string>().empty());
    }
}

TEST_CASE("sampled maps flag the missing curvature instead of guessing") {
    int rc = -1;
    const json env = run_to_json(
        "veff",
        R"({"veff": {"map": {"samples": {"q": [0.5, 1.0, 1.5, 2.0, 2.5],
                                         "h": [0.25, 1.0, 2.25, 4.0, 6.25]}},
                     "q": [1.2]}})",
        "veff_samples", &rc);
    REQUIRE(rc == 0);
    const json& row = env.at("payload").at("rows").at(0);
    CHECK(row.at("profile_f").is_number());
    CHECK(row.at("veff").is_null());
    CHECK(row.at("flag").get<std::string>() == "derivative-unavailable");
}

TEST_CASE("csv output carries the provenance header") {
    const std::string cfg = path_in_scratch("csv_cfg.json");
    write_file(cfg, R"({"free": {"x_b": 1.0, "x_a": 0.0, "energy": 0.0}})");
    const std::string out = path_in_scratch("csv_out.csv");
    REQUIRE(run_cli("free --config " + cfg + " --out " + out +
                    " --format csv") == 0);
    const std::string text = slurp(out);
    CHECK(text.rfind("# relgreen free v", 0) == 0);
    CHECK(text.find("# config: ") != std::string::npos);
    CHECK(text.find("x_b") != std::string::npos);
    CHECK(text.find("flag") != std::string::npos);
}

TEST_CASE("missing config files are runtime failures, not crashes") {
    CHECK(run_cli("free --config does_not_exist_12345.json") != 0);
}

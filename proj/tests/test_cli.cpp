#include "mhm/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace mhm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig small_convergence(const std::string& out) {
    ExperimentConfig c;
    c.kind = ExperimentKind::skeleton_convergence;
    c.grid = 2;
    c.levels = {0, 1};
    c.nus = {0.4};
    c.output_dir = out;
    return c;
}

std::string scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mhm-cli-test-" + name);
    fs::remove_all(p);
    return p.string();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing: keys, comments, lists and ranges") {
    std::istringstream in(
        "# experiment\n"
        "kind = h-convergence\n"
        "degree = 2   # quadratic\n"
        "levels = 1..3\n"
        "nu = 0.3, 0.49\n"
        "methods = mhm-gals, gals\n"
        "\n"
        "theta = 0.25\n"
        "override_wellposedness = true\n"
        "max_compressibility = 1e-10\n");
    const ExperimentConfig c = parse_config(in);
    CHECK(c.kind == ExperimentKind::h_convergence);
    CHECK(c.degree == 2);
    CHECK(c.levels == std::vector<int>{1, 2, 3});
    CHECK(c.nus == std::vector<double>{0.3, 0.49});
    CHECK(c.methods == std::vector<Method>{Method::mhm_gals, Method::gals});
    CHECK(c.theta == 0.25);
    CHECK(c.override_wellposedness);
    REQUIRE(c.max_compressibility.has_value());
    CHECK(*c.max_compressibility == 1e-10);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("config parsing: errors name the offending line") {
    std::istringstream unknown("degree = 1\nbogus = 3\n");
    try {
        parse_config(unknown);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
    std::istringstream malformed("degree 1\n");
    CHECK_THROWS_AS(parse_config(malformed), Error);
    std::istringstream number("theta = half\n");
    CHECK_THROWS_AS(parse_config(number), Error);
    std::istringstream method("methods = fem\n");
    CHECK_THROWS_AS(parse_config(method), Error);
}

TEST_CASE("config validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    c.theta = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.nus = {0.5};
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.levels = {};
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.kind = ExperimentKind::diagnostics;
    c.methods = {Method::gals};
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.threads = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK(local_depth_for(1, 0) == 2);
    CHECK(local_depth_for(3, 1) == 1);
}

TEST_CASE("names round trip") {
    for (Method m : {Method::mhm_gals, Method::mhm_ga, Method::std_galerkin, Method::gals})
        CHECK(method_from_string(to_string(m)) == m);
    for (ExperimentKind k : {ExperimentKind::h_convergence, ExperimentKind::skeleton_convergence,
                             ExperimentKind::nu_sweep, ExperimentKind::patch_test, ExperimentKind::diagnostics})
        CHECK(experiment_kind_from_string(to_string(k)) == k);
    CHECK(is_multiscale(Method::mhm_ga));
    CHECK_FALSE(is_multiscale(Method::gals));
}

TEST_CASE("number format is full-precision scientific with a dot") {
    const std::regex pattern(R"(-?\d\.\d{16}e[+-]\d{2,3})");
    for (double v : {0.0, 1.0, -3.25e-7, 5.048827e-2, 1e300})
        CHECK(std::regex_match(format_number(v), pattern));
    CHECK(std::stod(format_number(0.1)) == 0.1);
}

TEST_CASE("convergence CSV is byte-identical across runs and thread counts") {
    ExperimentConfig a = small_convergence(scratch("a"));
    ExperimentConfig b = small_convergence(scratch("b"));
    b.threads = 3;
    const ExperimentReport ra = run_experiment(a);
    const ExperimentReport rb = run_experiment(b);
    const std::string name = "mhm-gals_k1_nu0.4.csv";
    REQUIRE(fs::exists(fs::path(a.output_dir) / name));
    const std::string csv = slurp((fs::path(a.output_dir) / name).string());
    CHECK(csv == slurp((fs::path(b.output_dir) / name).string()));
    CHECK(fs::exists(fs::path(a.output_dir) / "summary.json"));
    CHECK(fs::exists(fs::path(a.output_dir) / "run.log"));

    std::istringstream rows(csv);
    std::string line;
    std::getline(rows, line);
    CHECK(line == "H,e0,ord,e1,ord,es,ord,ep,ord");
    const std::string num = R"(-?\d\.\d{16}e[+-]\d{2,3})";
    const std::regex first(num + "(," + num + ",)" + "{4}");
    const std::regex later(num + "(," + num + "," + num + "){4}");
    std::getline(rows, line);
    CHECK(std::regex_match(line, first));
    std::getline(rows, line);
    CHECK(std::regex_match(line, later));
}

TEST_CASE("patch-test experiment passes its band") {
    ExperimentConfig c;
    c.kind = ExperimentKind::patch_test;
    c.grid = 2;
    c.levels = {0};
    c.nus = {0.3};
    c.max_relative_error = 1e-9;
    c.output_dir = scratch("patch");
    const ExperimentReport r = run_experiment(c, false);
    CHECK(r.passed());
    REQUIRE(r.runs.size() == 1);
    CHECK(r.runs[0].levels[0].ok());
    CHECK(r.runs[0].levels[0].relative.displacement_l2 < 1e-9);
}

TEST_CASE("nu-sweep bands separate locking from locking-free methods") {
    ExperimentConfig c;
    c.kind = ExperimentKind::nu_sweep;
    c.grid = 4;
    c.levels = {0};
    c.nus = {0.3, 0.49999};
    c.methods = {Method::mhm_gals, Method::std_galerkin, Method::gals};
    c.locking_free_max_ratio = 3.0;
    c.locking_min_ratio = 5.0;
    c.output_dir = scratch("sweep");
    const ExperimentReport r = run_experiment(c);
    for (const BandCheck& b : r.bands) {
        CAPTURE(b.name);
        CAPTURE(b.detail);
        CHECK(b.pass);
    }
    CHECK(fs::exists(fs::path(c.output_dir) / "std-galerkin_k1_nu-sweep.csv"));
}

TEST_CASE("failed solves are reported, not fatal") {
    ExperimentConfig c = small_convergence(scratch("fail"));
    c.levels = {1};
    c.depth_offset = -2;  // depth 0 on a refined skeleton violates the refinement conditions
    const ExperimentReport r = run_experiment(c, false);
    REQUIRE(r.runs.size() == 1);
    CHECK_FALSE(r.runs[0].levels[0].ok());
}

TEST_CASE("field export writes the sampled fields and traction coefficients") {
    ExperimentConfig c = small_convergence(scratch("fields"));
    c.levels = {0};
    const auto files = export_fields(c);
    CHECK(fs::exists(fs::path(c.output_dir) / "fields.csv"));
    CHECK(fs::exists(fs::path(c.output_dir) / "traction.csv"));
    CHECK(files.size() == 2);
    std::ifstream in(fs::path(c.output_dir) / "fields.csv");
    std::string header;
    std::getline(in, header);
    CHECK_FALSE(header.empty());
}

}  // TEST_SUITE

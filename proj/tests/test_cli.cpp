// End-to-end checks of the command-line interface: exit codes, file
// outputs, determinism, and equivalence of the generic manifold command
// with the built-in example pipeline.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracstab/io.hpp"
#include "fracstab/scenarios.hpp"

namespace fs = std::filesystem;
using fracstab::json;

namespace {

struct RunResult {
    int status;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    fs::path log = fs::temp_directory_path() / "fracstab_cli_test.log";
    std::string cmd =
        std::string(FRACSTAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WEXITSTATUS(rc), ss.str()};
}

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("ml-eval prints the value and both branches") {
    RunResult r = run_cli("ml-eval --p 1 --beta 1 --z-re 1");
    CHECK(r.status == 0);
    CHECK(r.output.find("2.71828182846") != std::string::npos);
    CHECK(r.output.find("branch chosen: series") != std::string::npos);
    RunResult r2 = run_cli("ml-eval --p 0.5 --beta 0.5 --z-re 4");
    CHECK(r2.status == 0);
    CHECK(r2.output.find("series branch") != std::string::npos);
    CHECK(r2.output.find("asymptotic branch") != std::string::npos);
    RunResult r3 = run_cli("ml-eval --p 0.5 --beta 1 --z-re -1");
    CHECK(r3.status == 0);
    CHECK(r3.output.find("0.4275835") != std::string::npos);
}

TEST_CASE("invalid parameters exit with code 2") {
    CHECK(run_cli("ml-eval --p 1.7 --z-re 1").status == 2);
    CHECK(run_cli("ml-eval --p 0.5 --beta -1 --z-re 1").status == 2);
    CHECK(run_cli("example nosuch").status == 2);
    CHECK(run_cli("manifold").status == 2);  // missing --config
}

TEST_CASE("simulate: linear comparison column and validation") {
    fs::path dir = fresh_dir("fracstab_cli_sim");
    fs::path cfg = dir / "sim.json";
    write_file(cfg, R"({
      "p": 0.5,
      "matrix": [[-1.0, 0.0], [0.0, -2.0]],
      "field": {"kind": "zero"},
      "initial": [1.0, 0.5],
      "h": 0.01,
      "horizon": 2.0,
      "compare_linear": true
    })");
    RunResult r = run_cli("--config " + cfg.string() + " --out " + dir.string() +
                          " simulate");
    CHECK(r.status == 0);
    CHECK(r.output.find("max |pece - exact linear|") != std::string::npos);
    std::string csv = slurp(dir / "trajectory.csv");
    CHECK(csv.substr(0, 2) == "t,");
    CHECK(csv.find("exact_x1") != std::string::npos);

    // Horizon shorter than 10 steps: validation failure, exit 2.
    fs::path bad = dir / "bad.json";
    write_file(bad, R"({
      "p": 0.5, "matrix": [[-1.0]], "initial": [1.0],
      "h": 0.01, "horizon": 0.05
    })");
    CHECK(run_cli("--config " + bad.string() + " --out " + dir.string() +
                  " simulate")
              .status == 2);
}

TEST_CASE("simulate: escaping trajectory exits 1 and reports the time") {
    fs::path dir = fresh_dir("fracstab_cli_blowup");
    fs::path cfg = dir / "up.json";
    write_file(cfg, R"({
      "p": 0.5,
      "matrix": [[3.0]],
      "initial": [1.0],
      "h": 0.01,
      "horizon": 40.0
    })");
    RunResult r = run_cli("--config " + cfg.string() + " --out " + dir.string() +
                          " simulate");
    CHECK(r.status == 1);
    CHECK(r.output.find("escaped at t =") != std::string::npos);
}

TEST_CASE("manifold: non-hyperbolic eigenvalue exits 2") {
    fs::path dir = fresh_dir("fracstab_cli_nh");
    fs::path cfg = dir / "nh.json";
    // |arg lambda| = p pi / 2 exactly for p = 0.5.
    write_file(cfg, R"({
      "p": 0.5,
      "system": {"blocks": [
        {"lambda": [0.7071067811865476, 0.7071067811865476], "size": 1}
      ]},
      "samples": [[0.0]]
    })");
    RunResult r = run_cli("--config " + cfg.string() + " --out " + dir.string() +
                          " manifold");
    CHECK(r.status == 2);
    CHECK(r.output.find("boundary") != std::string::npos);
}

TEST_CASE("manifold: zero field maps every sample to sigma_u = 0") {
    fs::path dir = fresh_dir("fracstab_cli_zero");
    fs::path cfg = dir / "zero.json";
    write_file(cfg, R"({
      "p": 0.5,
      "system": {"blocks": [{"lambda": -1.0}, {"lambda": 2.0}]},
      "field": {"kind": "zero"},
      "samples": [[0.05, 0.0], [-0.3, 0.0]],
      "grid": {"h": 0.01, "horizon": 6.0}
    })");
    RunResult r = run_cli("--config " + cfg.string() + " --out " + dir.string() +
                          " manifold");
    CHECK(r.status == 0);
    json rep = fracstab::load_json_file((dir / "manifold_report.json").string());
    for (const auto& s : rep["samples"]) {
        CHECK(s["converged"].get<bool>());
        for (double v : s["sigma_u"].get<std::vector<double>>())
            CHECK(std::abs(v) < 1e-12);
    }
}

TEST_CASE("manifold config reproduces the built-in example 1 pipeline") {
    fs::path dir = fresh_dir("fracstab_cli_ex1cfg");
    fs::path cfg = dir / "ex1.json";
    // Example-1 system and field written out generically, on a coarse grid;
    // the same grid and tolerances must give bit-identical sigma_u.
    write_file(cfg, R"({
      "p": 0.5,
      "system": {"blocks": [
        {"lambda": -1.0, "size": 1},
        {"lambda": 2.0, "size": 2}
      ]},
      "field": {"kind": "polynomial", "terms": [
        {"out": 1, "vars": [0, 0], "coef": 1.0},
        {"out": 2, "vars": [0, 0], "coef": 3.0}
      ]},
      "samples": [[0.01, 0.0, 0.0]],
      "grid": {"h": 0.00390625, "horizon": 6.0},
      "tolerances": {"fixed_point": 1e-8, "tail": 1e-9}
    })");
    RunResult r = run_cli("--config " + cfg.string() + " --out " + dir.string() +
                          " manifold");
    REQUIRE(r.status == 0);
    json rep = fracstab::load_json_file((dir / "manifold_report.json").string());
    auto sigma_u = rep["samples"][0]["sigma_u"].get<std::vector<double>>();

    // Library route with identical parameters.
    fracstab::Scenario sc = fracstab::make_ex1(0.5);
    fracstab::QuadratureSpec spec =
        fracstab::make_quadrature_spec(sc.system, sc.split, 1e-9);
    fracstab::FixedPointOptions opts;
    opts.step = 0.00390625;
    opts.horizon = 6.0;
    Eigen::VectorXd sigma = Eigen::VectorXd::Zero(3);
    sigma(0) = 0.01;
    fracstab::ManifoldResult res = fracstab::solve_fixed_point(
        sigma, sc.system, sc.split, sc.field, spec, opts);
    REQUIRE(res.converged);
    // Identical grid, tolerances and kernels: identical output bits.
    CHECK(sigma_u[1] == res.sigma_u(1));
    CHECK(sigma_u[2] == res.sigma_u(2));
}

TEST_CASE("outputs are deterministic across runs") {
    fs::path da = fresh_dir("fracstab_cli_det_a");
    fs::path db = fresh_dir("fracstab_cli_det_b");
    const std::string cfg_text = R"({
      "p": 0.5,
      "system": {"blocks": [{"lambda": -1.0}, {"lambda": 2.0}]},
      "field": {"kind": "polynomial", "terms": [
        {"out": 1, "vars": [0, 0], "coef": 1.0}
      ]},
      "samples": [[0.01, 0.0], [0.02, 0.0]],
      "grid": {"h": 0.0078125, "horizon": 6.0}
    })";
    write_file(da / "m.json", cfg_text);
    write_file(db / "m.json", cfg_text);
    REQUIRE(run_cli("--config " + (da / "m.json").string() + " --out " +
                    da.string() + " manifold")
                .status == 0);
    REQUIRE(run_cli("--config " + (db / "m.json").string() + " --out " +
                    db.string() + " --jobs 2 manifold")
                .status == 0);
    CHECK(slurp(da / "manifold_samples.csv") == slurp(db / "manifold_samples.csv"));
    CHECK(slurp(da / "manifold_report.json") == slurp(db / "manifold_report.json"));
}

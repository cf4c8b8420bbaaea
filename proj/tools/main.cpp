#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "fracstab/fode_sim.hpp"
#include "fracstab/io.hpp"
#include "fracstab/scenarios.hpp"

namespace fs = std::filesystem;
using namespace fracstab;

namespace {

struct GlobalOpts {
    std::string config;
    std::string out = "out";
    int jobs = 1;
    double tol = 0.0;  // > 0 overrides the fixed-point tolerance
};

void ensure_out(const GlobalOpts& g) { fs::create_directories(g.out); }

std::string out_path(const GlobalOpts& g, const std::string& name) {
    return (fs::path(g.out) / name).string();
}

// ---- ml-eval ---------------------------------------------------------------

int cmd_ml_eval(double p, double beta, double zre, double zim, int q, int deriv,
                double t) {
    MLParams params(FracOrder(p), beta, q);
    Complex z(zre, zim);
    std::cout << "p = " << p << ", beta = " << beta << ", z = " << format_number(zre)
              << (zim >= 0 ? "+" : "") << format_number(zim) << "i\n";
    if (deriv > 0) {
        Complex v = ml_lambda_derivative(params, t, z, deriv);
        std::cout << "(1/m!) d^" << deriv << "/dlambda^" << deriv
                  << " E_{p,p}(t^p lambda) at t = " << t << ": " << format_number(v.real())
                  << (v.imag() >= 0 ? "+" : "") << format_number(v.imag()) << "i\n";
        return 0;
    }
    const bool series_branch = std::abs(z) <= params.switch_radius;
    Complex value = ml_eval(params, z);
    std::cout << "E_{" << p << "," << beta << "}(z) = " << format_number(value.real());
    if (zim != 0.0)
        std::cout << (value.imag() >= 0 ? "+" : "") << format_number(value.imag())
                  << "i";
    std::cout << "\nbranch chosen: " << (series_branch ? "series" : "asymptotic")
              << " (|z| = " << format_number(std::abs(z))
              << ", switch radius = " << format_number(params.switch_radius) << ")\n";
    // Print the other branch when it is defined, as a cross-check.
    try {
        Complex s = ml_series(params, z);
        std::cout << "series branch:     " << format_number(s.real());
        if (zim != 0.0)
            std::cout << (s.imag() >= 0 ? "+" : "") << format_number(s.imag()) << "i";
        std::cout << "\n";
    } catch (const NonConvergence&) {
        std::cout << "series branch:     (not convergent here)\n";
    }
    if (z != Complex(0.0, 0.0)) {
        Complex a = in_unstable_sector(z, p) ? ml_asymptotic_unstable(params, 1.0, z)
                                             : ml_asymptotic_stable(params, 1.0, z);
        std::cout << "asymptotic branch: " << format_number(a.real());
        if (zim != 0.0)
            std::cout << (a.imag() >= 0 ? "+" : "") << format_number(a.imag()) << "i";
        std::cout << "\n";
    }
    return 0;
}

// ---- shared example helpers --------------------------------------------------

std::vector<std::vector<double>> map_rows(const std::vector<MapSample>& samples) {
    std::vector<std::vector<double>> rows;
    for (const auto& s : samples) {
        if (!s.converged) continue;
        std::vector<double> row;
        row.push_back(static_cast<double>(rows.size()));
        for (int i = 0; i < s.sigma_s.size(); ++i) row.push_back(s.sigma_s(i));
        for (int i = 0; i < s.sigma_u.size(); ++i) row.push_back(s.sigma_u(i));
        rows.push_back(std::move(row));
    }
    return rows;
}

int finish_report(const GlobalOpts& g, const std::string& name, json& report) {
    bool pass = report_all_passed(report);
    report["all_passed"] = pass;
    write_json_file(out_path(g, name + "_report.json"), report);
    std::cout << (pass ? "PASS" : "FAIL") << ": report written to "
              << out_path(g, name + "_report.json") << "\n";
    return pass ? 0 : 1;
}

// ---- example ex1 -------------------------------------------------------------

int cmd_example_ex1(const GlobalOpts& g, double p, double sigma1) {
    Scenario sc = make_ex1(p);
    if (g.tol > 0.0) sc.fixed_point.tol = g.tol;
    QuadratureSpec spec = make_quadrature_spec(sc.system, sc.split, sc.tail_tol);

    std::vector<Eigen::VectorXd> samples;
    for (double s : {0.5 * sigma1, sigma1, 2.0 * sigma1}) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(3);
        v(0) = s;
        samples.push_back(v);
    }
    auto result = manifold_map(sc.system, sc.split, sc.field, spec, samples,
                               sc.fixed_point, g.jobs);
    for (const auto& r : result)
        if (!r.converged)
            throw NoContraction("ex1 sample failed: " + r.error);

    Ex1Constants ref = ex1_map_constants(p);
    const auto& mid = result[1];
    const double s2 = sigma1 * sigma1;
    json report;
    report["example"] = "ex1";
    report["p"] = p;
    report["sigma1"] = sigma1;
    report["quadrature"] = {{"l", ref.l}, {"m", ref.m}};
    report["checks"] = json::array();
    report["checks"].push_back(report_check("sigma3 / sigma1^2", mid.sigma_u(2) / s2,
                                            ref.sigma3_coeff, 1e-3));
    report["checks"].push_back(report_check("sigma2 / sigma1^2", mid.sigma_u(1) / s2,
                                            ref.sigma2_coeff, 1e-3));
    // Quadratic scaling sigma_u(2 s) = 4 sigma_u(s).
    report["checks"].push_back(report_check("sigma3 scaling (x2 -> x4)",
                                            result[2].sigma_u(2) / mid.sigma_u(2),
                                            4.0, 1e-2));
    std::cout << "computed sigma3/sigma1^2 = " << format_number(mid.sigma_u(2) / s2)
              << "  closed form -3*l*2^(1/p-1) = " << format_number(ref.sigma3_coeff)
              << "\ncomputed sigma2/sigma1^2 = " << format_number(mid.sigma_u(1) / s2)
              << "  closed form = " << format_number(ref.sigma2_coeff) << "\n";

    std::vector<std::vector<double>> rows;
    for (const auto& r : result)
        rows.push_back({r.sigma_s(0), r.sigma_u(1), r.sigma_u(2)});
    write_csv(out_path(g, "ex1_manifold.csv"), {"sigma1", "sigma2", "sigma3"}, rows);
    return finish_report(g, "ex1", report);
}

// ---- example ex2 -------------------------------------------------------------

int cmd_example_ex2(const GlobalOpts& g, double p, double sigma1) {
    Scenario sc = make_ex2(p);
    if (g.tol > 0.0) sc.fixed_point.tol = g.tol;
    QuadratureSpec spec = make_quadrature_spec(sc.system, sc.split, sc.tail_tol);
    Eigen::VectorXd sigma = Eigen::VectorXd::Zero(2);
    sigma(0) = sigma1;
    ManifoldResult res =
        solve_fixed_point(sigma, sc.system, sc.split, sc.field, spec, sc.fixed_point);
    if (!res.converged) throw NoContraction("ex2 fixed point did not converge");

    DecayReport decay = verify_unstable_decay(res, sc.split, 0.1);
    AttractionOptions aopts;
    AttractionReport attr = attraction_experiment(
        sc.system, sc.split, sc.field,
        Eigen::VectorXd(res.sigma_s + res.sigma_u), 1e-3, aopts);

    json report;
    report["example"] = "ex2";
    report["p"] = p;
    report["sigma1"] = sigma1;
    report["sigma2"] = res.sigma_u(1);
    report["fixed_point"] = {{"iterations", res.iterations},
                             {"final_delta", res.final_delta}};
    report["decay"] = {{"peak", decay.peak},
                       {"trailing_max", decay.trailing_max},
                       {"ratio", decay.ratio},
                       {"threshold", 0.1},
                       {"pass", decay.pass}};
    report["attraction"] = {{"on_manifold_min_ratio", attr.on_min_ratio},
                            {"perturbed_growth",
                             std::isfinite(attr.perturbed_growth)
                                 ? attr.perturbed_growth
                                 : 1e308},
                            {"perturbed_escaped", attr.perturbed_escaped},
                            {"pass", attr.pass}};
    std::cout << "trailing |pi_u x| ratio = " << format_number(decay.ratio)
              << " (threshold 0.1)\n"
              << "perturbation growth >= "
              << format_number(std::min(attr.perturbed_growth, 1e308)) << "x\n";

    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < attr.times.size(); ++k) {
        double on = k < attr.on_manifold.size() ? attr.on_manifold[k] : -1.0;
        double pe = k < attr.perturbed.size() ? attr.perturbed[k] : -1.0;
        rows.push_back({attr.times[k], on, pe});
    }
    write_csv(out_path(g, "ex2_attraction.csv"),
              {"t", "pi_u_norm_on_manifold", "pi_u_norm_perturbed"}, rows);
    return finish_report(g, "ex2", report);
}

// ---- example liu -------------------------------------------------------------

int cmd_example_liu(const GlobalOpts& g, double p, double extent, int grid_n) {
    Scenario sc = make_liu(p);
    if (g.tol > 0.0) sc.fixed_point.tol = g.tol;
    QuadratureSpec spec = make_quadrature_spec(sc.system, sc.split, sc.tail_tol);

    std::vector<double> axis(grid_n);
    for (int i = 0; i < grid_n; ++i)
        axis[i] = -extent + 2.0 * extent * i / (grid_n - 1);
    std::vector<Eigen::VectorXd> samples;
    for (double s1 : axis)
        for (double s3 : axis) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(3);
            v(0) = s1;
            v(2) = s3;
            samples.push_back(v);
        }
    auto result = manifold_map(sc.system, sc.split, sc.field, spec, samples,
                               sc.fixed_point, g.jobs);

    // Least-squares fit of sigma2 = l * sigma1 * sigma3 over the samples.
    double num = 0.0, den = 0.0;
    int failures = 0;
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<double>> zgrid(grid_n, std::vector<double>(grid_n, 0.0));
    for (int i = 0; i < grid_n; ++i)
        for (int j = 0; j < grid_n; ++j) {
            const auto& r = result[i * grid_n + j];
            if (!r.converged) {
                ++failures;
                continue;
            }
            const double s1 = r.sigma_s(0), s3 = r.sigma_s(2);
            const double s2 = r.sigma_u(1);
            zgrid[i][j] = s2;
            rows.push_back({s1, s3, s2});
            num += s2 * s1 * s3;
            den += s1 * s3 * s1 * s3;
        }
    if (failures > 0) std::cout << failures << " samples failed to converge\n";
    if (den == 0.0) throw NoContraction("liu fit degenerate: no usable samples");
    const double fitted = num / den;
    const double ref = liu_map_constant(p);

    json report;
    report["example"] = "liu";
    report["p"] = p;
    report["grid"] = {{"extent", extent}, {"n", grid_n}};
    report["failures"] = failures;
    report["checks"] = json::array();
    report["checks"].push_back(
        report_check("fitted l vs quadrature l", fitted, ref, 1e-3));
    if (p == 0.5) {
        report["prefactor"] = 10.0;   // 4 * (5/2)^{1/p-1}
        report["rate"] = 6.25;        // (5/2)^{1/p}
    }
    std::cout << "fitted l = " << format_number(fitted)
              << "  quadrature l = " << format_number(ref) << "\n";

    write_csv(out_path(g, "liu_manifold.csv"), {"sigma1", "sigma3", "sigma2"}, rows);
    write_svg_surface(out_path(g, "liu_surface.svg"), axis, axis, zgrid,
                      "Liu local stable manifold: sigma2 = h(sigma1, sigma3)");
    std::cout << "surface written to " << out_path(g, "liu_surface.svg") << "\n";
    return finish_report(g, "liu", report);
}

// ---- manifold (generic config) ------------------------------------------------

int cmd_manifold(const GlobalOpts& g) {
    if (g.config.empty()) throw ValidationError("manifold needs --config");
    ManifoldConfig cfg = parse_manifold_config(load_json_file(g.config));
    if (g.tol > 0.0) cfg.fixed_point.tol = g.tol;
    SpectralSplit split = build_split(cfg.system);
    QuadratureSpec spec = make_quadrature_spec(cfg.system, split, cfg.tail_tol);
    if (cfg.samples.empty())
        throw ValidationError("manifold config needs at least one sample");
    auto result = manifold_map(cfg.system, split, cfg.field, spec, cfg.samples,
                               cfg.fixed_point, g.jobs);

    json report;
    report["command"] = "manifold";
    report["p"] = cfg.p;
    report["samples"] = json::array();
    int failures = 0;
    for (const auto& r : result) {
        json s;
        s["sigma_s"] = std::vector<double>(r.sigma_s.data(),
                                           r.sigma_s.data() + r.sigma_s.size());
        s["converged"] = r.converged;
        if (r.converged) {
            s["sigma_u"] = std::vector<double>(r.sigma_u.data(),
                                               r.sigma_u.data() + r.sigma_u.size());
            s["iterations"] = r.iterations;
            s["final_delta"] = r.final_delta;
        } else {
            s["error"] = r.error;
            ++failures;
        }
        report["samples"].push_back(s);
    }
    report["failures"] = failures;

    std::vector<std::string> header{"sample"};
    const int n = cfg.system.dimension();
    for (int i = 0; i < n; ++i) header.push_back("sigma_s_" + std::to_string(i));
    for (int i = 0; i < n; ++i) header.push_back("sigma_u_" + std::to_string(i));
    write_csv(out_path(g, "manifold_samples.csv"), header, map_rows(result));
    write_json_file(out_path(g, "manifold_report.json"), report);
    std::cout << (failures == 0 ? "PASS" : "PARTIAL") << ": "
              << result.size() - failures << "/" << result.size()
              << " samples converged\n";
    return failures == 0 ? 0 : 1;
}

// ---- simulate -------------------------------------------------------------------

int cmd_simulate(const GlobalOpts& g) {
    if (g.config.empty()) throw ValidationError("simulate needs --config");
    SimulateConfig cfg = parse_simulate_config(load_json_file(g.config));
    SimConfig sim(FracOrder(cfg.p), cfg.step, cfg.horizon, cfg.initial);
    TrajectoryGrid traj;
    double escape = -1.0;
    try {
        traj = pece_integrate(sim, cfg.matrix, cfg.field);
    } catch (const StepOverflow& e) {
        std::cout << "trajectory escaped at t = " << format_number(e.escape_time)
                  << "\n";
        throw;
    }
    (void)escape;

    const int n = static_cast<int>(cfg.initial.size());
    std::vector<std::string> header{"t"};
    for (int i = 0; i < n; ++i) header.push_back("x" + std::to_string(i + 1));
    std::unique_ptr<JordanSystem> sys;
    bool compare = cfg.compare_linear;
    if (compare && !cfg.system) {
        try {
            sys = std::make_unique<JordanSystem>(
                JordanSystem::from_dense(FracOrder(cfg.p), cfg.matrix));
        } catch (const Error&) {
            compare = false;
        }
    }
    const JordanSystem* jsys = cfg.system ? cfg.system.get() : sys.get();
    if (compare && jsys) {
        for (int i = 0; i < n; ++i) header.push_back("exact_x" + std::to_string(i + 1));
    }
    std::vector<std::vector<double>> rows;
    double max_err = 0.0;
    for (int k = 0; k < traj.node_count(); ++k) {
        std::vector<double> row{k * traj.step};
        for (int i = 0; i < n; ++i) row.push_back(traj.values[k](i));
        if (compare && jsys) {
            Eigen::VectorXd exact =
                (matrix_ml_eval(*jsys, 1.0, k * traj.step) *
                 cfg.initial.cast<Complex>())
                    .real();
            for (int i = 0; i < n; ++i) row.push_back(exact(i));
            max_err = std::max(max_err,
                               (exact - traj.values[k]).cwiseAbs().maxCoeff());
        }
        rows.push_back(std::move(row));
    }
    write_csv(out_path(g, "trajectory.csv"), header, rows);
    if (compare && jsys)
        std::cout << "max |pece - exact linear| = " << format_number(max_err) << "\n";
    std::cout << "trajectory written to " << out_path(g, "trajectory.csv") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local stable manifolds of fractional-order systems"};
    app.require_subcommand(1);
    GlobalOpts g;
    app.add_option("--config", g.config, "JSON config file");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--jobs", g.jobs, "concurrent manifold samples");
    app.add_option("--tol", g.tol, "fixed-point tolerance override");

    auto* ml = app.add_subcommand("ml-eval", "evaluate a Mittag-Leffler function");
    double p = 0.5, beta = 1.0, zre = 0.0, zim = 0.0, t = 1.0;
    int q = 16, deriv = 0;
    ml->add_option("--p", p, "fractional order")->required();
    ml->add_option("--beta", beta, "second parameter");
    ml->add_option("--z-re", zre, "Re z")->required();
    ml->add_option("--z-im", zim, "Im z");
    ml->add_option("--q", q, "asymptotic truncation order");
    ml->add_option("--deriv", deriv, "lambda-derivative order m");
    ml->add_option("--t", t, "time for the derivative entry point");

    auto* ex = app.add_subcommand("example", "run a built-in example end to end");
    std::string name;
    double ex_p = 0.5, sigma1 = 0.01, extent = 0.1;
    int grid_n = 5;
    ex->add_option("name", name, "ex1, ex2 or liu")->required();
    ex->add_option("--p", ex_p, "fractional order (default 0.5)");
    ex->add_option("--sigma1", sigma1, "stable coordinate (ex1/ex2)");
    ex->add_option("--extent", extent, "sigma grid half-width (liu)");
    ex->add_option("--grid-n", grid_n, "sigma grid points per axis (liu)");

    auto* mf = app.add_subcommand("manifold", "manifold map from a config file");
    auto* sm = app.add_subcommand("simulate", "PECE simulation from a config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (ml->parsed()) return cmd_ml_eval(p, beta, zre, zim, q, deriv, t);
        if (ex->parsed()) {
            ensure_out(g);
            if (name == "ex1") return cmd_example_ex1(g, ex_p, sigma1);
            if (name == "ex2") return cmd_example_ex2(g, ex_p, sigma1);
            if (name == "liu") return cmd_example_liu(g, ex_p, extent, grid_n);
            throw ValidationError("unknown example '" + name + "'");
        }
        if (mf->parsed()) {
            ensure_out(g);
            return cmd_manifold(g);
        }
        if (sm->parsed()) {
            ensure_out(g);
            return cmd_simulate(g);
        }
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

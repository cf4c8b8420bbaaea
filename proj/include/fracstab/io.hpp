#ifndef FRACSTAB_IO_HPP
#define FRACSTAB_IO_HPP

#include <memory>
#include <string>
#include <vector>

#include "fracstab/manifold.hpp"
#include "json.hpp"

namespace fracstab {

using json = nlohmann::ordered_json;

// ---- config ingestion -----------------------------------------------------

struct ManifoldConfig {
    double p = 0.5;
    int q = 16;
    JordanSystem system;
    VectorField field;
    std::vector<Eigen::VectorXd> samples;
    FixedPointOptions fixed_point;
    double tail_tol = 1e-9;
};

struct SimulateConfig {
    double p = 0.5;
    Eigen::MatrixXd matrix;
    VectorField field;
    Eigen::VectorXd initial;
    double step = 5e-3;
    double horizon = 20.0;
    bool compare_linear = false;
    // Present when the system was given as Jordan data (enables the exact
    // linear comparison for any A).
    std::unique_ptr<JordanSystem> system;
};

json load_json_file(const std::string& path);
ManifoldConfig parse_manifold_config(const json& j);
SimulateConfig parse_simulate_config(const json& j);
// Field from a config node: {"kind": "zero"|"ex1"|"ex2"|"liu"|"polynomial"}.
VectorField parse_field(const json& j, int dim);
JordanSystem parse_system(const json& j, double p);

// ---- deterministic emitters -------------------------------------------------

// Fixed "%.12g" formatting; byte-identical output for identical inputs.
std::string format_number(double v);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
void write_json_file(const std::string& path, const json& j);

// Report entry carrying its tolerance and PASS/FAIL flag.
json report_check(const std::string& name, double value, double reference,
                  double rel_tolerance);
bool report_all_passed(const json& report);

// Self-contained SVG of the sampled surface sigma2 = h(sigma1, sigma3) drawn
// as a shaded quad mesh at a fixed camera (35 degree azimuth, 60 degree
// elevation, orthographic).
void write_svg_surface(const std::string& path, const std::vector<double>& xs,
                       const std::vector<double>& ys,
                       const std::vector<std::vector<double>>& z,
                       const std::string& title);

}  // namespace fracstab

#endif

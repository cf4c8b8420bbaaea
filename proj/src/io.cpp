#include "fracstab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fracstab/scenarios.hpp"

namespace fracstab {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError("config parse error: " + std::string(e.what()));
    }
    return j;
}

VectorField parse_field(const json& j, int dim) {
    const std::string kind = j.value("kind", "zero");
    double radius = j.value("radius", 0.5);
    if (kind == "zero") {
        return VectorField::create(
            dim, [dim](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(dim); },
            radius);
    }
    if (kind == "ex1" || kind == "ex2" || kind == "liu") {
        // Reuse the built-in scenario nonlinearities (dimension fixed).
        Scenario s = make_scenario(kind, 0.5);
        if (s.field.dim != dim)
            throw ValidationError("builtin field dimension mismatch");
        return s.field;
    }
    if (kind == "polynomial") {
        struct Term {
            int out;
            std::vector<int> vars;
            double coef;
        };
        std::vector<Term> terms;
        if (!j.contains("terms") || !j["terms"].is_array())
            throw ValidationError("polynomial field needs a terms array");
        for (const auto& t : j["terms"]) {
            Term term;
            term.out = t.at("out").get<int>();
            term.coef = t.at("coef").get<double>();
            for (const auto& v : t.at("vars")) term.vars.push_back(v.get<int>());
            if (term.out < 0 || term.out >= dim)
                throw ValidationError("polynomial term output index out of range");
            if (term.vars.empty())
                throw ValidationError("polynomial terms need at least one factor "
                                      "(the field must vanish at the origin)");
            for (int v : term.vars)
                if (v < 0 || v >= dim)
                    throw ValidationError("polynomial term variable index out of range");
            terms.push_back(std::move(term));
        }
        return VectorField::create(
            dim,
            [dim, terms](const Eigen::VectorXd& x) {
                Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
                for (const auto& t : terms) {
                    double v = t.coef;
                    for (int idx : t.vars) v *= x(idx);
                    out(t.out) += v;
                }
                return out;
            },
            radius);
    }
    throw ValidationError("unknown field kind '" + kind + "'");
}

JordanSystem parse_system(const json& j, double p) {
    FracOrder order(p);
    if (j.contains("matrix")) {
        const auto& rows = j["matrix"];
        const int n = static_cast<int>(rows.size());
        Eigen::MatrixXd a(n, n);
        for (int r = 0; r < n; ++r) {
            if (static_cast<int>(rows[r].size()) != n)
                throw ValidationError("matrix must be square");
            for (int c = 0; c < n; ++c) a(r, c) = rows[r][c].get<double>();
        }
        return JordanSystem::from_dense(order, a);
    }
    if (!j.contains("blocks"))
        throw ValidationError("system needs either 'blocks' or 'matrix'");
    std::vector<JordanBlock> blocks;
    for (const auto& b : j["blocks"]) {
        const auto& lam = b.at("lambda");
        Complex l;
        if (lam.is_array())
            l = Complex(lam.at(0).get<double>(), lam.at(1).get<double>());
        else
            l = Complex(lam.get<double>(), 0.0);
        int size = b.value("size", 1);
        blocks.push_back({l, size, classify_eigenvalue(l, order)});
    }
    Eigen::MatrixXcd transform;
    if (j.contains("transform")) {
        const auto& rows = j["transform"];
        const int n = static_cast<int>(rows.size());
        transform.resize(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                const auto& e = rows[r][c];
                if (e.is_array())
                    transform(r, c) =
                        Complex(e.at(0).get<double>(), e.at(1).get<double>());
                else
                    transform(r, c) = Complex(e.get<double>(), 0.0);
            }
    }
    // Reorder stable-first if needed by composing a permutation into P.
    bool ordered = true;
    bool seen_unstable = false;
    for (const auto& b : blocks) {
        if (b.klass == BlockClass::unstable)
            seen_unstable = true;
        else if (seen_unstable)
            ordered = false;
    }
    if (!ordered) {
        int dim = 0;
        for (const auto& b : blocks) dim += b.size;
        if (transform.size() == 0) transform = Eigen::MatrixXcd::Identity(dim, dim);
        std::vector<JordanBlock> reordered;
        std::vector<int> offsets;
        int off = 0;
        for (const auto& b : blocks) {
            offsets.push_back(off);
            off += b.size;
        }
        Eigen::MatrixXcd perm = Eigen::MatrixXcd::Zero(dim, dim);
        int col = 0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < blocks.size(); ++i) {
                bool stable = blocks[i].klass == BlockClass::stable;
                if ((pass == 0) != stable) continue;
                for (int k = 0; k < blocks[i].size; ++k)
                    perm(offsets[i] + k, col++) = 1.0;
                reordered.push_back(blocks[i]);
            }
        }
        blocks = std::move(reordered);
        transform = transform * perm;
    }
    return JordanSystem(order, std::move(blocks), std::move(transform));
}

ManifoldConfig parse_manifold_config(const json& j) {
    double p = j.value("p", 0.5);
    JordanSystem system = parse_system(j.at("system"), p);
    const int dim = system.dimension();
    VectorField field = j.contains("field")
                            ? parse_field(j["field"], dim)
                            : parse_field(json{{"kind", "zero"}}, dim);
    ManifoldConfig cfg{p,
                       j.value("q", 16),
                       std::move(system),
                       std::move(field),
                       {},
                       {},
                       j.value("tail_tol", 1e-9)};
    if (j.contains("samples")) {
        for (const auto& s : j["samples"]) {
            Eigen::VectorXd v(dim);
            if (static_cast<int>(s.size()) != dim)
                throw ValidationError("sample dimension mismatch");
            for (int i = 0; i < dim; ++i) v(i) = s[i].get<double>();
            cfg.samples.push_back(v);
        }
    }
    if (j.contains("grid")) {
        cfg.fixed_point.step = j["grid"].value("h", cfg.fixed_point.step);
        cfg.fixed_point.horizon = j["grid"].value("horizon", cfg.fixed_point.horizon);
    }
    if (j.contains("tolerances")) {
        cfg.fixed_point.tol =
            j["tolerances"].value("fixed_point", cfg.fixed_point.tol);
        cfg.tail_tol = j["tolerances"].value("tail", cfg.tail_tol);
    }
    cfg.fixed_point.max_iter = j.value("max_iter", cfg.fixed_point.max_iter);
    return cfg;
}

SimulateConfig parse_simulate_config(const json& j) {
    SimulateConfig cfg;
    cfg.p = j.value("p", 0.5);
    if (j.contains("system")) {
        cfg.system =
            std::make_unique<JordanSystem>(parse_system(j["system"], cfg.p));
        cfg.matrix = cfg.system->dense().real();
        if (!cfg.system->is_real())
            throw ValidationError("simulate needs a real system matrix");
    } else if (j.contains("matrix")) {
        const auto& rows = j["matrix"];
        const int n = static_cast<int>(rows.size());
        cfg.matrix.resize(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) cfg.matrix(r, c) = rows[r][c].get<double>();
    } else {
        throw ValidationError("simulate config needs 'system' or 'matrix'");
    }
    const int dim = static_cast<int>(cfg.matrix.rows());
    cfg.field = j.contains("field") ? parse_field(j["field"], dim)
                                    : parse_field(json{{"kind", "zero"}}, dim);
    if (!j.contains("initial"))
        throw ValidationError("simulate config needs 'initial'");
    cfg.initial.resize(dim);
    if (static_cast<int>(j["initial"].size()) != dim)
        throw ValidationError("initial condition dimension mismatch");
    for (int i = 0; i < dim; ++i) cfg.initial(i) = j["initial"][i].get<double>();
    cfg.step = j.value("h", cfg.step);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.compare_linear = j.value("compare_linear", false);
    return cfg;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_number(row[i]);
        out << "\n";
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << j.dump(2) << "\n";
}

json report_check(const std::string& name, double value, double reference,
                  double rel_tolerance) {
    double denom = std::max(std::abs(reference), 1e-300);
    double rel = std::abs(value - reference) / denom;
    json j;
    j["name"] = name;
    j["value"] = value;
    j["reference"] = reference;
    j["relative_error"] = rel;
    j["tolerance"] = rel_tolerance;
    j["pass"] = rel <= rel_tolerance;
    return j;
}

bool report_all_passed(const json& report) {
    bool ok = true;
    if (report.is_object()) {
        if (report.contains("pass") && report["pass"].is_boolean())
            ok = ok && report["pass"].get<bool>();
        for (const auto& [k, v] : report.items()) ok = ok && report_all_passed(v);
    } else if (report.is_array()) {
        for (const auto& v : report) ok = ok && report_all_passed(v);
    }
    return ok;
}

namespace {

struct Quad3 {
    double depth;
    double px[4];
    double py[4];
    double shade;  // 0..1
};

}  // namespace

void write_svg_surface(const std::string& path, const std::vector<double>& xs,
                       const std::vector<double>& ys,
                       const std::vector<std::vector<double>>& z,
                       const std::string& title) {
    const int nx = static_cast<int>(xs.size());
    const int ny = static_cast<int>(ys.size());
    if (nx < 2 || ny < 2) throw ValidationError("surface needs a 2x2 grid at least");
    double zmin = z[0][0], zmax = z[0][0];
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            zmin = std::min(zmin, z[i][j]);
            zmax = std::max(zmax, z[i][j]);
        }
    const double zspan = (zmax - zmin) > 0 ? (zmax - zmin) : 1.0;
    const double xspan = xs.back() - xs.front();
    const double yspan = ys.back() - ys.front();

    // Fixed orthographic camera: azimuth 35 deg, elevation 60 deg.
    const double az = 35.0 * M_PI / 180.0, el = 60.0 * M_PI / 180.0;
    const double ca = std::cos(az), sa = std::sin(az);
    const double ce = std::cos(el), se = std::sin(el);
    auto project = [&](double x, double y, double zz, double& px, double& py,
                       double& depth) {
        const double u = (x - xs.front()) / xspan - 0.5;
        const double v = (y - ys.front()) / yspan - 0.5;
        const double w = (zz - zmin) / zspan - 0.5;
        const double rx = u * ca - v * sa;
        const double ry = u * sa + v * ca;
        px = rx;
        py = ry * se - w * ce;
        depth = ry * ce + w * se;
    };

    std::vector<Quad3> quads;
    for (int i = 0; i + 1 < nx; ++i)
        for (int j = 0; j + 1 < ny; ++j) {
            Quad3 q;
            const int ii[4] = {i, i + 1, i + 1, i};
            const int jj[4] = {j, j, j + 1, j + 1};
            double depth = 0.0;
            double zsum = 0.0;
            for (int c = 0; c < 4; ++c) {
                double d;
                project(xs[ii[c]], ys[jj[c]], z[ii[c]][jj[c]], q.px[c], q.py[c], d);
                depth += d;
                zsum += z[ii[c]][jj[c]];
            }
            q.depth = depth / 4.0;
            q.shade = (zsum / 4.0 - zmin) / zspan;
            quads.push_back(q);
        }
    std::stable_sort(quads.begin(), quads.end(),
                     [](const Quad3& a, const Quad3& b) { return a.depth < b.depth; });

    const double W = 640.0, H = 520.0, margin = 60.0;
    double pxmin = 1e300, pxmax = -1e300, pymin = 1e300, pymax = -1e300;
    for (const auto& q : quads)
        for (int c = 0; c < 4; ++c) {
            pxmin = std::min(pxmin, q.px[c]);
            pxmax = std::max(pxmax, q.px[c]);
            pymin = std::min(pymin, q.py[c]);
            pymax = std::max(pymax, q.py[c]);
        }
    const double sxs = (W - 2 * margin) / std::max(pxmax - pxmin, 1e-12);
    const double sys = (H - 2 * margin) / std::max(pymax - pymin, 1e-12);
    const double s = std::min(sxs, sys);
    auto tx = [&](double px) { return margin + (px - pxmin) * s; };
    auto ty = [&](double py) { return H - margin - (py - pymin) * s; };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"520\" "
           "viewBox=\"0 0 640 520\">\n";
    out << "<rect width=\"640\" height=\"520\" fill=\"white\"/>\n";
    out << "<text x=\"320\" y=\"28\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << title << "</text>\n";
    for (const auto& q : quads) {
        // Two-hue shade: low z toward blue, high z toward orange.
        const int r = static_cast<int>(40 + 200 * q.shade);
        const int g = static_cast<int>(70 + 110 * q.shade);
        const int b = static_cast<int>(220 - 160 * q.shade);
        std::snprintf(buf, sizeof(buf),
                      "<polygon points=\"%.2f,%.2f %.2f,%.2f %.2f,%.2f %.2f,%.2f\" "
                      "fill=\"rgb(%d,%d,%d)\" stroke=\"rgb(40,40,40)\" "
                      "stroke-width=\"0.4\"/>\n",
                      tx(q.px[0]), ty(q.py[0]), tx(q.px[1]), ty(q.py[1]),
                      tx(q.px[2]), ty(q.py[2]), tx(q.px[3]), ty(q.py[3]), r, g, b);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.0f\" y=\"%.0f\" font-family=\"sans-serif\" "
                  "font-size=\"12\">range [%s, %s]</text>\n",
                  margin, H - 20.0, format_number(zmin).c_str(),
                  format_number(zmax).c_str());
    out << buf;
    out << "</svg>\n";
}

}  // namespace fracstab

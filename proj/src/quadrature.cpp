#include "fracstab/quadrature.hpp"

#include <cmath>
#include <limits>

namespace fracstab {

GaussLegendre::GaussLegendre(int n) {
    if (n < 1) throw ValidationError("Gauss-Legendre order must be >= 1");
    nodes.resize(n);
    weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = -p1 / pp;
            z += dz;
            if (std::abs(dz) < std::numeric_limits<double>::epsilon()) break;
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

PanelWeights product_trapezoid_weights(double p, double h, int d) {
    if (d < 1) throw ValidationError("panel index must be >= 1");
    const double dd = static_cast<double>(d);
    // d^p - (d-1)^p without cancellation for large d.
    double diff_p, diff_p1;
    if (d == 1) {
        diff_p = 1.0;
        diff_p1 = 1.0;
    } else {
        diff_p = -std::pow(dd, p) * std::expm1(p * std::log1p(-1.0 / dd));
        diff_p1 = -std::pow(dd, p + 1.0) * std::expm1((p + 1.0) * std::log1p(-1.0 / dd));
    }
    const double P0 = diff_p / p;
    const double P1 = dd * diff_p / p - diff_p1 / (p + 1.0);
    const double hp = std::pow(h, p);
    return {hp * (P0 - P1), hp * P1};
}

double exp_poly_tail(int m, double alpha, double T) {
    if (!(alpha > 0.0)) return std::numeric_limits<double>::infinity();
    // Gamma(m+1, x) = m! e^{-x} sum_{j=0}^{m} x^j/j!
    double x = alpha * T;
    double fact = 1.0;
    double sum = 0.0;
    double xp = 1.0;
    double jfact = 1.0;
    for (int j = 0; j <= m; ++j) {
        if (j > 0) {
            xp *= x;
            jfact *= j;
        }
        sum += xp / jfact;
    }
    for (int j = 2; j <= m; ++j) fact *= j;
    return fact * std::exp(-x) * sum / std::pow(alpha, m + 1);
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa,
                     double b, double fb, double m, double fm, double whole,
                     double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    return adaptive_step(f, a, fa, b, fb, m, fm, simpson(a, fa, b, fb, fm), tol,
                         max_depth);
}

double adaptive_improper(const std::function<double(double)>& f, double tol,
                         double initial, double limit) {
    double a = 0.0, b = initial;
    double total = 0.0;
    while (a < limit) {
        double piece = adaptive_simpson(f, a, b, tol * 0.25);
        total += piece;
        if (a > 0.0 && std::abs(piece) < tol * (1.0 + std::abs(total))) break;
        a = b;
        b = 2.0 * b;
    }
    return total;
}

}  // namespace fracstab

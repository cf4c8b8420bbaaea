#ifndef FRACSTAB_QUADRATURE_HPP
#define FRACSTAB_QUADRATURE_HPP

#include <functional>
#include <vector>

#include "fracstab/types.hpp"

namespace fracstab {

// Gauss-Legendre rule on [-1, 1], nodes by Newton iteration on the
// Legendre recurrence.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
    explicit GaussLegendre(int n);

    template <typename F>
    double integrate(double a, double b, F&& f) const {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            s += weights[i] * f(mid + half * nodes[i]);
        return half * s;
    }
};

// Exact moments of the weakly singular kernel over one panel:
//   P0 = int_0^1 (d - s)^{p-1} ds,   P1 = int_0^1 (d - s)^{p-1} s ds
// for d >= 1 in units of the step. Product-trapezoid weights for a linear
// interpolant on panel [t - d h, t - (d-1) h] are then
//   w_left = h^p (P0 - P1),  w_right = h^p P1.
struct PanelWeights {
    double left;
    double right;
};
PanelWeights product_trapezoid_weights(double p, double h, int d);

// int_T^inf tau^m e^{-alpha tau} dtau = Gamma(m+1, alpha T)/alpha^{m+1},
// m integer >= 0.
double exp_poly_tail(int m, double alpha, double T);

// Adaptive Simpson with recursion-depth cap; used for the closed-form
// reference constants printed by the CLI.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48);

// Improper integral over [0, inf) of an exponentially decaying integrand:
// adaptive Simpson over doubling intervals until the added piece is below tol.
double adaptive_improper(const std::function<double(double)>& f, double tol,
                         double initial = 1.0, double limit = 1e6);

}  // namespace fracstab

#endif

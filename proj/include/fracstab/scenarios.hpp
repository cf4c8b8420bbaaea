#ifndef FRACSTAB_SCENARIOS_HPP
#define FRACSTAB_SCENARIOS_HPP

#include "fracstab/fode_sim.hpp"
#include "fracstab/manifold.hpp"

namespace fracstab {

// The three built-in example systems. Each bundles the Jordan data, the
// nonlinearity, grid defaults tuned for the fixed-point iteration, and the
// closed-form map constants evaluated by adaptive quadrature for the
// report comparison.
struct Scenario {
    std::string name;
    JordanSystem system;
    SpectralSplit split;
    VectorField field;
    FixedPointOptions fixed_point;
    double tail_tol = 1e-9;
};

// x' = (-1, [2 1; 0 2]) block system, f = (0, x1^2, 3 x1^2).
Scenario make_ex1(double p);
// A = diag(-2, 2), f = (x1^2, x1^2 + x2^2).
Scenario make_ex2(double p);
// Liu linearization A = diag(-1, 2.5, -5), f = (0, -4 x1 x3, 0).
Scenario make_liu(double p);

Scenario make_scenario(const std::string& name, double p);

// Closed-form manifold map constants, evaluated by adaptive quadrature of
// the defining improper integrals (independent of the fixed-point path).
// ex1: sigma3 = -3 l sigma1^2 2^{1/p-1},
//      sigma2 = -l sigma1^2 2^{1/p-1} + (3/p) m sigma1^2 2^{1/p-2}.
struct Ex1Constants {
    double l;
    double m;
    double sigma3_coeff;  // sigma3 / sigma1^2
    double sigma2_coeff;  // sigma2 / sigma1^2
};
Ex1Constants ex1_map_constants(double p, double tol = 1e-10);

// liu: sigma2 = l sigma1 sigma3.
double liu_map_constant(double p, double tol = 1e-10);

}  // namespace fracstab

#endif

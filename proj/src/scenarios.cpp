#include "fracstab/scenarios.hpp"

#include <cmath>

namespace fracstab {

namespace {

Scenario finish(std::string name, JordanSystem system, VectorField field,
                double horizon, double step, double tail_tol) {
    SpectralSplit split = build_split(system);
    FixedPointOptions opts;
    opts.step = step;
    opts.horizon = horizon;
    return Scenario{std::move(name), std::move(system), std::move(split),
                    std::move(field), opts, tail_tol};
}

}  // namespace

Scenario make_ex1(double p) {
    FracOrder order(p);
    std::vector<JordanBlock> blocks = {
        {Complex(-1.0, 0.0), 1, BlockClass::stable},
        {Complex(2.0, 0.0), 2, BlockClass::unstable},
    };
    JordanSystem system(order, blocks, Eigen::MatrixXcd());
    VectorField f = VectorField::create(
        3,
        [](const Eigen::VectorXd& x) {
            Eigen::VectorXd out(3);
            out << 0.0, x(0) * x(0), 3.0 * x(0) * x(0);
            return out;
        },
        0.5);
    // Horizon keeps the tail certificate while the E_p(2 t^p)-sized
    // cancellation noise stays below the fixed-point tolerance.
    return finish("ex1", std::move(system), std::move(f), 6.5, 1.0 / 2048.0, 1e-9);
}

Scenario make_ex2(double p) {
    FracOrder order(p);
    JordanSystem system =
        JordanSystem::diagonal(order, {Complex(-2.0, 0.0), Complex(2.0, 0.0)});
    VectorField f = VectorField::create(
        2,
        [](const Eigen::VectorXd& x) {
            Eigen::VectorXd out(2);
            out << x(0) * x(0), x(0) * x(0) + x(1) * x(1);
            return out;
        },
        0.5);
    // The unstable projection of the fixed point decays ~ t^{-2p}; the
    // horizon is long enough for the trailing quarter to sit well under the
    // 0.1 x peak decay threshold.
    return finish("ex2", std::move(system), std::move(f), 13.0, 1.0 / 2048.0, 1e-9);
}

Scenario make_liu(double p) {
    FracOrder order(p);
    JordanSystem system = JordanSystem::diagonal(
        order, {Complex(-1.0, 0.0), Complex(2.5, 0.0), Complex(-5.0, 0.0)});
    VectorField f = VectorField::create(
        3,
        [](const Eigen::VectorXd& x) {
            Eigen::VectorXd out(3);
            out << 0.0, -4.0 * x(0) * x(2), 0.0;
            return out;
        },
        0.5);
    return finish("liu", std::move(system), std::move(f), 3.5, 1.0 / 2048.0, 1e-9);
}

Scenario make_scenario(const std::string& name, double p) {
    if (name == "ex1") return make_ex1(p);
    if (name == "ex2") return make_ex2(p);
    if (name == "liu") return make_liu(p);
    throw ValidationError("unknown example '" + name + "' (want ex1, ex2 or liu)");
}

namespace {

// E_p(-u) on u >= 0 through the library evaluator, u-substituted so the
// integrands below are smooth at the origin (tau = u^{1/p}).
double ml_neg(double p, double u) {
    MLParams prm(FracOrder(p), 1.0);
    return ml_eval(prm, Complex(-u, 0.0)).real();
}

}  // namespace

Ex1Constants ex1_map_constants(double p, double tol) {
    const double rate = std::pow(2.0, 1.0 / p);
    // l = int_0^inf e^{-tau 2^{1/p}} E_p^2(-tau^p) dtau, tau = u^{1/p}.
    auto l_integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double tau = std::pow(u, 1.0 / p);
        const double e = ml_neg(p, u);
        return std::exp(-rate * tau) * e * e * std::pow(u, 1.0 / p - 1.0) / p;
    };
    auto m_integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double tau = std::pow(u, 1.0 / p);
        const double e = ml_neg(p, u);
        return std::exp(-rate * tau) * (tau * rate - 1.0 + p) * e * e *
               std::pow(u, 1.0 / p - 1.0) / p;
    };
    Ex1Constants c{};
    c.l = adaptive_improper(l_integrand, tol);
    c.m = adaptive_improper(m_integrand, tol);
    const double pref = std::pow(2.0, 1.0 / p - 1.0);
    c.sigma3_coeff = -3.0 * c.l * pref;
    c.sigma2_coeff = -c.l * pref + 3.0 / p * c.m * std::pow(2.0, 1.0 / p - 2.0);
    return c;
}

double liu_map_constant(double p, double tol) {
    const double rate = std::pow(2.5, 1.0 / p);
    auto integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double tau = std::pow(u, 1.0 / p);
        return std::exp(-rate * tau) * ml_neg(p, u) * ml_neg(p, 5.0 * u) *
               std::pow(u, 1.0 / p - 1.0) / p;
    };
    return 4.0 * std::pow(2.5, 1.0 / p - 1.0) * adaptive_improper(integrand, tol);
}

}  // namespace fracstab

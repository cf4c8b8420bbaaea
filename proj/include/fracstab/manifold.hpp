#ifndef FRACSTAB_MANIFOLD_HPP
#define FRACSTAB_MANIFOLD_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fracstab/quadrature.hpp"
#include "fracstab/spectral.hpp"

namespace fracstab {

// Candidate solution sampled on a uniform time grid.
struct TrajectoryGrid {
    double step = 0.0;
    std::vector<Eigen::VectorXd> values;  // x_k ~ x(k h), k = 0..K

    int node_count() const { return static_cast<int>(values.size()); }
    int segments() const { return node_count() - 1; }
    double horizon() const { return step * segments(); }
    double sup_norm() const;
    // Linear interpolation; zero beyond the horizon (tail extension model).
    Eigen::VectorXd at(double t) const;
    void validate() const;  // uniform grid, K >= 16, finite values
};

// The nonlinearity f with a sampled Lipschitz estimate on a ball.
struct VectorField {
    int dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
    double lipschitz_radius = 0.0;
    double lipschitz_estimate = 0.0;  // eps_r, max sampled quotient

    // Validates f(0) = 0 and estimates eps_r from 1000 seeded sample pairs.
    static VectorField create(int dim,
                              std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn,
                              double radius, std::uint64_t seed = 20240901);
};

struct QuadratureSpec {
    double tail_cut = 0.0;   // T_cut for the improper tail integral
    double tol = 1e-10;      // certified tail truncation tolerance
    int gl_points = 8;       // Gauss-Legendre nodes per tail panel
    // Singular kernel: product trapezoid; tail: composite Gauss-Legendre.
};

// Envelope-certified tail cut: the B-tilde envelope
// sum_m p^{-(m+1)} M t^{m+1} e^{-t alpha} integrated past T_cut stays
// below tol (per unit sup-norm of g). Throws TailNotDecaying when no
// T_cut <= 1e4 certifies.
QuadratureSpec make_quadrature_spec(const JordanSystem& system,
                                    const SpectralSplit& split, double tol = 1e-10);

struct FixedPointOptions {
    double step = 1.0 / 2048.0;
    double horizon = 0.0;  // <= 0: use spec.tail_cut
    int max_iter = 50;
    double tol = 1e-8;     // sup-norm update tolerance
};

struct ManifoldResult {
    Eigen::VectorXd sigma_s;
    Eigen::VectorXd sigma_u;  // pi_u x(0)
    TrajectoryGrid trajectory;
    // Nodes within the certified horizon: past it, the shifted tail
    // integral no longer covers a full tail_cut of the zero-extended f, so
    // those trailing values carry the declared truncation bias.
    int certified_nodes = 0;
    int iterations = 0;
    double final_delta = 0.0;
    bool converged = false;
    std::vector<double> update_history;
};

// sigma* = int_0^{T_cut} (p/tau) B_tilde(-tau) pi_u g(tau) dtau with the
// tau -> 0 limit analytic; g is a callable on [0, tail_cut].
Eigen::VectorXd tail_integral(const JordanSystem& system, const SpectralSplit& split,
                              const std::function<Eigen::VectorXd(double)>& g,
                              const QuadratureSpec& spec);

// int_0^t (t-tau)^{p-1} E_{p,beta}((t-tau)^p A) g(tau) dtau by product
// integration of the singular factor against a linear interpolant of the
// sampled g; t must be a grid node of g.
Eigen::VectorXd singular_convolution(const JordanSystem& system, double beta,
                                     double t, const TrajectoryGrid& g,
                                     const QuadratureSpec& spec);

// One application of the operator T_sigma to the sampled trajectory.
TrajectoryGrid apply_T_sigma(const Eigen::VectorXd& sigma_s, const TrajectoryGrid& x,
                             const JordanSystem& system, const SpectralSplit& split,
                             const VectorField& f, const QuadratureSpec& spec);

// Picard iteration from x0(t) = E_p(t^p A) sigma to the fixed point.
ManifoldResult solve_fixed_point(const Eigen::VectorXd& sigma_s,
                                 const JordanSystem& system,
                                 const SpectralSplit& split, const VectorField& f,
                                 const QuadratureSpec& spec,
                                 const FixedPointOptions& opts = {});

struct MapSample {
    Eigen::VectorXd sigma_s;
    Eigen::VectorXd sigma_u;
    bool converged = false;
    int iterations = 0;
    double final_delta = 0.0;
    std::string error;  // per-sample failure, empty on success
};

// Sampled graph of the manifold map h: E^s -> E^u. Per-sample failures are
// reported in the result list, not fatal to the batch.
std::vector<MapSample> manifold_map(const JordanSystem& system,
                                    const SpectralSplit& split, const VectorField& f,
                                    const QuadratureSpec& spec,
                                    const std::vector<Eigen::VectorXd>& samples,
                                    const FixedPointOptions& opts = {}, int jobs = 1);

struct DecayReport {
    double peak = 0.0;          // max_k |pi_u x(t_k)|
    double trailing_max = 0.0;  // max over the last quarter of the grid
    double ratio = 0.0;
    double trend_slope = 0.0;   // log-log fit over the trailing half
    bool pass = false;
};

DecayReport verify_unstable_decay(const ManifoldResult& result,
                                  const SpectralSplit& split,
                                  double fraction = 0.1);

// Least-squares slope of log|y| vs log x (shared by tests and reports).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fracstab

#endif

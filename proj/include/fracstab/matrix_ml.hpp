#ifndef FRACSTAB_MATRIX_ML_HPP
#define FRACSTAB_MATRIX_ML_HPP

#include <Eigen/Dense>
#include <vector>

#include "fracstab/mittag_leffler.hpp"
#include "fracstab/types.hpp"

namespace fracstab {

enum class BlockClass { stable, unstable };

struct JordanBlock {
    Complex lambda;
    int size = 1;
    BlockClass klass = BlockClass::stable;
};

// Matignon sector test; throws NonHyperbolic on the boundary.
BlockClass classify_eigenvalue(Complex lambda, const FracOrder& p);

// The matrix A as explicit Jordan data: A = P * blockdiag(J_j) * P^{-1},
// stable blocks first. Jordan structure is an input, not computed: numerical
// Jordan forms are ill-posed. from_dense accepts only diagonalizable matrices
// with well-separated eigenvalues.
class JordanSystem {
  public:
    JordanSystem(FracOrder p, std::vector<JordanBlock> blocks,
                 Eigen::MatrixXcd transform);

    static JordanSystem diagonal(FracOrder p, const std::vector<Complex>& eigs);
    // Diagonalizable dense input; rejects eigenvalue gaps below 1e-6.
    static JordanSystem from_dense(FracOrder p, const Eigen::MatrixXd& a);

    const FracOrder& order() const { return p_; }
    double p() const { return p_.value(); }
    const std::vector<JordanBlock>& blocks() const { return blocks_; }
    int stable_count() const { return stable_count_; }
    int dimension() const { return dim_; }
    const Eigen::MatrixXcd& transform() const { return transform_; }
    const Eigen::MatrixXcd& transform_inverse() const { return transform_inv_; }
    bool has_identity_transform() const { return identity_transform_; }
    // A reconstructed in the original basis.
    Eigen::MatrixXcd dense() const;
    bool is_real() const;  // reconstructed A real within tolerance
    // min over unstable lambda of Re(lambda^{1/p}); +inf when all stable.
    double tail_decay_rate() const;
    double max_growth_rate() const;  // max over unstable Re(lambda^{1/p})
    int max_block_size() const;

  private:
    FracOrder p_;
    std::vector<JordanBlock> blocks_;
    int stable_count_ = 0;
    int dim_ = 0;
    Eigen::MatrixXcd transform_, transform_inv_;
    bool identity_transform_ = true;
};

// Psi-tilde_m(t, lambda) = (1/m!) d^{m+1}/dlambda^{m+1} exp(t lambda^{1/p});
// unstable-sector lambda only.
Complex psi_tilde(const FracOrder& p, double t, Complex lambda, int m);

// Psi_m(t, lambda) = (1/(m! p)) d^m/dlambda^m exp(t lambda^{1/p}).
Complex psi(const FracOrder& p, double t, Complex lambda, int m);

// (p/tau) * Psi-tilde_m(-tau, lambda), with the tau -> 0 limit taken
// analytically (the 1/tau cancels against the leading power of the closed
// form); finite at tau = 0, value -lambda^{1/p - 1} for m = 0.
Complex scaled_psi_tilde_neg(const FracOrder& p, double tau, Complex lambda, int m);

// Delta-tilde_m(t, lambda): the m-th lambda-derivative (times 1/m!) of the
// truncated algebraic tail of E_{p,p}(t^p lambda).
Complex delta_tilde(const FracOrder& p, double t, Complex lambda, int m, int q);

// Block-diagonal matrices in the Jordan basis. Stable blocks of B and
// B-tilde are zero; every block is upper-triangular Toeplitz.
Eigen::MatrixXcd build_B_tilde(const JordanSystem& system, double t);
Eigen::MatrixXcd build_C_tilde(const JordanSystem& system, double t, int q);
Eigen::MatrixXcd build_B(const JordanSystem& system, double t);

// (p/tau) * B_tilde(-tau) in the Jordan basis, finite at tau = 0.
Eigen::MatrixXcd scaled_B_tilde_neg(const JordanSystem& system, double tau);

struct MatrixEvalOptions {
    int q = 16;                   // asymptotic truncation for large arguments
    double series_tol = 1e-15;
    double switch_radius = 0.0;   // <= 0: default_switch_radius(p)
};

// E_{p,beta}(t^p A) = P blockdiag(f(J_j)) P^{-1}; entries of f(J_j) are
// (1/m!) d^m/dlambda^m E_{p,beta}(t^p lambda_j).
Eigen::MatrixXcd matrix_ml_eval(const JordanSystem& system, double beta, double t,
                                const MatrixEvalOptions& opts = {});

// E_{p,p}(t^p J) - t^{-p} B_tilde(t) in the Jordan basis: the exact C-tilde.
// In the asymptotic regime the exponential part cancels by construction and
// the numeric subtraction (which would lose the algebraic remainder under
// the exp(t Re lambda^{1/p}) scale) is never formed.
Eigen::MatrixXcd residual_C(const JordanSystem& system, double t,
                            const MatrixEvalOptions& opts = {});

// Max-norm of (t - tau) B(t) B_tilde(-tau) - (-tau/p) B_tilde(t - tau).
double lemma6_residual(const JordanSystem& system, double t, double tau);

inline double max_norm(const Eigen::MatrixXcd& m) {
    return m.cwiseAbs().maxCoeff();
}

}  // namespace fracstab

#endif

#include "fracstab/matrix_ml.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace fracstab {

BlockClass classify_eigenvalue(Complex lambda, const FracOrder& p) {
    if (lambda == Complex(0.0, 0.0))
        throw ValidationError("eigenvalue must be nonzero (hyperbolicity)");
    require_finite(lambda, "eigenvalue");
    const double boundary = 0.5 * p.value() * M_PI;
    const double a = std::abs(std::arg(lambda));
    if (std::abs(a - boundary) <= 1e-12)
        throw NonHyperbolic("eigenvalue on the sector boundary |arg| = p*pi/2");
    return a > boundary ? BlockClass::stable : BlockClass::unstable;
}

JordanSystem::JordanSystem(FracOrder p, std::vector<JordanBlock> blocks,
                           Eigen::MatrixXcd transform)
    : p_(p), blocks_(std::move(blocks)), transform_(std::move(transform)) {
    p_.require_fractional();
    if (blocks_.empty()) throw ValidationError("system needs at least one block");
    for (auto& b : blocks_) {
        if (b.size < 1) throw ValidationError("block size must be >= 1");
        BlockClass c = classify_eigenvalue(b.lambda, p_);
        if (c != b.klass)
            throw ValidationError("block class inconsistent with the Matignon sector");
        dim_ += b.size;
    }
    bool seen_unstable = false;
    for (const auto& b : blocks_) {
        if (b.klass == BlockClass::unstable) {
            seen_unstable = true;
        } else {
            if (seen_unstable)
                throw ValidationError("stable blocks must precede unstable blocks");
            ++stable_count_;
        }
    }
    if (transform_.size() == 0)
        transform_ = Eigen::MatrixXcd::Identity(dim_, dim_);
    if (transform_.rows() != dim_ || transform_.cols() != dim_)
        throw ValidationError("transform dimension mismatch");
    identity_transform_ = transform_.isIdentity(0.0);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(transform_);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0))
        throw ValidationError("transform is numerically singular");
    transform_inv_ = transform_.inverse();
}

JordanSystem JordanSystem::diagonal(FracOrder p, const std::vector<Complex>& eigs) {
    std::vector<JordanBlock> stable, unstable;
    std::vector<int> order_stable, order_unstable;
    for (int i = 0; i < static_cast<int>(eigs.size()); ++i) {
        BlockClass c = classify_eigenvalue(eigs[i], p);
        if (c == BlockClass::stable) {
            stable.push_back({eigs[i], 1, c});
            order_stable.push_back(i);
        } else {
            unstable.push_back({eigs[i], 1, c});
            order_unstable.push_back(i);
        }
    }
    std::vector<JordanBlock> blocks = stable;
    blocks.insert(blocks.end(), unstable.begin(), unstable.end());
    const int n = static_cast<int>(eigs.size());
    // Permutation mapping Jordan coordinates (stable first) to input order.
    Eigen::MatrixXcd perm = Eigen::MatrixXcd::Zero(n, n);
    int col = 0;
    for (int i : order_stable) perm(i, col++) = 1.0;
    for (int i : order_unstable) perm(i, col++) = 1.0;
    return JordanSystem(p, std::move(blocks), std::move(perm));
}

JordanSystem JordanSystem::from_dense(FracOrder p, const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw ValidationError("matrix must be square");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a.cast<Complex>());
    if (es.info() != Eigen::Success)
        throw ValidationError("eigendecomposition failed");
    const auto& eigs = es.eigenvalues();
    const int n = static_cast<int>(a.rows());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(eigs(i) - eigs(j)) <= 1e-6)
                throw ValidationError(
                    "eigenvalue gap below 1e-6: supply explicit Jordan data");
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
        bool si = classify_eigenvalue(eigs(i), p) == BlockClass::stable;
        bool sj = classify_eigenvalue(eigs(j), p) == BlockClass::stable;
        return si && !sj;
    });
    std::vector<JordanBlock> blocks;
    Eigen::MatrixXcd pm(n, n);
    for (int c = 0; c < n; ++c) {
        blocks.push_back({eigs(idx[c]), 1, classify_eigenvalue(eigs(idx[c]), p)});
        pm.col(c) = es.eigenvectors().col(idx[c]);
    }
    return JordanSystem(p, std::move(blocks), std::move(pm));
}

Eigen::MatrixXcd JordanSystem::dense() const {
    Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(dim_, dim_);
    int off = 0;
    for (const auto& b : blocks_) {
        for (int i = 0; i < b.size; ++i) {
            j(off + i, off + i) = b.lambda;
            if (i + 1 < b.size) j(off + i, off + i + 1) = 1.0;
        }
        off += b.size;
    }
    return transform_ * j * transform_inv_;
}

bool JordanSystem::is_real() const {
    Eigen::MatrixXcd a = dense();
    double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return a.imag().cwiseAbs().maxCoeff() <= 1e-10 * scale;
}

double JordanSystem::tail_decay_rate() const {
    double alpha = std::numeric_limits<double>::infinity();
    for (const auto& b : blocks_)
        if (b.klass == BlockClass::unstable)
            alpha = std::min(alpha, std::pow(b.lambda, 1.0 / p()).real());
    return alpha;
}

double JordanSystem::max_growth_rate() const {
    double g = 0.0;
    for (const auto& b : blocks_)
        if (b.klass == BlockClass::unstable)
            g = std::max(g, std::pow(b.lambda, 1.0 / p()).real());
    return g;
}

int JordanSystem::max_block_size() const {
    int n = 1;
    for (const auto& b : blocks_) n = std::max(n, b.size);
    return n;
}

namespace {

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

// exp_root_derivative coefficients c_{m,i}, i = 1..m.
std::vector<double> exp_deriv_coeffs(double p, int m) {
    std::vector<double> c(m + 1, 0.0), next(m + 1, 0.0);
    const double pinv = 1.0 / p;
    c[1] = pinv;
    for (int mm = 1; mm < m; ++mm) {
        for (int i = 1; i <= mm + 1; ++i) {
            double v = 0.0;
            if (i <= mm) v += c[i] * (i * pinv - mm);
            if (i >= 2) v += c[i - 1] * pinv;
            next[i] = v;
        }
        for (int i = 1; i <= mm + 1; ++i) c[i] = next[i];
    }
    return c;
}

using RowFn = std::function<Complex(const JordanBlock&, int)>;

// Assemble blockdiag of upper-triangular Toeplitz blocks from first rows.
Eigen::MatrixXcd assemble(const JordanSystem& system, const RowFn& entry) {
    const int n = system.dimension();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    int off = 0;
    for (const auto& b : system.blocks()) {
        std::vector<Complex> row(b.size);
        for (int m = 0; m < b.size; ++m) row[m] = entry(b, m);
        for (int i = 0; i < b.size; ++i)
            for (int j = i; j < b.size; ++j) out(off + i, off + j) = row[j - i];
        off += b.size;
    }
    return out;
}

}  // namespace

Complex psi_tilde(const FracOrder& p, double t, Complex lambda, int m) {
    if (classify_eigenvalue(lambda, p) != BlockClass::unstable)
        throw SectorError("psi_tilde requires an unstable-sector eigenvalue");
    return exp_root_derivative(p, t, lambda, m + 1) / factorial(m);
}

Complex psi(const FracOrder& p, double t, Complex lambda, int m) {
    if (classify_eigenvalue(lambda, p) != BlockClass::unstable)
        throw SectorError("psi requires an unstable-sector eigenvalue");
    return exp_root_derivative(p, t, lambda, m) / (factorial(m) * p.value());
}

Complex scaled_psi_tilde_neg(const FracOrder& p, double tau, Complex lambda, int m) {
    if (classify_eigenvalue(lambda, p) != BlockClass::unstable)
        throw SectorError("scaled_psi_tilde_neg requires an unstable eigenvalue");
    if (tau < 0.0) throw ValidationError("tau must be >= 0");
    const double pv = p.value();
    const double pinv = 1.0 / pv;
    auto c = exp_deriv_coeffs(pv, m + 1);
    Complex e = std::exp(-tau * std::pow(lambda, pinv));
    // (p/tau) (1/m!) sum_i c_{m+1,i} (-tau)^i lambda^{i/p-m-1} e
    // with one power of tau cancelled analytically.
    Complex sum = 0.0;
    double tpow = 1.0;  // tau^{i-1}
    double sign = -1.0;  // (-1)^i
    for (int i = 1; i <= m + 1; ++i) {
        sum += sign * c[i] * tpow * std::pow(lambda, i * pinv - (m + 1));
        tpow *= tau;
        sign = -sign;
    }
    return pv / factorial(m) * sum * e;
}

Complex delta_tilde(const FracOrder& p, double t, Complex lambda, int m, int q) {
    if (!(t > 0.0)) throw ValidationError("delta_tilde requires t > 0");
    if (q < 2) throw ValidationError("delta_tilde requires q >= 2");
    return detail::ml_algebraic_tail(p.value(), p.value(), t, lambda, m, q);
}

Eigen::MatrixXcd build_B_tilde(const JordanSystem& system, double t) {
    if (t == 0.0) throw ValidationError("build_B_tilde requires t != 0");
    return assemble(system, [&](const JordanBlock& b, int m) -> Complex {
        if (b.klass == BlockClass::stable) return {0.0, 0.0};
        return psi_tilde(system.order(), t, b.lambda, m);
    });
}

Eigen::MatrixXcd build_C_tilde(const JordanSystem& system, double t, int q) {
    if (!(t > 0.0)) throw ValidationError("build_C_tilde requires t > 0");
    return assemble(system, [&](const JordanBlock& b, int m) -> Complex {
        return delta_tilde(system.order(), t, b.lambda, m, q);
    });
}

Eigen::MatrixXcd build_B(const JordanSystem& system, double t) {
    if (t == 0.0) throw ValidationError("build_B requires t != 0");
    return assemble(system, [&](const JordanBlock& b, int m) -> Complex {
        if (b.klass == BlockClass::stable) return {0.0, 0.0};
        return psi(system.order(), t, b.lambda, m);
    });
}

Eigen::MatrixXcd scaled_B_tilde_neg(const JordanSystem& system, double tau) {
    return assemble(system, [&](const JordanBlock& b, int m) -> Complex {
        if (b.klass == BlockClass::stable) return {0.0, 0.0};
        return scaled_psi_tilde_neg(system.order(), tau, b.lambda, m);
    });
}

namespace {

MLParams eval_params(const JordanSystem& system, double beta,
                     const MatrixEvalOptions& opts) {
    double radius = opts.switch_radius > 0.0
                        ? opts.switch_radius
                        : default_switch_radius(system.p());
    return MLParams(system.order(), beta, opts.q, opts.series_tol, radius);
}

}  // namespace

Eigen::MatrixXcd matrix_ml_eval(const JordanSystem& system, double beta, double t,
                                const MatrixEvalOptions& opts) {
    if (t < 0.0) throw ValidationError("matrix_ml_eval requires t >= 0");
    MLParams prm = eval_params(system, beta, opts);
    Eigen::MatrixXcd j = assemble(system, [&](const JordanBlock& b, int m) {
        return ml_beta_derivative(prm, t, b.lambda, m);
    });
    if (system.has_identity_transform()) return j;
    return system.transform() * j * system.transform_inverse();
}

Eigen::MatrixXcd residual_C(const JordanSystem& system, double t,
                            const MatrixEvalOptions& opts) {
    if (!(t > 0.0)) throw ValidationError("residual_C requires t > 0");
    const double p = system.p();
    MLParams prm = eval_params(system, p, opts);
    const double tmp = std::pow(t, -p);
    return assemble(system, [&](const JordanBlock& b, int m) -> Complex {
        const bool series = std::abs(std::pow(t, p) * b.lambda) <= prm.switch_radius;
        if (series) {
            Complex e = detail::ml_series_derivative(prm, t, b.lambda, m);
            if (b.klass == BlockClass::unstable)
                e -= tmp * psi_tilde(system.order(), t, b.lambda, m);
            return e;
        }
        // Asymptotic regime: E = t^{-p} Psi-tilde + algebraic tail, with the
        // Psi-tilde part shared with build_B_tilde, so the difference is the
        // tail itself.
        return detail::ml_algebraic_tail(p, p, t, b.lambda, m, prm.q);
    });
}

double lemma6_residual(const JordanSystem& system, double t, double tau) {
    if (!(t > 0.0) || !(tau > 0.0))
        throw ValidationError("lemma6_residual requires t, tau > 0");
    if (t == tau) throw ValidationError("lemma6_residual requires t != tau");
    Eigen::MatrixXcd lhs =
        (t - tau) * (build_B(system, t) * build_B_tilde(system, -tau));
    Eigen::MatrixXcd rhs = (-tau / system.p()) * build_B_tilde(system, t - tau);
    return max_norm(lhs - rhs);
}

}  // namespace fracstab

#include "fracstab/manifold.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace fracstab {

double TrajectoryGrid::sup_norm() const {
    double s = 0.0;
    for (const auto& v : values) s = std::max(s, v.cwiseAbs().maxCoeff());
    return s;
}

Eigen::VectorXd TrajectoryGrid::at(double t) const {
    const int n = static_cast<int>(values.front().size());
    if (t < 0.0) throw ValidationError("trajectory time must be >= 0");
    if (t >= horizon()) {
        if (t <= horizon() * (1.0 + 1e-12)) return values.back();
        return Eigen::VectorXd::Zero(n);
    }
    const double s = t / step;
    const int j = std::min(static_cast<int>(s), segments() - 1);
    const double w = s - j;
    return (1.0 - w) * values[j] + w * values[j + 1];
}

void TrajectoryGrid::validate() const {
    if (!(step > 0.0)) throw ValidationError("grid step must be positive");
    if (segments() < 16) throw ValidationError("grid needs at least K = 16 segments");
    for (const auto& v : values)
        if (!v.allFinite()) throw ValidationError("grid values must be finite");
}

VectorField VectorField::create(
    int dim, std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn,
    double radius, std::uint64_t seed) {
    if (dim < 1) throw ValidationError("field dimension must be >= 1");
    if (!(radius > 0.0)) throw ValidationError("lipschitz radius must be positive");
    VectorField f;
    f.dim = dim;
    f.eval = std::move(fn);
    f.lipschitz_radius = radius;
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
    if (f.eval(zero).cwiseAbs().maxCoeff() > 1e-14)
        throw ValidationError("vector field must vanish at the origin");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto sample_ball = [&]() {
        Eigen::VectorXd v(dim);
        do {
            for (int i = 0; i < dim; ++i) v(i) = u(rng);
        } while (v.norm() > 1.0);
        return Eigen::VectorXd(radius * v);
    };
    double eps = 0.0;
    for (int k = 0; k < 1000; ++k) {
        Eigen::VectorXd x = sample_ball(), y = sample_ball();
        double d = (x - y).norm();
        if (d < 1e-12) continue;
        eps = std::max(eps, (f.eval(x) - f.eval(y)).norm() / d);
    }
    f.lipschitz_estimate = eps;
    return f;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(std::abs(y[i]) > 0.0)) continue;
        double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

// Coefficient magnitudes of the exp_root_derivative closed form, for the
// tail envelope bound.
std::vector<double> abs_exp_deriv_coeffs(double p, int m) {
    std::vector<double> c(m + 1, 0.0), next(m + 1, 0.0);
    const double pinv = 1.0 / p;
    c[1] = pinv;
    for (int mm = 1; mm < m; ++mm) {
        for (int i = 1; i <= mm + 1; ++i) {
            double v = 0.0;
            if (i <= mm) v += std::abs(c[i] * (i * pinv - mm));
            if (i >= 2) v += std::abs(c[i - 1] * pinv);
            next[i] = v;
        }
        for (int i = 1; i <= mm + 1; ++i) c[i] = next[i];
    }
    for (auto& v : c) v = std::abs(v);
    return c;
}

}  // namespace

QuadratureSpec make_quadrature_spec(const JordanSystem& system,
                                    const SpectralSplit& split, double tol) {
    if (!(tol > 0.0)) throw ValidationError("tail tolerance must be positive");
    QuadratureSpec spec;
    spec.tol = tol;
    if (split.unstable_dim == 0) {
        spec.tail_cut = 1.0;  // kernel identically zero
        return spec;
    }
    const double p = system.p();
    const double alpha = split.alpha;
    auto bound_past = [&](double T) {
        double b = 0.0;
        for (const auto& blk : system.blocks()) {
            if (blk.klass != BlockClass::unstable) continue;
            const double alam = std::abs(blk.lambda);
            for (int m = 0; m < blk.size; ++m) {
                auto c = abs_exp_deriv_coeffs(p, m + 1);
                for (int i = 1; i <= m + 1; ++i) {
                    double coef = p / factorial(m) * c[i] *
                                  std::pow(alam, i / p - (m + 1));
                    b += coef * exp_poly_tail(i - 1, alpha, T);
                }
            }
        }
        return b;
    };
    double T = 1.0;
    while (T <= 1e4) {
        if (bound_past(T) <= tol) {
            spec.tail_cut = T;
            return spec;
        }
        T *= 1.25;
    }
    throw TailNotDecaying("tail envelope cannot certify the tolerance by T = 1e4");
}

namespace {

// ---------------------------------------------------------------------------
// Jordan-basis evaluation engine.
//
// The operator is applied in the bounded form obtained from Lemma 6:
//   E_p(t^p A) sigma* + int_0^t (t-s)^{p-1} E_{p,p}((t-s)^p A) g(s) ds
//     = C(t) sigma*                                 (algebraic part of E_p)
//     + int_0^t (t-s)^{p-1} Cres(t-s) g(s) ds       (kernel minus its B part)
//     + (1/p) int_0^{T-t} Ktail(s) g(t+s) ds        (shifted tail integral)
// with Ktail(s) = (p/s) B~(-s). Every term is bounded in t, so no
// exp(t Re lambda^{1/p})-sized intermediates ever cancel numerically.
// ---------------------------------------------------------------------------

struct BlockInfo {
    int offset;
    int size;
    bool unstable;
    Complex lambda;
};

using Rows = std::vector<Complex>;  // flat first rows, block by block

class Engine {
  public:
    Engine(const JordanSystem& system, const QuadratureSpec& spec, double h,
           double horizon)
        : system_(system), spec_(spec), h_(h), n_(system.dimension()) {
        build(horizon);
    }

    int nodes() const { return K_ + 1; }
    double step() const { return h_; }
    double horizon() const { return h_ * K_; }
    double order_p() const { return system_.p(); }
    int certified_nodes() const {
        int margin = static_cast<int>(std::ceil(spec_.tail_cut / h_));
        return std::max((K_ + 1) / 2, K_ + 1 - margin);
    }

    Eigen::VectorXcd to_jordan(const Eigen::VectorXd& x) const {
        if (identity_) return x.cast<Complex>();
        return pinv_ * x.cast<Complex>();
    }
    Eigen::VectorXd from_jordan(const Eigen::VectorXcd& y) const {
        if (identity_) return y.real();
        return (pmat_ * y).real();
    }

    void apply_rows(const Rows& rows, const Eigen::VectorXcd& v,
                    Eigen::VectorXcd& w) const {
        w.setZero();
        int flat = 0;
        for (const auto& b : blocks_) {
            for (int i = 0; i < b.size; ++i) {
                Complex acc = 0.0;
                for (int j = i; j < b.size; ++j)
                    acc += rows[flat + (j - i)] * v(b.offset + j);
                w(b.offset + i) = acc;
            }
            flat += b.size;
        }
    }

    void add_scaled_rows(const Rows& rows, const Eigen::VectorXcd& v, double scale,
                         Eigen::VectorXcd& acc) const {
        int flat = 0;
        for (const auto& b : blocks_) {
            for (int i = 0; i < b.size; ++i) {
                Complex s = 0.0;
                for (int j = i; j < b.size; ++j)
                    s += rows[flat + (j - i)] * v(b.offset + j);
                acc(b.offset + i) += scale * s;
            }
            flat += b.size;
        }
    }

    const Rows& e1(int k) const { return e1_[k]; }
    const Rows& c1(int k) const { return c1_[k]; }

    // Convolution with the Cres-substituted kernel at every grid node.
    void convolution(const std::vector<Eigen::VectorXcd>& g,
                     std::vector<Eigen::VectorXcd>& out) const {
        for (int k = 0; k <= K_; ++k) out[k].setZero();
        for (int k = 1; k <= K_; ++k) {
            auto& acc = out[k];
            for (int d = 1; d < k; ++d)
                add_scaled_rows(kconv_[d], g[k - d], wfull_[d], acc);
            add_scaled_rows(kconv_[0], g[k], wr_[1], acc);
            add_scaled_rows(kconv_[k], g[0], wl_[k], acc);
        }
    }

    // sigma* = int_0^T Ktail(s) g(s) ds from the precomputed panel maps.
    Eigen::VectorXcd tail_sigma(const std::vector<Eigen::VectorXcd>& g) const {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(n_);
        for (int j = 0; j < K_; ++j) {
            add_scaled_rows(tail_left_[j], g[j], 1.0, acc);
            add_scaled_rows(tail_right_[j], g[j + 1], 1.0, acc);
        }
        return acc;
    }

    // int_0^{T - t_k} Ktail(s) g(t_k + s) ds for every k, by reusing the
    // panel maps with shifted samples (g is zero past the horizon).
    void tail_shift(const std::vector<Eigen::VectorXcd>& g,
                    std::vector<Eigen::VectorXcd>& out) const {
        for (int k = 0; k <= K_; ++k) {
            out[k].setZero();
            for (int j = 0; k + j < K_; ++j) {
                add_scaled_rows(tail_left_[j], g[k + j], 1.0, out[k]);
                add_scaled_rows(tail_right_[j], g[k + j + 1], 1.0, out[k]);
            }
        }
    }

    bool real_system() const { return real_; }
    const std::vector<BlockInfo>& blocks() const { return blocks_; }

    Eigen::VectorXcd mask_unstable(const Eigen::VectorXcd& y) const {
        Eigen::VectorXcd r = Eigen::VectorXcd::Zero(n_);
        for (const auto& b : blocks_)
            if (b.unstable)
                r.segment(b.offset, b.size) = y.segment(b.offset, b.size);
        return r;
    }

  private:
    void build(double horizon);

    const JordanSystem& system_;
    QuadratureSpec spec_;
    double h_;
    int n_;
    int K_ = 0;
    bool identity_ = true;
    bool real_ = true;
    Eigen::MatrixXcd pmat_, pinv_;
    std::vector<BlockInfo> blocks_;
    std::vector<Rows> e1_;     // E_p(t_k^p J)
    std::vector<Rows> c1_;     // algebraic part of E_p on unstable blocks
    std::vector<Rows> kconv_;  // E_{p,p} minus its exponential part
    std::vector<double> wl_, wr_, wfull_;
    std::vector<Rows> tail_left_, tail_right_;
};

void Engine::build(double horizon) {
    if (!(h_ > 0.0)) throw ValidationError("grid step must be positive");
    if (!(horizon > 0.0)) throw ValidationError("grid horizon must be positive");
    K_ = std::max(16, static_cast<int>(std::ceil(horizon / h_ - 1e-9)));
    identity_ = system_.has_identity_transform();
    real_ = system_.is_real();
    pmat_ = system_.transform();
    pinv_ = system_.transform_inverse();
    int off = 0;
    for (const auto& b : system_.blocks()) {
        blocks_.push_back({off, b.size, b.klass == BlockClass::unstable, b.lambda});
        off += b.size;
    }
    const double p = system_.p();
    const double radius = default_switch_radius(p);
    // The exponential-free kernels subtract exp-sized values in the series
    // regime, so their branch switch sits where the subtraction noise
    // eps * exp(|z|^{1/p}) meets the optimally truncated asymptotics.
    const double radius_res = std::min(radius, std::pow(17.6, p));
    const int q = 24;
    MLParams prm1(system_.order(), 1.0, q, 1e-15, radius);
    MLParams prmp(system_.order(), p, q, 1e-15, radius);

    e1_.resize(K_ + 1);
    c1_.resize(K_ + 1);
    kconv_.resize(K_ + 1);
    for (int k = 0; k <= K_; ++k) {
        const double t = k * h_;
        Rows r1, rc1, rcv;
        for (const auto& b : blocks_) {
            const bool series =
                t == 0.0 || std::abs(std::pow(t, p) * b.lambda) <= radius_res;
            for (int m = 0; m < b.size; ++m) {
                Complex e1v = ml_beta_derivative(prm1, t, b.lambda, m);
                r1.push_back(e1v);
                if (!b.unstable) {
                    // Stable blocks carry no exponential part: the plain
                    // evaluations are already bounded.
                    rc1.push_back(0.0);
                    rcv.push_back(ml_beta_derivative(prmp, t, b.lambda, m));
                    continue;
                }
                if (series) {
                    Complex psi1 =
                        t == 0.0
                            ? (m == 0 ? Complex(1.0 / p, 0.0) : Complex(0.0, 0.0))
                            : exp_root_derivative(system_.order(), t, b.lambda, m) /
                                  (factorial(m) * p);
                    rc1.push_back(e1v - psi1);
                    Complex eppv = detail::ml_series_derivative(prmp, t, b.lambda, m);
                    Complex bt =
                        t == 0.0
                            ? Complex(0.0, 0.0)
                            : std::pow(t, -p) *
                                  exp_root_derivative(system_.order(), t, b.lambda,
                                                      m + 1) /
                                  factorial(m);
                    rcv.push_back(eppv - bt);
                } else {
                    rc1.push_back(
                        detail::ml_algebraic_tail(p, 1.0, t, b.lambda, m, q));
                    rcv.push_back(
                        detail::ml_algebraic_tail(p, p, t, b.lambda, m, q));
                }
            }
        }
        e1_[k] = std::move(r1);
        c1_[k] = std::move(rc1);
        kconv_[k] = std::move(rcv);
    }

    // The operator kernel is (t - tau)^{p-1} E_{p,p}(...) with no 1/Gamma(p)
    // prefactor (unlike the ABM corrector, which owns one).
    wl_.assign(K_ + 2, 0.0);
    wr_.assign(K_ + 2, 0.0);
    wfull_.assign(K_ + 2, 0.0);
    for (int d = 1; d <= K_ + 1; ++d) {
        PanelWeights w = product_trapezoid_weights(p, h_, d);
        wl_[d] = w.left;
        wr_[d] = w.right;
    }
    for (int d = 1; d <= K_; ++d) wfull_[d] = wl_[d] + wr_[d + 1];

    // Tail panel maps: int over panel of Ktail(s) times the hat functions.
    GaussLegendre gl(spec_.gl_points);
    int rowlen = 0;
    for (const auto& b : blocks_) rowlen += b.size;
    tail_left_.assign(K_, Rows(rowlen, Complex(0, 0)));
    tail_right_.assign(K_, Rows(rowlen, Complex(0, 0)));
    for (int j = 0; j < K_; ++j) {
        const double a = j * h_, b2 = (j + 1) * h_;
        const double mid = 0.5 * (a + b2), half = 0.5 * (b2 - a);
        for (std::size_t gq = 0; gq < gl.nodes.size(); ++gq) {
            const double tau = mid + half * gl.nodes[gq];
            const double wq = half * gl.weights[gq];
            const double hat_r = (tau - a) / h_;
            const double hat_l = 1.0 - hat_r;
            int flat = 0;
            for (const auto& blk : blocks_) {
                for (int m = 0; m < blk.size; ++m) {
                    if (blk.unstable) {
                        Complex kv = scaled_psi_tilde_neg(system_.order(), tau,
                                                          blk.lambda, m);
                        tail_left_[j][flat + m] += wq * hat_l * kv;
                        tail_right_[j][flat + m] += wq * hat_r * kv;
                    }
                }
                flat += blk.size;
            }
        }
    }
}

struct IterationState {
    std::vector<Eigen::VectorXcd> y;
    std::vector<Eigen::VectorXcd> g;
    std::vector<Eigen::VectorXcd> conv;
    std::vector<Eigen::VectorXcd> shift;
    Eigen::VectorXcd sigma_star;
};

// One sweep of T_sigma in Jordan coordinates; sigma_j = P^{-1} sigma_s.
void sweep(const Engine& eng, const VectorField& f, const Eigen::VectorXcd& sigma_j,
           IterationState& st) {
    const int nodes = static_cast<int>(st.y.size());
    const double pinv = 1.0 / eng.order_p();
    for (int k = 0; k < nodes; ++k) {
        Eigen::VectorXd xk = eng.from_jordan(st.y[k]);
        st.g[k] = eng.to_jordan(f.eval(xk));
    }
    st.sigma_star = eng.mask_unstable(eng.tail_sigma(st.g));
    eng.convolution(st.g, st.conv);
    eng.tail_shift(st.g, st.shift);
    Eigen::VectorXcd tmp(sigma_j.size());
    for (int k = 0; k < nodes; ++k) {
        eng.apply_rows(eng.e1(k), sigma_j, tmp);
        st.y[k] = tmp + st.conv[k];
        eng.add_scaled_rows(eng.c1(k), st.sigma_star, 1.0, st.y[k]);
        st.y[k] += pinv * st.shift[k];
    }
}

void require_stable_sigma(const SpectralSplit& split, const Eigen::VectorXd& sigma) {
    double resid = (split.pi_u_real() * sigma).cwiseAbs().maxCoeff();
    if (resid > 1e-10 * (1.0 + sigma.cwiseAbs().maxCoeff()))
        throw ValidationError("sigma must lie in the stable subspace (pi_u sigma = 0)");
}

ManifoldResult solve_with_engine(const Engine& eng, const Eigen::VectorXd& sigma_s,
                                 const JordanSystem& system,
                                 const SpectralSplit& split, const VectorField& f,
                                 const FixedPointOptions& opts) {
    require_stable_sigma(split, sigma_s);
    if (static_cast<int>(sigma_s.size()) != system.dimension())
        throw ValidationError("sigma dimension mismatch");
    const int nodes = eng.nodes();
    const int n = system.dimension();
    IterationState st;
    st.y.assign(nodes, Eigen::VectorXcd::Zero(n));
    st.g.assign(nodes, Eigen::VectorXcd::Zero(n));
    st.conv.assign(nodes, Eigen::VectorXcd::Zero(n));
    st.shift.assign(nodes, Eigen::VectorXcd::Zero(n));
    st.sigma_star = Eigen::VectorXcd::Zero(n);

    Eigen::VectorXcd sigma_j = eng.to_jordan(sigma_s);
    Eigen::VectorXcd tmp(n);
    for (int k = 0; k < nodes; ++k) {
        eng.apply_rows(eng.e1(k), sigma_j, tmp);
        st.y[k] = tmp;
    }

    ManifoldResult res;
    res.sigma_s = sigma_s;
    const double trust = 1e3 * f.lipschitz_radius;
    std::vector<Eigen::VectorXcd> prev = st.y;
    int bad_ratio_streak = 0;
    double prev_delta = -1.0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        sweep(eng, f, sigma_j, st);
        double delta = 0.0, amp = 0.0;
        for (int k = 0; k < nodes; ++k) {
            delta = std::max(delta, (st.y[k] - prev[k]).cwiseAbs().maxCoeff());
            amp = std::max(amp, st.y[k].cwiseAbs().maxCoeff());
        }
        if (!std::isfinite(amp) || amp > trust)
            throw DivergedTrajectory("trajectory left the trust region during iteration");
        res.update_history.push_back(delta);
        res.iterations = it;
        res.final_delta = delta;
        if (delta < opts.tol) {
            res.converged = true;
            break;
        }
        if (prev_delta > 0.0) {
            bad_ratio_streak = (delta / prev_delta > 0.95) ? bad_ratio_streak + 1 : 0;
            if (bad_ratio_streak >= 3)
                throw NoContraction("sup-norm updates are not contracting");
        }
        prev_delta = delta;
        prev = st.y;
    }

    res.trajectory.step = eng.step();
    res.trajectory.values.resize(nodes);
    for (int k = 0; k < nodes; ++k)
        res.trajectory.values[k] = eng.from_jordan(st.y[k]);
    res.certified_nodes = eng.certified_nodes();
    res.sigma_u = eng.from_jordan(eng.mask_unstable(st.sigma_star));
    return res;
}

}  // namespace

Eigen::VectorXd tail_integral(const JordanSystem& system, const SpectralSplit& split,
                              const std::function<Eigen::VectorXd(double)>& g,
                              const QuadratureSpec& spec) {
    if (!(spec.tail_cut > 0.0)) throw ValidationError("tail_cut must be positive");
    const int n = system.dimension();
    if (split.unstable_dim == 0) return Eigen::VectorXd::Zero(n);
    GaussLegendre gl(std::max(spec.gl_points, 12));
    const double width = std::min(0.25, spec.tail_cut);
    const int panels = static_cast<int>(std::ceil(spec.tail_cut / width));
    // Geometric refinement toward tau = 0: trajectories carry a tau^p kink
    // there, so the first uniform panel is split into shrinking subpanels.
    std::vector<std::pair<double, double>> segs;
    {
        const double first = spec.tail_cut / panels;
        double lo = 0.0, hi = first * std::pow(2.0, -40);
        for (int j = 0; j <= 40; ++j) {
            segs.emplace_back(lo, hi);
            lo = hi;
            hi = std::min(first, hi * 2.0);
        }
        for (int j = 1; j < panels; ++j)
            segs.emplace_back(j * spec.tail_cut / panels,
                              (j + 1) * spec.tail_cut / panels);
    }
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(n);
    const bool identity = system.has_identity_transform();
    const auto& pinv = system.transform_inverse();
    Eigen::VectorXcd w(n);
    for (const auto& [a, b] : segs) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            const double tau = mid + half * gl.nodes[q];
            const double wq = half * gl.weights[q];
            Eigen::VectorXcd v = g(tau).cast<Complex>();
            if (!identity) v = pinv * v;
            // Kernel rows vanish on stable blocks, so pi_u is implicit.
            w.setZero();
            int off = 0;
            for (const auto& blk : system.blocks()) {
                if (blk.klass == BlockClass::unstable) {
                    for (int i = 0; i < blk.size; ++i) {
                        Complex accv = 0.0;
                        for (int m = 0; m + i < blk.size; ++m)
                            accv += scaled_psi_tilde_neg(system.order(), tau,
                                                         blk.lambda, m) *
                                    v(off + i + m);
                        w(off + i) = accv;
                    }
                }
                off += blk.size;
            }
            acc += wq * w;
        }
    }
    Eigen::VectorXcd out = identity ? acc : Eigen::VectorXcd(system.transform() * acc);
    return out.real();
}

Eigen::VectorXd singular_convolution(const JordanSystem& system, double beta,
                                     double t, const TrajectoryGrid& g,
                                     const QuadratureSpec& spec) {
    (void)spec;
    g.validate();
    if (t < 0.0 || t > g.horizon() * (1.0 + 1e-12))
        throw ValidationError("t must lie within the sampled horizon");
    const double h = g.step;
    const int k = static_cast<int>(std::llround(t / h));
    if (std::abs(k * h - t) > 1e-9 * std::max(1.0, t))
        throw ValidationError("t must be a node of the sampled grid");
    const int n = system.dimension();
    if (k == 0) return Eigen::VectorXd::Zero(n);
    MatrixEvalOptions opts;
    const double p = system.p();
    std::vector<Eigen::MatrixXcd> kernel(k + 1);
    for (int d = 0; d <= k; ++d)
        kernel[d] = matrix_ml_eval(system, beta, d * h, opts);
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(n);
    for (int j = 0; j < k; ++j) {
        const int d = k - j;
        PanelWeights w = product_trapezoid_weights(p, h, d);
        acc += w.left * (kernel[d] * g.values[j].cast<Complex>());
        acc += w.right * (kernel[d - 1] * g.values[j + 1].cast<Complex>());
    }
    return acc.real();
}

TrajectoryGrid apply_T_sigma(const Eigen::VectorXd& sigma_s, const TrajectoryGrid& x,
                             const JordanSystem& system, const SpectralSplit& split,
                             const VectorField& f, const QuadratureSpec& spec) {
    x.validate();
    require_stable_sigma(split, sigma_s);
    Engine eng(system, spec, x.step, x.horizon());
    if (eng.nodes() != x.node_count())
        throw ValidationError("grid node count mismatch");
    IterationState st;
    const int n = system.dimension();
    st.y.resize(x.node_count());
    for (int k = 0; k < x.node_count(); ++k) st.y[k] = eng.to_jordan(x.values[k]);
    st.g.assign(x.node_count(), Eigen::VectorXcd::Zero(n));
    st.conv.assign(x.node_count(), Eigen::VectorXcd::Zero(n));
    st.shift.assign(x.node_count(), Eigen::VectorXcd::Zero(n));
    Eigen::VectorXcd sigma_j = eng.to_jordan(sigma_s);
    sweep(eng, f, sigma_j, st);
    TrajectoryGrid out;
    out.step = x.step;
    out.values.resize(x.node_count());
    const double trust = 1e3 * f.lipschitz_radius;
    for (int k = 0; k < x.node_count(); ++k) {
        out.values[k] = eng.from_jordan(st.y[k]);
        if (!out.values[k].allFinite() ||
            out.values[k].cwiseAbs().maxCoeff() > trust)
            throw DivergedTrajectory("T_sigma output left the trust region");
    }
    return out;
}

ManifoldResult solve_fixed_point(const Eigen::VectorXd& sigma_s,
                                 const JordanSystem& system,
                                 const SpectralSplit& split, const VectorField& f,
                                 const QuadratureSpec& spec,
                                 const FixedPointOptions& opts) {
    double horizon = opts.horizon > 0.0 ? opts.horizon : spec.tail_cut;
    Engine eng(system, spec, opts.step, horizon);
    return solve_with_engine(eng, sigma_s, system, split, f, opts);
}

std::vector<MapSample> manifold_map(const JordanSystem& system,
                                    const SpectralSplit& split, const VectorField& f,
                                    const QuadratureSpec& spec,
                                    const std::vector<Eigen::VectorXd>& samples,
                                    const FixedPointOptions& opts, int jobs) {
    double horizon = opts.horizon > 0.0 ? opts.horizon : spec.tail_cut;
    Engine eng(system, spec, opts.step, horizon);
    std::vector<MapSample> out(samples.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= samples.size()) return;
            MapSample& s = out[i];
            s.sigma_s = samples[i];
            try {
                if (samples[i].norm() > f.lipschitz_radius)
                    throw ValidationError("sample outside the Lipschitz radius");
                ManifoldResult r =
                    solve_with_engine(eng, samples[i], system, split, f, opts);
                s.sigma_u = r.sigma_u;
                s.converged = r.converged;
                s.iterations = r.iterations;
                s.final_delta = r.final_delta;
                if (!r.converged) s.error = "did not converge within max_iter";
            } catch (const Error& e) {
                s.error = e.what();
                s.converged = false;
            }
        }
    };
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

DecayReport verify_unstable_decay(const ManifoldResult& result,
                                  const SpectralSplit& split, double fraction) {
    const auto& traj = result.trajectory;
    if (traj.values.empty()) throw ValidationError("empty trajectory");
    Eigen::MatrixXd pu = split.pi_u_real();
    // Judge decay on the certified sub-horizon only.
    const int nodes = (result.certified_nodes > 16 &&
                       result.certified_nodes <= traj.node_count())
                          ? result.certified_nodes
                          : traj.node_count();
    std::vector<double> norms(nodes), times(nodes);
    for (int k = 0; k < nodes; ++k) {
        norms[k] = (pu * traj.values[k]).cwiseAbs().maxCoeff();
        times[k] = k * traj.step;
    }
    DecayReport rep;
    rep.peak = *std::max_element(norms.begin(), norms.end());
    const int tail_start = nodes - std::max(1, nodes / 4);
    rep.trailing_max = *std::max_element(norms.begin() + tail_start, norms.end());
    rep.ratio = rep.peak > 0.0 ? rep.trailing_max / rep.peak : 0.0;
    std::vector<double> tx(times.begin() + nodes / 2, times.end());
    std::vector<double> ty(norms.begin() + nodes / 2, norms.end());
    rep.trend_slope = loglog_slope(tx, ty);
    rep.pass = rep.peak == 0.0 || rep.ratio < fraction;
    return rep;
}

}  // namespace fracstab

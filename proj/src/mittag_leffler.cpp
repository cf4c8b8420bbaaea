#include "fracstab/mittag_leffler.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#if defined(FRACSTAB_HAVE_QUADMATH)
#include <quadmath.h>
#endif

namespace fracstab {

namespace {

#if defined(FRACSTAB_HAVE_QUADMATH)
// Wide accumulator for the power series. The partial sums reach
// exp(|z|^{1/p}) while the result can be algebraically small, so the series
// needs far more headroom than double to stay usable near the switch radius.
using wide = __float128;
inline wide wide_tgamma(wide x) { return tgammaq(x); }
inline double to_double(wide x) { return static_cast<double>(x); }
#else
using wide = long double;
inline wide wide_tgamma(wide x) { return tgammal(x); }
inline double to_double(wide x) { return static_cast<double>(x); }
#endif

struct WideComplex {
    wide re = 0, im = 0;
    WideComplex() = default;
    WideComplex(wide r, wide i) : re(r), im(i) {}
    explicit WideComplex(const Complex& z) : re(z.real()), im(z.imag()) {}
    WideComplex operator*(const WideComplex& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
    WideComplex operator*(wide s) const { return {re * s, im * s}; }
    WideComplex& operator+=(const WideComplex& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    wide abs1() const {
        wide a = re < 0 ? -re : re;
        wide b = im < 0 ? -im : im;
        return a + b;
    }
    Complex value() const { return {to_double(re), to_double(im)}; }
};

// Reciprocal-gamma tables 1/Gamma(p k + beta), k = 0..term cap. tgammaq is
// far too slow to sit inside the series loops; the evaluators hit the same
// (p, beta) pair thousands of times per kernel build.
const std::vector<wide>& rgamma_table(double p, double beta) {
    static std::mutex mu;
    static std::map<std::pair<double, double>, std::unique_ptr<std::vector<wide>>>
        cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{p, beta}];
    if (!slot) {
        slot = std::make_unique<std::vector<wide>>();
        slot->reserve(MLParams::kSeriesTermCap + 9);
        for (int k = 0; k <= MLParams::kSeriesTermCap + 8; ++k) {
            wide arg = static_cast<wide>(p) * k + static_cast<wide>(beta);
            // Gamma overflows past ~1755 in quad; the reciprocal is then 0.
            slot->push_back(arg < wide(1754) ? wide(1) / wide_tgamma(arg)
                                             : wide(0));
        }
    }
    return *slot;
}

// sin(pi x) with exact zeros at integers.
double sinpi(double x) {
    double n = std::round(x);
    double r = x - n;
    if (r == 0.0) return 0.0;
    double s = std::sin(M_PI * r);
    return (std::fmod(std::abs(n), 2.0) == 1.0) ? -s : s;
}

// Lanczos g=7, n=9 (Godfrey coefficients).
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

// log Gamma(z) for Re(z) >= 0.5.
Complex lanczos_lgamma(Complex z) {
    Complex x = kLanczos[0];
    Complex zm1 = z - 1.0;
    for (int i = 1; i < 9; ++i) x += kLanczos[i] / (zm1 + static_cast<double>(i));
    Complex t = zm1 + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * M_PI) + (zm1 + 0.5) * std::log(t) - t +
           std::log(x);
}

double rgamma_real(double x) {
    if (x == std::round(x)) {
        if (x <= 0.0) return 0.0;  // pole of Gamma: reciprocal vanishes
        if (x <= 171.0) return 1.0 / std::tgamma(x);
        return 0.0;  // Gamma overflows; reciprocal underflows
    }
    if (x > 0.5) {
        if (x > 170.0) return std::exp(-std::lgamma(x));
        return 1.0 / std::tgamma(x);
    }
    // Reflection: 1/Gamma(x) = sin(pi x)/pi * Gamma(1-x).
    double s = sinpi(x);
    if (s == 0.0) return 0.0;
    double lg = std::lgamma(1.0 - x);
    return s / M_PI * std::exp(lg);
}

}  // namespace

Complex reciprocal_gamma(Complex z) {
    require_finite(z, "reciprocal_gamma argument");
    if (z.imag() == 0.0) return {rgamma_real(z.real()), 0.0};
    if (z.real() >= 0.5) return std::exp(-lanczos_lgamma(z));
    // Reflection on the complex plane.
    Complex s = std::sin(M_PI * z);
    return s / M_PI * std::exp(lanczos_lgamma(1.0 - z));
}

Complex ipow(Complex z, int n) {
    if (n < 0) return 1.0 / ipow(z, -n);
    Complex r = 1.0;
    Complex b = z;
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

bool in_unstable_sector(Complex lambda, double p) {
    return std::abs(std::arg(lambda)) <= 0.5 * p * M_PI + 1e-14;
}

Complex ml_series(const MLParams& params, Complex z) {
    require_finite(z, "ml_series argument");
    const double p = params.order();
    const double beta = params.beta;
    if (z == Complex(0.0, 0.0)) return reciprocal_gamma(Complex(beta, 0.0));

    const std::vector<wide>& rg = rgamma_table(p, beta);
    WideComplex sum(0, 0);
    WideComplex zpow(1, 0);
    const WideComplex wz(z);
    int small_streak = 0;
    for (int k = 0; k <= MLParams::kSeriesTermCap; ++k) {
        WideComplex term = zpow * rg[k];
        sum += term;
        // Stop once two consecutive terms fall below the tolerance; the
        // second one guards against the even/odd term oscillation of the
        // small-p series.
        wide thresh = static_cast<wide>(params.series_tol) * (wide(1) + sum.abs1());
        if (term.abs1() < thresh) {
            if (++small_streak >= 2) return sum.value();
        } else {
            small_streak = 0;
        }
        zpow = zpow * wz;
    }
    throw NonConvergence("ml_series: term cap exceeded; |z| too large for the series branch");
}

namespace detail {

Complex ml_algebraic_tail(double p, double beta, double t, Complex lambda, int m,
                          int q) {
    if (q < 1) return {0.0, 0.0};
    Complex sum = 0.0;
    const double sign = (m % 2 == 0) ? -1.0 : 1.0;  // (-1)^{m+1}
    double binom = 1.0;  // C(k+m-1, m) at k=1
    const Complex lam_inv = 1.0 / lambda;
    Complex lam_pow = ipow(lam_inv, m + 1);  // lambda^{-(1+m)}
    for (int k = 1; k <= q; ++k) {
        double rg = rgamma_real(beta - p * k);
        if (rg != 0.0)
            sum += sign * binom * std::pow(t, -p * k) * lam_pow * rg;
        binom *= static_cast<double>(k + m) / static_cast<double>(k);
        lam_pow *= lam_inv;
    }
    return sum;
}

Complex ml_exp_part_derivative(double p, double beta, double t, Complex lambda,
                               int m) {
    FracOrder order(p);
    double mfact = 1.0;
    for (int i = 2; i <= m; ++i) mfact *= i;
    if (beta == p) {
        // (1/m!) t^{-p} d^{m+1} exp(t lambda^{1/p}); same call path as the
        // B-tilde blocks so the decomposition residual cancels exactly.
        return std::pow(t, -p) * exp_root_derivative(order, t, lambda, m + 1) /
               mfact;
    }
    if (beta == 1.0) {
        return exp_root_derivative(order, t, lambda, m) / (mfact * p);
    }
    // General beta by Leibniz on lambda^{nu} * exp(t lambda^{1/p}).
    const double nu = (1.0 - beta) / p;
    Complex sum = 0.0;
    double choose = 1.0;
    double falling = 1.0;
    for (int i = 0; i <= m; ++i) {
        sum += choose * falling * std::pow(lambda, nu - i) *
               exp_root_derivative(order, t, lambda, m - i);
        choose *= static_cast<double>(m - i) / static_cast<double>(i + 1);
        falling *= nu - i;
    }
    return std::pow(t, 1.0 - beta) / p * sum / mfact;
}

Complex ml_series_derivative(const MLParams& params, double t, Complex lambda,
                             int m) {
    const double p = params.order();
    const double beta = params.beta;
    if (t == 0.0) {
        if (m == 0) return reciprocal_gamma(Complex(beta, 0.0));
        return {0.0, 0.0};  // every surviving term carries t^{p k}, k >= m >= 1
    }
    const std::vector<wide>& rg = rgamma_table(p, beta);
    const WideComplex wlam(lambda);
    const wide tp = static_cast<wide>(std::pow(t, p));
    WideComplex u(static_cast<wide>(std::pow(t, p * m)), 0);  // t^{pk} lam^{k-m}
    wide binom = 1;                                           // C(k, m)
    WideComplex sum(0, 0);
    int small_streak = 0;
    for (int k = m; k <= MLParams::kSeriesTermCap + m - 8 && k < (int)rg.size();
         ++k) {
        WideComplex term = u * (binom * rg[k]);
        sum += term;
        wide thresh = static_cast<wide>(params.series_tol) * (wide(1) + sum.abs1());
        if (term.abs1() < thresh) {
            if (++small_streak >= 2) return sum.value();
        } else {
            small_streak = 0;
        }
        u = u * wlam * tp;
        binom = binom * (k + 1) / (k + 1 - m);
    }
    throw NonConvergence("ml_series_derivative: term cap exceeded");
}

Complex ml_asymptotic_auto(double p, double beta, Complex z) {
    const bool unstable = in_unstable_sector(z, p);
    Complex sum = 0.0;
    if (unstable) {
        Complex zr = std::pow(z, 1.0 / p);
        sum = std::pow(z, (1.0 - beta) / p) * std::exp(zr) / p;
    }
    // Optimal truncation at the globally smallest term; the term magnitudes
    // jitter with sin(pi(beta - pk)) through the reflection formula, so a
    // first-increase stop would quit far too early.
    Complex zinv = 1.0 / z;
    Complex zpow = zinv;
    std::vector<Complex> terms;
    std::vector<double> mags;
    for (int k = 1; k <= 64; ++k) {
        double rg = rgamma_real(beta - p * k);
        terms.push_back(-zpow * rg);
        mags.push_back(rg == 0.0 ? -1.0 : std::abs(terms.back()));
        zpow *= zinv;
    }
    std::size_t best = 0;
    double best_mag = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < mags.size(); ++i) {
        if (mags[i] >= 0.0 && mags[i] < best_mag) {
            best_mag = mags[i];
            best = i;
        }
    }
    for (std::size_t i = 0; i <= best; ++i) sum += terms[i];
    return sum;
}

}  // namespace detail

Complex ml_asymptotic_unstable(const MLParams& params, double t, Complex lambda) {
    if (!(t > 0.0)) throw ValidationError("ml_asymptotic_unstable requires t > 0");
    const double p = params.order();
    if (!in_unstable_sector(lambda, p))
        throw SectorError("lambda outside the unstable sector |arg| <= p*pi/2");
    Complex exp_term = detail::ml_exp_part_derivative(p, params.beta, t, lambda, 0);
    return exp_term +
           detail::ml_algebraic_tail(p, params.beta, t, lambda, 0, params.q);
}

Complex ml_asymptotic_stable(const MLParams& params, double t, Complex lambda) {
    if (!(t > 0.0)) throw ValidationError("ml_asymptotic_stable requires t > 0");
    const double p = params.order();
    if (in_unstable_sector(lambda, p))
        throw SectorError("lambda inside the unstable sector; use the unstable expansion");
    return detail::ml_algebraic_tail(p, params.beta, t, lambda, 0, params.q);
}

Complex ml_eval(const MLParams& params, Complex z) {
    require_finite(z, "ml_eval argument");
    if (z == Complex(0.0, 0.0)) return reciprocal_gamma(Complex(params.beta, 0.0));
    if (std::abs(z) <= params.switch_radius) return ml_series(params, z);
    // Normalize z = t^p lambda with t = 1.
    if (in_unstable_sector(z, params.order()))
        return ml_asymptotic_unstable(params, 1.0, z);
    return ml_asymptotic_stable(params, 1.0, z);
}

Complex exp_root_derivative(const FracOrder& p, double t, Complex lambda, int m) {
    if (m < 0) throw ValidationError("derivative order must be >= 0");
    if (lambda == Complex(0.0, 0.0))
        throw DomainError("exp_root_derivative requires lambda != 0");
    const double pinv = 1.0 / p.value();
    Complex root = std::pow(lambda, pinv);  // principal branch
    Complex e = std::exp(t * root);
    if (m == 0) return e;
    // c_{m,i} recurrence; m stays tiny (block size - 1), so recompute per call.
    std::vector<double> c(m + 1, 0.0), next(m + 1, 0.0);
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
    Complex sum = 0.0;
    double tp = t;
    for (int i = 1; i <= m; ++i) {
        sum += c[i] * tp * std::pow(lambda, i * pinv - m);
        tp *= t;
    }
    return sum * e;
}

Complex ml_beta_derivative(const MLParams& params, double t, Complex lambda, int m) {
    if (t < 0.0) throw ValidationError("ml_beta_derivative requires t >= 0");
    if (m < 0) throw ValidationError("derivative order must be >= 0");
    const double p = params.order();
    if (t == 0.0 || std::abs(std::pow(t, p) * lambda) <= params.switch_radius)
        return detail::ml_series_derivative(params, t, lambda, m);
    Complex val = detail::ml_algebraic_tail(p, params.beta, t, lambda, m, params.q);
    if (in_unstable_sector(lambda, p))
        val += detail::ml_exp_part_derivative(p, params.beta, t, lambda, m);
    return val;
}

Complex ml_lambda_derivative(const MLParams& params, double t, Complex lambda, int m) {
    MLParams prm = params;
    prm.beta = prm.order();
    return ml_beta_derivative(prm, t, lambda, m);
}

}  // namespace fracstab

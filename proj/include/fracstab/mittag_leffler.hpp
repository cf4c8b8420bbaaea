#ifndef FRACSTAB_MITTAG_LEFFLER_HPP
#define FRACSTAB_MITTAG_LEFFLER_HPP

#include "fracstab/types.hpp"

namespace fracstab {

// 1/Gamma(z), entire; exactly zero at z = 0, -1, -2, ...
Complex reciprocal_gamma(Complex z);

// Integer power by repeated multiplication; keeps real-axis arguments real.
Complex ipow(Complex z, int n);

// True when lambda lies in the unstable Matignon sector |arg z| <= p*pi/2
// (boundary inclusive; the boundary carries the bounded oscillatory
// exponential, which the unstable expansion represents correctly).
bool in_unstable_sector(Complex lambda, double p);

// Power series  sum_k z^k / Gamma(p k + beta), accumulated in extended
// precision.  Caller keeps |z| within params.switch_radius; the series
// still converges outside but loses digits to cancellation.
Complex ml_series(const MLParams& params, Complex z);

// E_{p,beta}(t^p lambda) for unstable-sector lambda, t > 0:
//   (1/p) t^{1-beta} lambda^{(1-beta)/p} exp(t lambda^{1/p})
//   - sum_{k=1}^{q} t^{-p k} lambda^{-k} / Gamma(beta - p k)
Complex ml_asymptotic_unstable(const MLParams& params, double t, Complex lambda);

// Same truncation without the exponential term; requires stable-sector lambda.
Complex ml_asymptotic_stable(const MLParams& params, double t, Complex lambda);

// Hybrid dispatcher: series inside the switch radius, sector asymptotics
// outside (with z = t^p lambda normalized to t = 1).
Complex ml_eval(const MLParams& params, Complex z);

// d^m/dlambda^m exp(t lambda^{1/p}) from the closed form
//   sum_{i=1}^{m} c_{m,i} t^i lambda^{i/p - m} exp(t lambda^{1/p}),
// c_{1,1} = 1/p,  c_{m+1,i} = c_{m,i} (i/p - m) + c_{m,i-1}/p.
Complex exp_root_derivative(const FracOrder& p, double t, Complex lambda, int m);

// (1/m!) d^m/dlambda^m E_{p,p}(t^p lambda), hybrid branches as in ml_eval.
Complex ml_lambda_derivative(const MLParams& params, double t, Complex lambda, int m);

// Same for general beta (used by the matrix evaluator; beta = params.beta).
Complex ml_beta_derivative(const MLParams& params, double t, Complex lambda, int m);

namespace detail {

// (1/m!) d^m/dlambda^m of the truncated algebraic tail
//   -sum_{k=1}^{q} t^{-p k} lambda^{-k} / Gamma(beta - p k),
// i.e. sum_k (-1)^{m+1} C(k+m-1, m) t^{-p k} lambda^{-k-m} / Gamma(beta - p k).
// Gamma poles yield exact-zero terms via reciprocal_gamma.
Complex ml_algebraic_tail(double p, double beta, double t, Complex lambda, int m,
                          int q);

// Exponential part of the derivative asymptotics (unstable sector only):
// (1/m!) d^m/dlambda^m [(1/p) t^{1-beta} lambda^{(1-beta)/p} exp(t lambda^{1/p})].
// For beta == p this is t^{-p} * exp_root_derivative(m+1)/m!, evaluated
// through exp_root_derivative so it cancels bit-for-bit against the
// B-tilde blocks built from the same call.
Complex ml_exp_part_derivative(double p, double beta, double t, Complex lambda,
                               int m);

// Series for the derivative: sum_{k>=m} C(k,m) t^{p k} lambda^{k-m} / Gamma(p k + beta).
Complex ml_series_derivative(const MLParams& params, double t, Complex lambda,
                             int m);

// Auto-truncated asymptotic value of E_{p,beta}(z): stops at the smallest
// term (optimal truncation). Used by tests to probe the hand-off window.
Complex ml_asymptotic_auto(double p, double beta, Complex z);

}  // namespace detail

}  // namespace fracstab

#endif

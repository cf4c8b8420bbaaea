#ifndef FRACSTAB_TYPES_HPP
#define FRACSTAB_TYPES_HPP

#include <cmath>
#include <complex>

#include "fracstab/errors.hpp"

namespace fracstab {

using Complex = std::complex<double>;

// Fractional derivative order. The decomposition machinery requires
// 0 < p < 1; the simulator additionally accepts p = 1 for classical-limit
// checks, so the strict bound is enforced where the expansions need it.
class FracOrder {
  public:
    explicit FracOrder(double p) : p_(p) {
        if (!(p > 0.0) || !(p <= 1.0) || !std::isfinite(p))
            throw ValidationError("fractional order must satisfy 0 < p <= 1");
    }
    double value() const { return p_; }
    bool is_fractional() const { return p_ < 1.0; }
    void require_fractional() const {
        if (!is_fractional())
            throw ValidationError("this operation requires 0 < p < 1");
    }

  private:
    double p_;
};

inline void require_finite(const Complex& z, const char* what) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw ValidationError(std::string(what) + " must be finite");
}

// Usable |z| range of the power series at a given precision: the series for
// E_{p,beta}(z) carries partial sums of size exp(|z|^{1/p}), so cancellation
// eats the result for |z|^{1/p} beyond roughly ln(1/eps). min(5, 40^p) keeps
// the default well inside that for p down to 0.3.
inline double default_switch_radius(double p) {
    return std::min(5.0, std::pow(40.0, p));
}

struct MLParams {
    FracOrder p;
    double beta = 1.0;
    int q = 16;                   // asymptotic truncation order, >= 2
    double series_tol = 1e-15;
    double switch_radius = 0.0;   // <= 0 means default_switch_radius(p)

    static constexpr int kSeriesTermCap = 2000;

    MLParams(FracOrder order, double beta_, int q_ = 16, double tol = 1e-15,
             double radius = 0.0)
        : p(order), beta(beta_), q(q_), series_tol(tol), switch_radius(radius) {
        if (switch_radius <= 0.0) switch_radius = default_switch_radius(p.value());
        validate();
    }

    void validate() const {
        if (!(beta > 0.0)) throw ValidationError("beta must be positive");
        if (q < 2) throw ValidationError("truncation order q must be >= 2");
        if (!(series_tol > 0.0) || !(series_tol < 1.0))
            throw ValidationError("series_tol must lie in (0, 1)");
        if (!(switch_radius > 0.0))
            throw ValidationError("switch_radius must be positive");
    }

    double order() const { return p.value(); }
};

}  // namespace fracstab

#endif

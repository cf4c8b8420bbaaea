#ifndef FRACSTAB_SPECTRAL_HPP
#define FRACSTAB_SPECTRAL_HPP

#include <Eigen/Dense>

#include "fracstab/matrix_ml.hpp"

namespace fracstab {

// Stable/unstable splitting of the state space with the projection maps
// pi_s, pi_u used by the fixed-point operator.
struct SpectralSplit {
    Eigen::MatrixXcd pi_s;
    Eigen::MatrixXcd pi_u;
    double alpha = 0.0;  // tail decay rate, min over unstable Re(lambda^{1/p})
    int stable_dim = 0;
    int unstable_dim = 0;

    // Real projection matrices; valid once build_split has validated realness.
    Eigen::MatrixXd pi_s_real() const { return pi_s.real(); }
    Eigen::MatrixXd pi_u_real() const { return pi_u.real(); }
};

// |arg lambda| vs p*pi/2; boundary rejected as NonHyperbolic.
inline BlockClass classify(Complex lambda, const FracOrder& p) {
    return classify_eigenvalue(lambda, p);
}

// pi_s = P diag(1 on stable coords) P^{-1}, pi_u = I - pi_s.
// For a real system the projections must come out real (complex eigenvalues
// supplied in conjugate pairs); violations are reported, not repaired.
SpectralSplit build_split(const JordanSystem& system);

}  // namespace fracstab

#endif

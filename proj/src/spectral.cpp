#include "fracstab/spectral.hpp"

namespace fracstab {

SpectralSplit build_split(const JordanSystem& system) {
    const int n = system.dimension();
    Eigen::MatrixXcd mask = Eigen::MatrixXcd::Zero(n, n);
    int off = 0;
    int sdim = 0;
    for (const auto& b : system.blocks()) {
        if (b.klass == BlockClass::stable) {
            for (int i = 0; i < b.size; ++i) mask(off + i, off + i) = 1.0;
            sdim += b.size;
        }
        off += b.size;
    }
    SpectralSplit split;
    split.stable_dim = sdim;
    split.unstable_dim = n - sdim;
    split.alpha = system.tail_decay_rate();
    if (system.has_identity_transform()) {
        split.pi_s = mask;
    } else {
        split.pi_s = system.transform() * mask * system.transform_inverse();
    }
    split.pi_u = Eigen::MatrixXcd::Identity(n, n) - split.pi_s;
    if (system.is_real()) {
        double imag = std::max(split.pi_s.imag().cwiseAbs().maxCoeff(),
                               split.pi_u.imag().cwiseAbs().maxCoeff());
        if (imag > 1e-10)
            throw ValidationError(
                "projections of a real system are not real: complex eigenvalues "
                "must be supplied in conjugate pairs");
        split.pi_s.imag().setZero();
        split.pi_u.imag().setZero();
    }
    return split;
}

}  // namespace fracstab

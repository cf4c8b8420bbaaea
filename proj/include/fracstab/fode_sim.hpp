#ifndef FRACSTAB_FODE_SIM_HPP
#define FRACSTAB_FODE_SIM_HPP

#include "fracstab/manifold.hpp"

namespace fracstab {

// Caputo predictor-corrector (Adams-Bashforth-Moulton) for
// D^p x = A x + f(x), used as an independent oracle for the manifold
// construction. p = 1 is allowed for classical-limit checks.
struct SimConfig {
    FracOrder p;
    double step = 5e-3;
    double horizon = 20.0;
    Eigen::VectorXd initial;

    SimConfig(FracOrder order, double h, double T, Eigen::VectorXd x0)
        : p(order), step(h), horizon(T), initial(std::move(x0)) {
        if (!(step > 0.0)) throw ValidationError("step must be positive");
        if (!(horizon >= 10.0 * step))
            throw ValidationError("horizon must be at least 10 steps");
    }
};

// One corrector pass per step (PECE); full history sums, no truncation.
// Throws StepOverflow when |x_k| exceeds 1e6.
TrajectoryGrid pece_integrate(const SimConfig& config, const Eigen::MatrixXd& a,
                              const VectorField& f);

struct AttractionReport {
    std::vector<double> times;
    std::vector<double> on_manifold;   // |pi_u x(t)| along the on-manifold run
    std::vector<double> perturbed;     // same for the perturbed run
    double on_min_ratio = 1.0;         // min |pi_u x| / |pi_u x(0)|
    double perturbed_growth = 0.0;     // max |pi_u x| / |pi_u x(0)|
    bool on_escaped = false;
    bool perturbed_escaped = false;
    double on_escape_time = -1.0;
    double perturbed_escape_time = -1.0;
    bool pass_decay = false;   // on-manifold projection decays below threshold
    bool pass_growth = false;  // perturbed projection grows >= growth_factor
    bool pass = false;
};

struct AttractionOptions {
    double step = 5e-3;
    double horizon = 20.0;
    double decay_threshold = 0.5;   // required min-ratio on the manifold
    double growth_factor = 10.0;    // required growth off the manifold
};

// Simulates from the manifold point and from the point with the pi_u
// component perturbed; escape of the perturbed run is expected and reported
// as growth. Both runs keep whatever trajectory existed before escape.
AttractionReport attraction_experiment(const JordanSystem& system,
                                       const SpectralSplit& split,
                                       const VectorField& f,
                                       const Eigen::VectorXd& manifold_point,
                                       double off_manifold_perturbation,
                                       const AttractionOptions& opts = {});

}  // namespace fracstab

#endif

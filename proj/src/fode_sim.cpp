#include "fracstab/fode_sim.hpp"

#include <cmath>
#include <limits>

namespace fracstab {

TrajectoryGrid pece_integrate(const SimConfig& config, const Eigen::MatrixXd& a,
                              const VectorField& f) {
    const int n = static_cast<int>(config.initial.size());
    if (a.rows() != n || a.cols() != n)
        throw ValidationError("matrix dimension mismatch");
    const double p = config.p.value();
    const double h = config.step;
    const int K = static_cast<int>(std::ceil(config.horizon / h - 1e-9));
    const double gamma_p = std::tgamma(p);

    auto rhs = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return a * x + f.eval(x);
    };

    TrajectoryGrid traj;
    traj.step = h;
    traj.values.reserve(K + 1);
    traj.values.push_back(config.initial);
    std::vector<Eigen::VectorXd> fs;
    fs.reserve(K + 1);
    fs.push_back(rhs(config.initial));

    // Predictor: left rectangles; corrector: product trapezoid. Both are
    // assembled from the shared panel-weight generator.
    for (int k1 = 1; k1 <= K; ++k1) {
        Eigen::VectorXd pred = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd corr = Eigen::VectorXd::Zero(n);
        for (int j = 0; j < k1; ++j) {
            const int d = k1 - j;
            PanelWeights w = product_trapezoid_weights(p, h, d);
            pred += (w.left + w.right) * fs[j];
            corr += w.left * fs[j];
            if (j + 1 < k1) corr += w.right * fs[j + 1];
        }
        Eigen::VectorXd xp = config.initial + pred / gamma_p;
        PanelWeights w1 = product_trapezoid_weights(p, h, 1);
        Eigen::VectorXd xc =
            config.initial + (corr + w1.right * rhs(xp)) / gamma_p;
        if (!xc.allFinite() || xc.cwiseAbs().maxCoeff() > 1e6)
            throw StepOverflow("trajectory escaped", k1 * h);
        traj.values.push_back(xc);
        fs.push_back(rhs(xc));
    }
    return traj;
}

namespace {

TrajectoryGrid try_integrate(const SimConfig& cfg, const Eigen::MatrixXd& a,
                             const VectorField& f, bool& escaped,
                             double& escape_time) {
    escaped = false;
    escape_time = -1.0;
    try {
        return pece_integrate(cfg, a, f);
    } catch (const StepOverflow& e) {
        escaped = true;
        escape_time = e.escape_time;
        // Re-run up to just before the escape to keep the prefix.
        double T = std::max(10.0 * cfg.step, e.escape_time - cfg.step);
        SimConfig shorter(cfg.p, cfg.step, T, cfg.initial);
        return pece_integrate(shorter, a, f);
    }
}

}  // namespace

AttractionReport attraction_experiment(const JordanSystem& system,
                                       const SpectralSplit& split,
                                       const VectorField& f,
                                       const Eigen::VectorXd& manifold_point,
                                       double off_manifold_perturbation,
                                       const AttractionOptions& opts) {
    if (!system.is_real())
        throw ValidationError("attraction experiment needs a real system");
    Eigen::MatrixXd a = system.dense().real();
    Eigen::MatrixXd pu = split.pi_u_real();

    // Perturbation direction: first unstable Jordan coordinate mapped back.
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(system.dimension());
    int off = 0;
    for (const auto& b : system.blocks()) {
        if (b.klass == BlockClass::unstable) {
            e(off) = 1.0;
            break;
        }
        off += b.size;
    }
    if (split.unstable_dim == 0)
        throw ValidationError("attraction experiment needs an unstable subspace");
    Eigen::VectorXd dir = (system.transform() * e).real();
    dir.normalize();

    SimConfig cfg_on(system.order(), opts.step, opts.horizon, manifold_point);
    Eigen::VectorXd perturbed_point =
        manifold_point + off_manifold_perturbation * dir;
    SimConfig cfg_off(system.order(), opts.step, opts.horizon, perturbed_point);

    AttractionReport rep;
    TrajectoryGrid on =
        try_integrate(cfg_on, a, f, rep.on_escaped, rep.on_escape_time);
    TrajectoryGrid offt =
        try_integrate(cfg_off, a, f, rep.perturbed_escaped, rep.perturbed_escape_time);

    auto norms = [&](const TrajectoryGrid& tr) {
        std::vector<double> v(tr.node_count());
        for (int k = 0; k < tr.node_count(); ++k)
            v[k] = (pu * tr.values[k]).norm();
        return v;
    };
    rep.on_manifold = norms(on);
    rep.perturbed = norms(offt);
    const int nodes = std::max(on.node_count(), offt.node_count());
    rep.times.resize(nodes);
    for (int k = 0; k < nodes; ++k) rep.times[k] = k * opts.step;

    const double on0 = rep.on_manifold.front();
    double on_min = on0;
    for (double v : rep.on_manifold) on_min = std::min(on_min, v);
    rep.on_min_ratio = on0 > 0.0 ? on_min / on0 : 0.0;

    const double off0 = rep.perturbed.front();
    double off_max = off0;
    for (double v : rep.perturbed) off_max = std::max(off_max, v);
    rep.perturbed_growth = off0 > 0.0
                               ? off_max / off0
                               : std::numeric_limits<double>::infinity();
    if (rep.perturbed_escaped)
        rep.perturbed_growth = std::numeric_limits<double>::infinity();

    rep.pass_decay = rep.on_min_ratio <= opts.decay_threshold;
    rep.pass_growth = rep.perturbed_growth >= opts.growth_factor;
    rep.pass = rep.pass_decay && rep.pass_growth;
    return rep;
}

}  // namespace fracstab

#include "mne/preprocess.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "mne/rng.hpp"

namespace mne {

MalaResult mala_run(const TargetDensity& target, const MalaConfig& cfg) {
    if (!(cfg.step_size > 0.0)) throw std::invalid_argument("mala_run: step size must be > 0");
    if (cfg.n_walkers < 1) throw std::invalid_argument("mala_run: need at least one walker");
    const int d = target.dim();
    const double h = cfg.step_size;
    Matrix pts(d, cfg.n_walkers);
    std::atomic<long> accepted{0};

#pragma omp parallel for schedule(static)
    for (int w = 0; w < cfg.n_walkers; ++w) {
        Rng rng(child_seed(cfg.seed, w));
        Vector x = Vector::Zero(d);
        if (cfg.init == MalaConfig::Init::StandardNormal)
            for (int i = 0; i < d; ++i) x[i] = rng.normal();
        double u = target.energy(x);
        Vector g = target.score(x);
        Vector xi(d), xp(d);
        long acc_local = 0;
        for (int step = 0; step < cfg.n_steps; ++step) {
            for (int i = 0; i < d; ++i) xi[i] = rng.normal();
            xp = x - h * g + std::sqrt(2.0 * h) * xi;
            const double up = target.energy(xp);
            if (std::isfinite(up)) {
                const Vector gp = target.score(xp);
                // log q(x'|x) = −‖x' − x + h∇u(x)‖²/(4h), and symmetrically back.
                const double lq_fwd = -(xp - x + h * g).squaredNorm() / (4.0 * h);
                const double lq_bwd = -(x - xp + h * gp).squaredNorm() / (4.0 * h);
                const double log_alpha = (u - up) + (lq_bwd - lq_fwd);
                if (std::log(rng.uniform_pos()) < log_alpha) {
                    x = xp;
                    u = up;
                    g = gp;
                    ++acc_local;
                }
            }
        }
        pts.col(w) = x;
        accepted += acc_local;
    }
    MalaResult result;
    result.points = PointSet(std::move(pts));
    result.acceptance_rate =
        static_cast<double>(accepted.load()) / (static_cast<double>(cfg.n_walkers) * cfg.n_steps);
    return result;
}

FitResult adam_fit_scores(const Matrix& target_scores, const PointSet& pts, const ArchSpec& arch,
                          const AdamConfig& cfg) {
    if (target_scores.rows() != pts.dim() || target_scores.cols() != pts.count())
        throw std::invalid_argument("adam_fit: target score shape mismatch");
    const MlpEnergy model(arch);
    ModelParams params = init_params(arch, cfg.seed);
    const int p = model.n_params();
    Vector m = Vector::Zero(p), v = Vector::Zero(p), grad(p);
    FitResult result;
    result.loss_history.reserve(cfg.n_iters);
    double b1t = 1.0, b2t = 1.0;
    for (int it = 0; it < cfg.n_iters; ++it) {
        const double loss = model.score_loss_grad(params.theta, pts, target_scores, grad);
        if (!std::isfinite(loss))
            throw std::runtime_error("adam_fit: non-finite loss at iteration " + std::to_string(it));
        result.loss_history.push_back(loss);
        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
        const double corr1 = 1.0 / (1.0 - b1t);
        const double corr2 = 1.0 / (1.0 - b2t);
        params.theta.array() -=
            cfg.learning_rate * corr1 * m.array() / ((corr2 * v.array()).sqrt() + cfg.eps_hat);
    }
    result.params = std::move(params);
    return result;
}

FitResult adam_fit(const TargetDensity& target, const PointSet& pts, const ArchSpec& arch,
                   const AdamConfig& cfg) {
    if (target.dim() != pts.dim()) throw std::invalid_argument("adam_fit: dimension mismatch");
    const Matrix scores = target.score_batch(pts.x);
    return adam_fit_scores(scores, pts, arch, cfg);
}

}  // namespace mne

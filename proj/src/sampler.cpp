#include "mne/sampler.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mne {

PointSet WeightedEnsemble::assemble() const {
    const int d = dim();
    const int m = count();
    Matrix pts(d, m);
    for (std::size_t i = 0; i < mask.size(); ++i) pts.row(mask[i]) = y.row(i);
    const IndexSet rest = complement_index_set(mask, d);
    for (std::size_t i = 0; i < rest.size(); ++i) pts.row(rest[i]).setConstant(x_cond[i]);
    return PointSet(std::move(pts));
}

std::vector<Rng> make_sample_rngs(std::uint64_t stream_seed, int n_samples) {
    std::vector<Rng> rngs;
    rngs.reserve(n_samples);
    for (int i = 0; i < n_samples; ++i) rngs.emplace_back(child_seed(stream_seed, i));
    return rngs;
}

WeightedEnsemble init_ensemble(const ReverseSdeConfig& cfg, const DiffusionSpec& spec,
                               const EnergyModel& model, const Vector& theta_sf,
                               const Vector& x_cond, std::vector<Rng>& rngs) {
    if (cfg.n_samples < 1) throw std::invalid_argument("init_ensemble: need M >= 1");
    if (static_cast<int>(rngs.size()) != cfg.n_samples)
        throw std::invalid_argument("init_ensemble: rng stream count mismatch");
    const int ns = static_cast<int>(spec.mask.size());
    WeightedEnsemble ens;
    ens.mask = spec.mask;
    ens.x_cond = x_cond;
    ens.y.resize(ns, cfg.n_samples);
    ens.logw.resize(cfg.n_samples);
    ens.s = 0.0;
    const double stat_sd = spec.sigma / std::sqrt(2.0 * spec.gamma);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < cfg.n_samples; ++j)
        for (int i = 0; i < ns; ++i) ens.y(i, j) = stat_sd * rngs[j].normal();
    const Vector u_sf = model.eval(theta_sf, ens.assemble());
    const double g_over_s2 = spec.gamma / (spec.sigma * spec.sigma);
    for (int j = 0; j < cfg.n_samples; ++j)
        ens.logw[j] = g_over_s2 * ens.y.col(j).squaredNorm() - u_sf[j];
    return ens;
}

void reverse_step(WeightedEnsemble& ens, const ReverseSdeConfig& cfg, const DiffusionSpec& spec,
                  const EnergyModel& model, const DenseTrajectory& traj, int step,
                  std::vector<Rng>& rngs) {
    if (spec.drift != DriftKind::Ou)
        throw std::invalid_argument("reverse_step: reverse diffusion assumes the OU drift");
    const double ds = cfg.s_f / cfg.n_steps;
    const double s = step * ds;
    const double st = cfg.s_f - s;  // forward time of the model state in use
    if (st < -1e-12) throw std::invalid_argument("reverse_step: step beyond s_f");

    const Vector theta = traj.value(st);
    const Vector theta_dot = traj.derivative(st);
    const PointSet pts = ens.assemble();
    const DerivativeBundle bundle = model.derivatives(theta, pts, spec.mask, spec.mask);

    // A[u] at the sample points (OU drift: ∇·b = −γ|S|, b·∇u over S only).
    const double half_s2 = 0.5 * spec.sigma * spec.sigma;
    Vector a_vals = Vector::Constant(ens.count(), -spec.gamma * static_cast<double>(spec.mask.size()));
    for (std::size_t i = 0; i < spec.mask.size(); ++i)
        a_vals += spec.gamma * pts.x.row(spec.mask[i]).cwiseProduct(bundle.grad.row(i)).transpose();
    a_vals += half_s2 * bundle.lap;
    a_vals -= half_s2 * bundle.grad.cwiseAbs2().colwise().sum().transpose();

    // d/ds u_{θ(s_f−s)} at frozen points = −⟨Φ_θ, θ̇(s_f−s)⟩.
    const Vector du_ds = -model.dir_param_deriv(theta, theta_dot, pts);
    const Vector wdot = st * a_vals + du_ds;

    const int ns = static_cast<int>(spec.mask.size());
    const double drift_fac = ds * st;
    const double noise_fac = std::sqrt(ds * std::max(st, 0.0)) * spec.sigma;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ens.count(); ++j) {
        for (int i = 0; i < ns; ++i) {
            const double xi = rngs[j].normal();
            ens.y(i, j) += drift_fac * (spec.gamma * ens.y(i, j) - spec.sigma * spec.sigma *
                                                                       bundle.grad(i, j)) +
                           noise_fac * xi;
        }
        ens.logw[j] += ds * wdot[j];
    }
    ens.s = (step + 1) * ds;
    if (!ens.y.allFinite() || !ens.logw.allFinite()) {
        for (int j = 0; j < ens.count(); ++j)
            if (!ens.y.col(j).allFinite() || !std::isfinite(ens.logw[j]))
                throw std::runtime_error("reverse_step: non-finite state for sample " +
                                         std::to_string(j) + " at step " + std::to_string(step));
    }
}

void finalize_weights(WeightedEnsemble& ens, const EnergyModel& model, const Vector& theta0,
                      const TargetDensity& target) {
    const PointSet pts = ens.assemble();
    const Vector u_model = model.eval(theta0, pts);
    const Vector u_true = target.energy_batch(pts.x);
    ens.logw += u_model - u_true;
}

double ess(const Vector& logw) {
    const double shift = logw.maxCoeff();
    double s1 = 0.0, s2 = 0.0;
    for (Eigen::Index i = 0; i < logw.size(); ++i) {
        const double e = std::exp(logw[i] - shift);
        s1 += e;
        s2 += e * e;
    }
    return s1 * s1 / s2;
}

Vector normalized_weights(const Vector& logw) {
    const double shift = logw.maxCoeff();
    Vector p = (logw.array() - shift).exp();
    p /= p.sum();
    return p;
}

void resample(WeightedEnsemble& ens, Rng& rng) {
    const int m = ens.count();
    const double shift = ens.logw.maxCoeff();
    if (!std::isfinite(shift)) throw std::runtime_error("resample: all weights are -inf");
    const Vector p = normalized_weights(ens.logw);
    // Systematic resampling: one uniform offset, stratified positions.
    const double u0 = rng.uniform() / m;
    Matrix ynew(ens.y.rows(), m);
    double cum = p[0];
    int idx = 0;
    for (int j = 0; j < m; ++j) {
        const double pos = u0 + static_cast<double>(j) / m;
        while (pos > cum && idx + 1 < m) cum += p[++idx];
        ynew.col(j) = ens.y.col(idx);
    }
    ens.y = std::move(ynew);
    ens.logw.setZero();
    ++ens.resample_events;
}

double marginal_energy(const EnergyModel& model, const Vector& theta_sf, const IndexSet& mask,
                       const Vector& x_sprime) {
    const int d = model.dim();
    if (static_cast<int>(mask.size()) >= d)
        throw std::invalid_argument("marginal_energy: S' is empty, nothing to marginalize onto");
    const IndexSet rest = complement_index_set(mask, d);
    if (static_cast<int>(rest.size()) != x_sprime.size())
        throw std::invalid_argument("marginal_energy: x_{S'} length mismatch");
    Matrix pt = Matrix::Zero(d, 1);
    for (std::size_t i = 0; i < rest.size(); ++i) pt(rest[i], 0) = x_sprime[i];
    return model.eval(theta_sf, PointSet(std::move(pt)))[0];
}

double weighted_estimate(const WeightedEnsemble& ens,
                         const std::function<double(const Vector&)>& f) {
    const Vector p = normalized_weights(ens.logw);
    const PointSet pts = ens.assemble();
    double acc = 0.0;
    for (int j = 0; j < ens.count(); ++j) acc += p[j] * f(pts.x.col(j));
    return acc;
}

ReverseRunResult run_reverse_sampler(WeightedEnsemble& ens, const ReverseSdeConfig& cfg,
                                     const DiffusionSpec& spec, const EnergyModel& model,
                                     const DenseTrajectory& traj, const Vector& theta0,
                                     const TargetDensity* target, const Vector& x_cond) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("run_reverse_sampler: alpha must lie in (0, 1)");
    std::vector<Rng> rngs = make_sample_rngs(substream_seed(cfg.seed, "sde-noise"), cfg.n_samples);
    Rng resample_rng(substream_seed(cfg.seed, "resample"));
    const Vector theta_sf = traj.value(cfg.s_f);
    ens = init_ensemble(cfg, spec, model, theta_sf, x_cond, rngs);

    ReverseRunResult result;
    result.ess_curve.reserve(cfg.n_steps + 1);
    result.ess_curve.emplace_back(0.0, ess(ens.logw) / cfg.n_samples);
    for (int k = 0; k < cfg.n_steps; ++k) {
        reverse_step(ens, cfg, spec, model, traj, k, rngs);
        const double e = ess(ens.logw);
        result.ess_curve.emplace_back(ens.s, e / cfg.n_samples);
        if (e < cfg.alpha * cfg.n_samples) resample(ens, resample_rng);
    }
    if (target) finalize_weights(ens, model, theta0, *target);
    result.resample_events = ens.resample_events;
    return result;
}

}  // namespace mne

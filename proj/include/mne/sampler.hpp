#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "mne/diffusion.hpp"
#include "mne/model.hpp"
#include "mne/ode.hpp"
#include "mne/rng.hpp"
#include "mne/targets.hpp"

namespace mne {

struct ReverseSdeConfig {
    double s_f = std::sqrt(10.0);
    int n_steps = 2000;  // Euler-Maruyama steps of size s_f/n_steps
    int n_samples = 0;   // M
    double alpha = 0.5;  // resample when ESS < α·M
    std::uint64_t seed = 0;
};

/// M weighted reverse-diffusion samples. Only the diffused coordinates S are
/// carried in `y`; the conditioned coordinates S′ hold the fixed values
/// `x_cond` and are never touched by the dynamics. Ensemble statistics are
/// evaluated through max-shifted exponentials so log-weights of any scale are
/// safe.
struct WeightedEnsemble {
    IndexSet mask;     // S, size |S| = rows of y
    Vector x_cond;     // values for S′ in increasing index order (may be empty)
    Matrix y;          // |S|×M
    Vector logw;       // M
    double s = 0.0;    // current reverse time
    int resample_events = 0;

    int dim() const { return static_cast<int>(mask.size() + x_cond.size()); }
    int count() const { return static_cast<int>(y.cols()); }

    /// Full d×M points with conditioned coordinates filled in.
    PointSet assemble() const;
};

std::vector<Rng> make_sample_rngs(std::uint64_t stream_seed, int n_samples);

/// Y₀ ~ N(0, (σ²/2γ)·I_{|S|}) with the initial importance correction
/// w(0) = (γ/σ²)‖Y₀‖² − u_{θ(s_f)}(Y₀, x_{S′}) against the stationary Gaussian.
WeightedEnsemble init_ensemble(const ReverseSdeConfig& cfg, const DiffusionSpec& spec,
                               const EnergyModel& model, const Vector& theta_sf,
                               const Vector& x_cond, std::vector<Rng>& rngs);

/// One Euler-Maruyama step of
///   dY = (s_f−s)[γY − σ²∇_S u_{θ(s_f−s)}]ds + (s_f−s)^{1/2}σ dB
/// coupled to the explicit Euler log-weight update
///   ẇ = (s_f−s)·A[u_{θ(s_f−s)}](Y, x_{S′}) + d/ds u_{θ(s_f−s)}(Y, x_{S′}),
/// where the d/ds term is −⟨Φ_θ(Y), θ̇(s_f−s)⟩ with θ̇ read off the dense
/// interpolant. ẇ is exactly minus the pointwise residual of the time-changed
/// evolution, so exact parameter dynamics freeze the weights.
void reverse_step(WeightedEnsemble& ens, const ReverseSdeConfig& cfg, const DiffusionSpec& spec,
                  const EnergyModel& model, const DenseTrajectory& traj, int step,
                  std::vector<Rng>& rngs);

/// Final importance correction w += u_{θ(0)}(y, x_{S′}) − u(y, x_{S′}) against
/// the true target energy (θ(0) is the fitted surrogate the evolution started
/// from).
void finalize_weights(WeightedEnsemble& ens, const EnergyModel& model, const Vector& theta0,
                      const TargetDensity& target);

/// (Σe^w)² / Σe^{2w}, max-shifted.
double ess(const Vector& logw);

/// Systematic resampling proportional to the normalized weights; weights reset
/// to zero. Expected multiplicity of sample i is M·(normalized weight i).
void resample(WeightedEnsemble& ens, Rng& rng);

/// Marginal energy u_{S′}(x_{S′}) ≈ u_{θ(s_f)}(0, x_{S′}): the terminal model
/// evaluated with the diffused coordinates zeroed. S′ must be nonempty.
double marginal_energy(const EnergyModel& model, const Vector& theta_sf, const IndexSet& mask,
                       const Vector& x_sprime);

/// Self-normalized estimate Σe^{w_i}f(y_i)/Σe^{w_i}; f sees the assembled
/// d-dimensional point.
double weighted_estimate(const WeightedEnsemble& ens,
                         const std::function<double(const Vector&)>& f);

/// Normalized weights p_i = e^{w_i}/Σe^{w_j}.
Vector normalized_weights(const Vector& logw);

struct ReverseRunResult {
    std::vector<std::pair<double, double>> ess_curve;  // (s, ESS/M)
    int resample_events = 0;
};

/// Full reverse pass: init, n_steps Euler-Maruyama updates with ESS tracking
/// and α-triggered systematic resampling, final importance correction.
ReverseRunResult run_reverse_sampler(WeightedEnsemble& ens, const ReverseSdeConfig& cfg,
                                     const DiffusionSpec& spec, const EnergyModel& model,
                                     const DenseTrajectory& traj, const Vector& theta0,
                                     const TargetDensity* target, const Vector& x_cond);

}  // namespace mne

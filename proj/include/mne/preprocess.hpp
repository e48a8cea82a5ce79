#pragma once

#include <cstdint>
#include <vector>

#include "mne/mlp.hpp"
#include "mne/model.hpp"
#include "mne/targets.hpp"

namespace mne {

struct MalaConfig {
    int n_steps = 1000;
    double step_size = 0.02;  // h in x' = x − h∇u(x) + √(2h)·ξ
    int n_walkers = 1;
    enum class Init { Origin, StandardNormal } init = Init::Origin;
    std::uint64_t seed = 0;
};

struct MalaResult {
    PointSet points;         // final walker positions, d×n_walkers
    double acceptance_rate;  // pooled over walkers and steps
};

/// Metropolis-adjusted Langevin: gradient-informed proposals accepted with the
/// Metropolis-Hastings ratio for the asymmetric Gaussian proposal. Walkers are
/// independent chains with per-walker substreams. Proposals landing in a
/// rejected region (energy +inf) are refused without a score evaluation.
MalaResult mala_run(const TargetDensity& target, const MalaConfig& cfg);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_hat = 1e-8;
    int n_iters = 5000;
    std::uint64_t seed = 0;  // parameter initialization
};

struct FitResult {
    ModelParams params;
    std::vector<double> loss_history;
};

/// Full-batch Adam on the score-matching objective
///   L(θ) = (1/N)·Σ_i ‖∇u_θ(x_i) − ∇u(x_i)‖²
/// with bias-corrected moments. Target scores are evaluated once up front.
FitResult adam_fit(const TargetDensity& target, const PointSet& pts, const ArchSpec& arch,
                   const AdamConfig& cfg);

/// Same objective against precomputed scores (used where the initial energy is
/// known analytically rather than through a TargetDensity).
FitResult adam_fit_scores(const Matrix& target_scores, const PointSet& pts, const ArchSpec& arch,
                          const AdamConfig& cfg);

}  // namespace mne

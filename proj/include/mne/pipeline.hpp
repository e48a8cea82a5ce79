#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mne/config.hpp"
#include "mne/evolve.hpp"
#include "mne/preprocess.hpp"
#include "mne/sampler.hpp"

namespace mne {

/// Everything a run needs that can be derived from the config alone: the
/// target (null for the Langevin experiment, whose initial energy is known in
/// closed form), the diffusion spec, architecture, mask and conditioning.
struct RunContext {
    ExperimentConfig cfg;
    std::shared_ptr<const TargetDensity> target;
    DiffusionSpec spec;
    ArchSpec arch;
    Vector x_cond;
    bool sampling = true;  // false → coupled Langevin evolution
    std::shared_ptr<const GaussianTarget> langevin_initial;

    static RunContext make(const ExperimentConfig& cfg);
};

struct FitStage {
    PointSet points;
    ModelParams params;
    std::vector<double> loss_history;
    double mala_acceptance = -1.0;  // <0: MALA not used (exact initial draws)
};

struct EvolveStage {
    DenseTrajectory traj;
    SolveStats stats;
    long lambda_inflations = 0;
    std::vector<std::pair<double, double>> residual_curve;  // (time, rms)
};

struct SampleStage {
    WeightedEnsemble ens;
    ReverseRunResult rev;
};

FitStage fit_stage(const RunContext& ctx);
EvolveStage evolve_stage(const RunContext& ctx, const ModelParams& params, const PointSet& x_init);
SampleStage sample_stage(const RunContext& ctx, const ArchSpec& arch, const DenseTrajectory& traj);

/// Recompute the residual curve from a dense trajectory (θ̇ re-solved from the
/// sketched system at each output time).
std::vector<std::pair<double, double>> residual_curve(const RunContext& ctx, const ArchSpec& arch,
                                                      const DenseTrajectory& traj,
                                                      const PointSet& x_init,
                                                      const std::vector<double>& times);

/// Marginal energy u_{S′} on a grid of the single free coordinate.
std::vector<std::pair<double, double>> marginal_curve(const RunContext& ctx, const ArchSpec& arch,
                                                      const DenseTrajectory& traj,
                                                      const std::vector<double>& grid);

void write_fit_outputs(const RunContext& ctx, const FitStage& fit);
void write_evolve_outputs(const RunContext& ctx, const EvolveStage& ev);
void write_sample_outputs(const RunContext& ctx, const SampleStage& sm);

struct PipelineResult {
    FitStage fit;
    EvolveStage evolve;
    std::optional<SampleStage> sample;
    nlohmann::json summary;
};

/// Full pipeline: preprocess → evolution → (sampling experiments) reverse
/// sampling with unbiasing. Writes every artifact file plus summary.json;
/// wall-clock timings go to timing.json, which is the one non-deterministic
/// output.
PipelineResult run_pipeline(const ExperimentConfig& cfg, bool write_outputs = true);

// Stage entry points used by the CLI subcommands (operate on files in out_dir).
void cli_fit(const ExperimentConfig& cfg);
void cli_evolve(const ExperimentConfig& cfg);
void cli_sample(const ExperimentConfig& cfg);
void cli_residuals(const ExperimentConfig& cfg, int n_times);
void cli_marginal(const ExperimentConfig& cfg, double lo, double hi, int count);

}  // namespace mne

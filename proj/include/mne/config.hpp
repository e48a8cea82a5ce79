#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mne/model.hpp"

namespace mne {

/// One run's worth of knobs. `defaults_for(experiment)` reproduces the
/// reference setup of each experiment; desk-scale presets live in presets/ as
/// plain JSON overrides of these defaults.
struct ExperimentConfig {
    std::string experiment = "gaussian_check";
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    // collocation / sketch / regularization
    int n_points = 10000;   // N
    int sketch_dim = 700;   // n
    double epsilon = 1e-3;  // ε; λ = N·ε²

    // ansatz
    std::vector<int> hidden = {128, 128};
    std::string activation = "softplus";

    // diffusion
    double sigma = std::sqrt(2.0);
    double gamma = 1.0;
    IndexSet mask;                   // S; empty → experiment default
    std::vector<double> cond_values; // fixed x_{S'} values, increasing index order

    // horizons and integrator tolerances
    double t_max = 30.0;             // coupled (Langevin) horizon
    double s_f = std::sqrt(10.0);    // time-changed horizon
    double rtol = 1e-3;
    double atol = 1e-6;

    // reverse-diffusion sampler
    int n_samples = 10000;  // M
    int sde_steps = 2000;
    double alpha = 0.5;

    // preprocessing
    int mala_steps = 1000;
    double mala_step_size = 0.02;
    std::string mala_init = "origin";  // origin | normal
    double adam_lr = 1e-3;
    int adam_iters = 20000;

    // target parameters
    std::vector<double> gauss_mean;
    std::vector<std::vector<double>> gauss_cov;
    int gpr_m = 20;
    double gpr_noise_sd = 0.1;
    std::string gpr_dataset_file;  // optional import; empty → generate from seed
    int ac_d = 20;
    double ac_h = 0.05;
    double ac_beta = 0.3;

    // diagnostics
    int residual_points = 0;             // 0 → residual at accepted nodes
    std::vector<double> snapshot_times;  // Langevin energy snapshots
    std::vector<double> snapshot_bounds = {-3.0, 3.0, -3.0, 3.0};
    int snapshot_grid = 41;

    static ExperimentConfig defaults_for(const std::string& experiment);
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
    nlohmann::json to_json() const;

    /// "key=value" override with the JSON key names; values parsed as JSON.
    void apply_override(const std::string& keyval);

    int dimension() const;
    IndexSet effective_mask() const;
    void validate() const;
};

}  // namespace mne

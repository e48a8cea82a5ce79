#include "mne/config.hpp"

#include <fstream>
#include <stdexcept>

namespace mne {

namespace {

void set_experiment_defaults(ExperimentConfig& c) {
    if (c.experiment == "langevin2d") {
        c.n_points = 10000;
        c.sketch_dim = 800;
        c.epsilon = 1e-6;
        c.hidden = {128, 128};
        c.activation = "cosine";
        c.sigma = 0.1;
        c.mask = {1};
        c.t_max = 30.0;
        c.adam_lr = 1e-2;
        c.adam_iters = 5000;
    } else if (c.experiment == "gpr_bayes") {
        c.n_points = 10000;
        c.sketch_dim = 700;
        c.epsilon = 1e-3;
        c.hidden = {128, 128};
        c.activation = "softplus";
        c.mala_steps = 1000;
        c.mala_step_size = 0.02;
        c.mala_init = "origin";
        c.adam_lr = 4e-4;
        c.adam_iters = 20000;
    } else if (c.experiment == "allen_cahn") {
        c.n_points = 10000;
        c.sketch_dim = 2000;
        c.epsilon = 1e-2;
        c.hidden = {128, 128};
        c.activation = "softplus";
        c.mala_steps = 4000;
        c.mala_step_size = 1e-3;
        c.mala_init = "normal";
        c.adam_lr = 1e-4;
        c.adam_iters = 20000;
    } else if (c.experiment == "gaussian_check") {
        c.n_points = 1500;
        c.sketch_dim = 160;
        c.epsilon = 1e-3;
        c.hidden = {64, 64};
        c.activation = "softplus";
        c.n_samples = 2000;
        c.mala_steps = 600;
        c.mala_step_size = 0.1;
        c.mala_init = "normal";
        c.adam_lr = 1e-2;
        c.adam_iters = 3000;
        c.gauss_mean = {0.5, -0.5};
        c.gauss_cov = {{1.25, 0.75}, {0.75, 0.65}};
    } else {
        throw std::invalid_argument("unknown experiment: " + c.experiment);
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults_for(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    set_experiment_defaults(c);
    return c;
}

int ExperimentConfig::dimension() const {
    if (experiment == "langevin2d") return 2;
    if (experiment == "gpr_bayes") return 3;
    if (experiment == "allen_cahn") return ac_d;
    if (experiment == "gaussian_check") return static_cast<int>(gauss_mean.size());
    throw std::invalid_argument("unknown experiment: " + experiment);
}

IndexSet ExperimentConfig::effective_mask() const {
    if (!mask.empty()) return mask;
    if (experiment == "langevin2d") return {1};
    return full_index_set(dimension());
}

void ExperimentConfig::validate() const {
    const int d = dimension();
    if (n_points < 1) throw std::invalid_argument("config: n_points must be >= 1");
    if (sketch_dim < 1 || sketch_dim > n_points)
        throw std::invalid_argument("config: need 1 <= sketch_dim <= n_points");
    if (!(epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be > 0");
    if (!(sigma > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("config: sigma and gamma must be > 0");
    if (hidden.empty()) throw std::invalid_argument("config: hidden widths must be nonempty");
    if (activation != "cosine" && activation != "softplus")
        throw std::invalid_argument("config: activation must be cosine or softplus");
    if (mala_init != "origin" && mala_init != "normal")
        throw std::invalid_argument("config: mala_init must be origin or normal");
    const IndexSet s = effective_mask();
    if (s.empty()) throw std::invalid_argument("config: mask S must be nonempty");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] < 0 || s[i] >= d) throw std::invalid_argument("config: mask index out of range");
        if (i > 0 && s[i] <= s[i - 1])
            throw std::invalid_argument("config: mask must be strictly increasing");
    }
    if (static_cast<int>(s.size() + cond_values.size()) != d &&
        !(cond_values.empty() && static_cast<int>(s.size()) == d))
        throw std::invalid_argument("config: cond_values must fill the complement of mask");
    if (experiment == "gaussian_check") {
        if (gauss_mean.empty()) throw std::invalid_argument("config: gauss_mean missing");
        if (gauss_cov.size() != gauss_mean.size())
            throw std::invalid_argument("config: gauss_cov shape mismatch");
        for (const auto& row : gauss_cov)
            if (row.size() != gauss_mean.size())
                throw std::invalid_argument("config: gauss_cov shape mismatch");
    }
    if (n_samples < 1) throw std::invalid_argument("config: n_samples must be >= 1");
    if (sde_steps < 1) throw std::invalid_argument("config: sde_steps must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("config: alpha must be in (0,1)");
    if (!(rtol > 0.0) || !(atol > 0.0))
        throw std::invalid_argument("config: tolerances must be > 0");
    if (!(t_max > 0.0) || !(s_f > 0.0)) throw std::invalid_argument("config: horizons must be > 0");
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    j["n_points"] = n_points;
    j["sketch_dim"] = sketch_dim;
    j["epsilon"] = epsilon;
    j["hidden"] = hidden;
    j["activation"] = activation;
    j["sigma"] = sigma;
    j["gamma"] = gamma;
    j["mask"] = mask;
    j["cond_values"] = cond_values;
    j["t_max"] = t_max;
    j["s_f"] = s_f;
    j["rtol"] = rtol;
    j["atol"] = atol;
    j["n_samples"] = n_samples;
    j["sde_steps"] = sde_steps;
    j["alpha"] = alpha;
    j["mala_steps"] = mala_steps;
    j["mala_step_size"] = mala_step_size;
    j["mala_init"] = mala_init;
    j["adam_lr"] = adam_lr;
    j["adam_iters"] = adam_iters;
    j["gauss_mean"] = gauss_mean;
    j["gauss_cov"] = gauss_cov;
    j["gpr_m"] = gpr_m;
    j["gpr_noise_sd"] = gpr_noise_sd;
    j["gpr_dataset_file"] = gpr_dataset_file;
    j["ac_d"] = ac_d;
    j["ac_h"] = ac_h;
    j["ac_beta"] = ac_beta;
    j["residual_points"] = residual_points;
    j["snapshot_times"] = snapshot_times;
    j["snapshot_bounds"] = snapshot_bounds;
    j["snapshot_grid"] = snapshot_grid;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c = defaults_for(j.at("experiment").get<std::string>());
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("seed", c.seed);
    get("out_dir", c.out_dir);
    get("n_points", c.n_points);
    get("sketch_dim", c.sketch_dim);
    get("epsilon", c.epsilon);
    get("hidden", c.hidden);
    get("activation", c.activation);
    get("sigma", c.sigma);
    get("gamma", c.gamma);
    get("mask", c.mask);
    get("cond_values", c.cond_values);
    get("t_max", c.t_max);
    get("s_f", c.s_f);
    get("rtol", c.rtol);
    get("atol", c.atol);
    get("n_samples", c.n_samples);
    get("sde_steps", c.sde_steps);
    get("alpha", c.alpha);
    get("mala_steps", c.mala_steps);
    get("mala_step_size", c.mala_step_size);
    get("mala_init", c.mala_init);
    get("adam_lr", c.adam_lr);
    get("adam_iters", c.adam_iters);
    get("gauss_mean", c.gauss_mean);
    get("gauss_cov", c.gauss_cov);
    get("gpr_m", c.gpr_m);
    get("gpr_noise_sd", c.gpr_noise_sd);
    get("gpr_dataset_file", c.gpr_dataset_file);
    get("ac_d", c.ac_d);
    get("ac_h", c.ac_h);
    get("ac_beta", c.ac_beta);
    get("residual_points", c.residual_points);
    get("snapshot_times", c.snapshot_times);
    get("snapshot_bounds", c.snapshot_bounds);
    get("snapshot_grid", c.snapshot_grid);
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config: failed to parse " + path + ": " + e.what());
    }
    return from_json(j);
}

void ExperimentConfig::apply_override(const std::string& keyval) {
    const auto eq = keyval.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must look like key=value: " + keyval);
    const std::string key = keyval.substr(0, eq);
    const std::string value = keyval.substr(eq + 1);
    nlohmann::json j = to_json();
    if (!j.contains(key)) throw std::invalid_argument("unknown config key: " + key);
    nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;  // bare strings
    j[key] = parsed;
    *this = from_json(j);
}

}  // namespace mne

#include "mne/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mne/io.hpp"
#include "mne/rng.hpp"

namespace mne {

namespace {

namespace fs = std::filesystem;

std::string path_in(const ExperimentConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PointSet load_points_csv(const std::string& path) {
    const auto rows = read_csv(path);
    if (rows.empty()) throw std::runtime_error("empty point file: " + path);
    const int d = static_cast<int>(rows.front().size());
    Matrix pts(d, static_cast<int>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (int i = 0; i < d; ++i) pts(i, static_cast<int>(j)) = rows[j][i];
    return PointSet(std::move(pts));
}

void save_points_csv(const std::string& path, const PointSet& pts) {
    std::vector<std::string> header(pts.dim());
    for (int i = 0; i < pts.dim(); ++i) header[i] = "x" + std::to_string(i);
    std::vector<std::vector<double>> rows(pts.count(), std::vector<double>(pts.dim()));
    for (int j = 0; j < pts.count(); ++j)
        for (int i = 0; i < pts.dim(); ++i) rows[j][i] = pts.x(i, j);
    write_csv(path, header, rows);
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    return out;
}

}  // namespace

RunContext RunContext::make(const ExperimentConfig& cfg) {
    cfg.validate();
    RunContext ctx;
    ctx.cfg = cfg;
    ctx.arch.input_dim = cfg.dimension();
    ctx.arch.hidden = cfg.hidden;
    ctx.arch.activation = activation_from_string(cfg.activation);
    ctx.x_cond = Eigen::Map<const Vector>(cfg.cond_values.data(),
                                          static_cast<Eigen::Index>(cfg.cond_values.size()));

    if (cfg.experiment == "langevin2d") {
        LangevinSystem sys = langevin_system();
        sys.spec.sigma = cfg.sigma;
        sys.spec.mask = cfg.effective_mask();
        ctx.spec = sys.spec;
        ctx.langevin_initial = sys.initial;
        ctx.sampling = false;
        return ctx;
    }

    ctx.spec.drift = DriftKind::Ou;
    ctx.spec.sigma = cfg.sigma;
    ctx.spec.gamma = cfg.gamma;
    ctx.spec.mask = cfg.effective_mask();
    if (cfg.experiment == "gaussian_check") {
        const int d = cfg.dimension();
        Vector mean = Eigen::Map<const Vector>(cfg.gauss_mean.data(), d);
        Matrix cov(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) cov(i, j) = cfg.gauss_cov[i][j];
        ctx.target = std::make_shared<GaussianTarget>(std::move(mean), std::move(cov));
    } else if (cfg.experiment == "gpr_bayes") {
        GprDataset data = cfg.gpr_dataset_file.empty()
                              ? GprDataset::generate(cfg.gpr_m, cfg.gpr_noise_sd,
                                                     substream_seed(cfg.seed, "dataset"))
                              : GprDataset::load_csv(cfg.gpr_dataset_file);
        ctx.target = std::make_shared<GprPosteriorTarget>(std::move(data));
    } else if (cfg.experiment == "allen_cahn") {
        ctx.target = std::make_shared<AllenCahnTarget>(cfg.ac_d, cfg.ac_h, cfg.ac_beta);
    }
    return ctx;
}

FitStage fit_stage(const RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    FitStage out;

    if (!ctx.sampling) {
        // Exact draws from the known Gaussian initial density; no MCMC needed.
        Rng rng(substream_seed(cfg.seed, "colloc-init"));
        const GaussianTarget& init = *ctx.langevin_initial;
        const SpdFactor cov_f = cholesky(init.covariance());
        Matrix pts(2, cfg.n_points);
        for (int j = 0; j < cfg.n_points; ++j) {
            Vector z(2);
            z << rng.normal(), rng.normal();
            pts.col(j) = init.mean() + cov_f.lower() * z;
        }
        out.points = PointSet(std::move(pts));
        AdamConfig acfg;
        acfg.learning_rate = cfg.adam_lr;
        acfg.n_iters = cfg.adam_iters;
        acfg.seed = substream_seed(cfg.seed, "adam-init");
        FitResult fit = adam_fit(init, out.points, ctx.arch, acfg);
        out.params = std::move(fit.params);
        out.loss_history = std::move(fit.loss_history);
        return out;
    }

    MalaConfig mcfg;
    mcfg.n_steps = cfg.mala_steps;
    mcfg.step_size = cfg.mala_step_size;
    mcfg.n_walkers = cfg.n_points;
    mcfg.init = cfg.mala_init == "origin" ? MalaConfig::Init::Origin
                                          : MalaConfig::Init::StandardNormal;
    mcfg.seed = substream_seed(cfg.seed, "mala");
    MalaResult mala = mala_run(*ctx.target, mcfg);
    out.points = std::move(mala.points);
    out.mala_acceptance = mala.acceptance_rate;

    AdamConfig acfg;
    acfg.learning_rate = cfg.adam_lr;
    acfg.n_iters = cfg.adam_iters;
    acfg.seed = substream_seed(cfg.seed, "adam-init");
    FitResult fit = adam_fit(*ctx.target, out.points, ctx.arch, acfg);
    out.params = std::move(fit.params);
    out.loss_history = std::move(fit.loss_history);
    return out;
}

namespace {

MneEvolution make_evolution(const RunContext& ctx, const MlpEnergy& model,
                            const PointSet& x_init) {
    const ExperimentConfig& cfg = ctx.cfg;
    const RegSpec reg = reg_param(cfg.n_points, cfg.epsilon);
    SketchOp sketch = SketchOp::make(cfg.n_points, cfg.sketch_dim,
                                     substream_seed(cfg.seed, "sketch"));
    if (ctx.sampling) {
        CollocationPlan plan =
            CollocationPlan::analytic_ou(x_init, substream_seed(cfg.seed, "Z"));
        return MneEvolution(model, ctx.spec, std::move(plan), std::move(sketch), reg,
                            MneEvolution::Mode::TimeChangedOu);
    }
    CollocationPlan plan = CollocationPlan::coupled(x_init);
    return MneEvolution(model, ctx.spec, std::move(plan), std::move(sketch), reg,
                        MneEvolution::Mode::CoupledDrift);
}

}  // namespace

EvolveStage evolve_stage(const RunContext& ctx, const ModelParams& params,
                         const PointSet& x_init) {
    const ExperimentConfig& cfg = ctx.cfg;
    const MlpEnergy model(params.arch);
    MneEvolution evo = make_evolution(ctx, model, x_init);

    EvolveStage out;
    OdeProblem prob;
    prob.t0 = 0.0;
    prob.t1 = ctx.sampling ? cfg.s_f : cfg.t_max;
    prob.y0 = evo.initial_state(params.theta);
    prob.rtol = cfg.rtol;
    prob.atol = cfg.atol;
    long inflations = 0;
    prob.rhs = [&](double t, const Vector& y, Vector& dy) {
        evo.rhs(t, y, dy);
        if (evo.last_diag().lambda_inflated) ++inflations;
    };
    out.traj = solve_ode(prob, &out.stats);
    out.lambda_inflations = inflations;

    std::vector<double> times = cfg.residual_points > 0
                                    ? linspace(prob.t0, prob.t1, cfg.residual_points)
                                    : out.traj.nodes();
    out.residual_curve.reserve(times.size());
    for (double t : times)
        out.residual_curve.emplace_back(t, evo.residual_at(t, out.traj.value(t)));
    return out;
}

std::vector<std::pair<double, double>> residual_curve(const RunContext& ctx, const ArchSpec& arch,
                                                      const DenseTrajectory& traj,
                                                      const PointSet& x_init,
                                                      const std::vector<double>& times) {
    const MlpEnergy model(arch);
    MneEvolution evo = make_evolution(ctx, model, x_init);
    std::vector<std::pair<double, double>> curve;
    curve.reserve(times.size());
    for (double t : times) curve.emplace_back(t, evo.residual_at(t, traj.value(t)));
    return curve;
}

SampleStage sample_stage(const RunContext& ctx, const ArchSpec& arch,
                         const DenseTrajectory& traj) {
    if (!ctx.sampling)
        throw std::invalid_argument("sample_stage: the Langevin experiment has no sampler");
    const ExperimentConfig& cfg = ctx.cfg;
    const MlpEnergy model(arch);
    ReverseSdeConfig rcfg;
    rcfg.s_f = cfg.s_f;
    rcfg.n_steps = cfg.sde_steps;
    rcfg.n_samples = cfg.n_samples;
    rcfg.alpha = cfg.alpha;
    rcfg.seed = cfg.seed;
    SampleStage out;
    const Vector theta0 = traj.value(0.0).head(model.n_params());
    out.rev = run_reverse_sampler(out.ens, rcfg, ctx.spec, model, traj, theta0,
                                  ctx.target.get(), ctx.x_cond);
    return out;
}

std::vector<std::pair<double, double>> marginal_curve(const RunContext& ctx, const ArchSpec& arch,
                                                      const DenseTrajectory& traj,
                                                      const std::vector<double>& grid) {
    const MlpEnergy model(arch);
    const IndexSet sprime = complement_index_set(ctx.spec.mask, model.dim());
    if (sprime.size() != 1)
        throw std::invalid_argument("marginal_curve: exactly one free coordinate required");
    const Vector theta_sf = traj.final_state().head(model.n_params());
    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    for (double x : grid) {
        Vector v(1);
        v << x;
        out.emplace_back(x, marginal_energy(model, theta_sf, ctx.spec.mask, v));
    }
    return out;
}

void write_fit_outputs(const RunContext& ctx, const FitStage& fit) {
    const ExperimentConfig& cfg = ctx.cfg;
    fs::create_directories(cfg.out_dir);
    save_points_csv(path_in(cfg, "colloc.csv"), fit.points);
    save_params(fit.params, path_in(cfg, "params_init.json"));
    std::vector<std::vector<double>> rows;
    rows.reserve(fit.loss_history.size());
    for (std::size_t i = 0; i < fit.loss_history.size(); ++i)
        rows.push_back({static_cast<double>(i), fit.loss_history[i]});
    write_csv(path_in(cfg, "loss_history.csv"), {"iter", "loss"}, rows);
    if (cfg.experiment == "gpr_bayes") {
        const auto* gpr = dynamic_cast<const GprPosteriorTarget*>(ctx.target.get());
        if (gpr) gpr->dataset().save_csv(path_in(cfg, "dataset.csv"));
    }
}

void write_evolve_outputs(const RunContext& ctx, const EvolveStage& ev) {
    const ExperimentConfig& cfg = ctx.cfg;
    fs::create_directories(cfg.out_dir);
    ev.traj.save(path_in(cfg, "trajectory.bin"));
    std::vector<std::vector<double>> rows;
    rows.reserve(ev.residual_curve.size());
    for (const auto& [t, r] : ev.residual_curve) rows.push_back({t, r});
    write_csv(path_in(cfg, "residuals.csv"), {"time", "rms_residual"}, rows);

    if (!ctx.sampling && !cfg.snapshot_times.empty()) {
        const MlpEnergy model(ctx.arch);
        const auto& b = cfg.snapshot_bounds;
        const auto qs = linspace(b[0], b[1], cfg.snapshot_grid);
        const auto ps = linspace(b[2], b[3], cfg.snapshot_grid);
        std::vector<std::vector<double>> snap;
        for (double t : cfg.snapshot_times) {
            const Vector theta = ev.traj.value(t).head(model.n_params());
            Matrix grid(2, static_cast<int>(qs.size() * ps.size()));
            int col = 0;
            for (double q : qs)
                for (double p : ps) grid.col(col++) << q, p;
            const Vector u = model.eval(theta, PointSet(std::move(grid)));
            col = 0;
            for (double q : qs)
                for (double p : ps) {
                    snap.push_back({t, q, p, u[col]});
                    ++col;
                }
        }
        write_csv(path_in(cfg, "snapshots.csv"), {"time", "q", "p", "u"}, snap);
    }
}

void write_sample_outputs(const RunContext& ctx, const SampleStage& sm) {
    const ExperimentConfig& cfg = ctx.cfg;
    fs::create_directories(cfg.out_dir);
    const PointSet pts = sm.ens.assemble();
    std::vector<std::string> header;
    for (int i = 0; i < pts.dim(); ++i) header.push_back("x" + std::to_string(i));
    header.push_back("log_weight");
    std::vector<std::vector<double>> rows(pts.count());
    for (int j = 0; j < pts.count(); ++j) {
        rows[j].resize(pts.dim() + 1);
        for (int i = 0; i < pts.dim(); ++i) rows[j][i] = pts.x(i, j);
        rows[j][pts.dim()] = sm.ens.logw[j];
    }
    write_csv(path_in(cfg, "ensemble.csv"), header, rows);

    std::vector<std::vector<double>> ess_rows;
    ess_rows.reserve(sm.rev.ess_curve.size());
    for (const auto& [s, e] : sm.rev.ess_curve) ess_rows.push_back({s, e});
    write_csv(path_in(cfg, "ess_curve.csv"), {"s", "ess_per_sample"}, ess_rows);
}

PipelineResult run_pipeline(const ExperimentConfig& cfg, bool write_outputs) {
    const RunContext ctx = RunContext::make(cfg);
    PipelineResult result;
    nlohmann::json timing;
    const auto t_start = std::chrono::steady_clock::now();

    auto t0 = std::chrono::steady_clock::now();
    result.fit = fit_stage(ctx);
    timing["fit_seconds"] = seconds_since(t0);
    if (write_outputs) write_fit_outputs(ctx, result.fit);

    t0 = std::chrono::steady_clock::now();
    result.evolve = evolve_stage(ctx, result.fit.params, result.fit.points);
    timing["evolve_seconds"] = seconds_since(t0);
    if (write_outputs) write_evolve_outputs(ctx, result.evolve);

    if (ctx.sampling) {
        t0 = std::chrono::steady_clock::now();
        result.sample = sample_stage(ctx, result.fit.params.arch, result.evolve.traj);
        timing["sample_seconds"] = seconds_since(t0);
        if (write_outputs) write_sample_outputs(ctx, *result.sample);
    }

    nlohmann::json summary;
    summary["schema"] = "mne-run-summary-v1";
    summary["config"] = cfg.to_json();
    summary["lambda"] = reg_param(cfg.n_points, cfg.epsilon).lambda;
    summary["param_count"] = param_count(ctx.arch);
    nlohmann::json fitj;
    if (result.fit.mala_acceptance >= 0.0) fitj["mala_acceptance_rate"] = result.fit.mala_acceptance;
    fitj["adam_final_loss"] =
        result.fit.loss_history.empty() ? 0.0 : result.fit.loss_history.back();
    summary["fit"] = fitj;
    nlohmann::json evj;
    evj["accepted_steps"] = result.evolve.stats.accepted;
    evj["rejected_steps"] = result.evolve.stats.rejected;
    evj["rhs_evaluations"] = result.evolve.stats.rhs_evals;
    evj["lambda_inflations"] = result.evolve.lambda_inflations;
    if (!result.evolve.residual_curve.empty()) {
        evj["residual_initial"] = result.evolve.residual_curve.front().second;
        evj["residual_final"] = result.evolve.residual_curve.back().second;
    }
    summary["evolve"] = evj;
    if (result.sample) {
        nlohmann::json smj;
        smj["final_ess_per_sample"] = ess(result.sample->ens.logw) / cfg.n_samples;
        smj["resample_events"] = result.sample->rev.resample_events;
        summary["sample"] = smj;
    }
    result.summary = summary;

    if (write_outputs) {
        fs::create_directories(cfg.out_dir);
        std::ofstream out(path_in(cfg, "summary.json"));
        out << summary.dump(2) << "\n";
        timing["total_seconds"] = seconds_since(t_start);
        std::ofstream tout(path_in(cfg, "timing.json"));
        tout << timing.dump(2) << "\n";
    }
    return result;
}

void cli_fit(const ExperimentConfig& cfg) {
    const RunContext ctx = RunContext::make(cfg);
    const FitStage fit = fit_stage(ctx);
    write_fit_outputs(ctx, fit);
}

void cli_evolve(const ExperimentConfig& cfg) {
    const RunContext ctx = RunContext::make(cfg);
    const ModelParams params = load_params(path_in(cfg, "params_init.json"));
    const PointSet x_init = load_points_csv(path_in(cfg, "colloc.csv"));
    if (x_init.count() != cfg.n_points)
        throw std::runtime_error("evolve: colloc.csv point count does not match n_points");
    const EvolveStage ev = evolve_stage(ctx, params, x_init);
    write_evolve_outputs(ctx, ev);
}

void cli_sample(const ExperimentConfig& cfg) {
    const RunContext ctx = RunContext::make(cfg);
    const ModelParams params = load_params(path_in(cfg, "params_init.json"));
    const DenseTrajectory traj = DenseTrajectory::load(path_in(cfg, "trajectory.bin"));
    const SampleStage sm = sample_stage(ctx, params.arch, traj);
    write_sample_outputs(ctx, sm);
}

void cli_residuals(const ExperimentConfig& cfg, int n_times) {
    const RunContext ctx = RunContext::make(cfg);
    const ModelParams params = load_params(path_in(cfg, "params_init.json"));
    const PointSet x_init = load_points_csv(path_in(cfg, "colloc.csv"));
    const DenseTrajectory traj = DenseTrajectory::load(path_in(cfg, "trajectory.bin"));
    const std::vector<double> times = n_times > 0 ? linspace(traj.t0(), traj.t1(), n_times)
                                                  : traj.nodes();
    const auto curve = residual_curve(ctx, params.arch, traj, x_init, times);
    std::vector<std::vector<double>> rows;
    for (const auto& [t, r] : curve) rows.push_back({t, r});
    write_csv(path_in(cfg, "residuals.csv"), {"time", "rms_residual"}, rows);
}

void cli_marginal(const ExperimentConfig& cfg, double lo, double hi, int count) {
    const RunContext ctx = RunContext::make(cfg);
    const ModelParams params = load_params(path_in(cfg, "params_init.json"));
    const DenseTrajectory traj = DenseTrajectory::load(path_in(cfg, "trajectory.bin"));
    const auto curve = marginal_curve(ctx, params.arch, traj, linspace(lo, hi, count));
    std::vector<std::vector<double>> rows;
    for (const auto& [x, u] : curve) rows.push_back({x, u});
    write_csv(path_in(cfg, "marginal.csv"), {"x", "energy"}, rows);
}

}  // namespace mne

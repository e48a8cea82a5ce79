#pragma once

#include <cmath>
#include <cstdint>

#include "mne/model.hpp"

namespace mne {

/// Drift catalog. Each entry carries a closed-form divergence, which the
/// energy-form evolution operator needs; automatic divergence of arbitrary
/// drifts is out of scope.
enum class DriftKind {
    Ou,                  // b(x) = −γ·χ_S⊙x
    UnderdampedLangevin  // d=2, b(q,p) = (p, F_t(q)), F_t(q) = −q + e^{−q²/2}·cos t
};

/// dX = b_t(X)dt + σ·χ_S⊙dB: drift, diffusion coefficient, damping (OU) and
/// the index set S of diffused coordinates.
struct DiffusionSpec {
    DriftKind drift = DriftKind::Ou;
    double sigma = std::sqrt(2.0);
    double gamma = 1.0;
    IndexSet mask;  // S
};

double langevin_forcing(double q, double t);

/// Drift values at each point, d×N.
Matrix drift_field(const DiffusionSpec& spec, const PointSet& pts, double t);

/// ∇·b_t, closed form: −γ|S| for OU, 0 for the Langevin system.
double drift_divergence(const DiffusionSpec& spec);

/// Energy-form evolution operator
///   A_t[u] = ∇·b_t − b_t·∇u + (σ²/2)·Δ_S u − (σ²/2)·|∇_S u|²
/// evaluated pointwise on the current ansatz.
Vector apply_operator(const DiffusionSpec& spec, const EnergyModel& model, const Vector& theta,
                      const PointSet& pts, double t);

/// Time-changed operator s·A[u] at t(s) = s²/2 (OU drift only, which is what
/// makes the operator time-independent in the first place).
Vector time_changed_operator(const DiffusionSpec& spec, const EnergyModel& model,
                             const Vector& theta, const PointSet& pts, double s);

/// Collocation-point evolution: either the closed-form OU bridge driven by a
/// fixed normal draw Z, or the transport ODE coupled to the parameters.
struct CollocationPlan {
    enum class Mode { AnalyticOu, CoupledOde };

    PointSet x_init;
    Matrix z;  // d×N standard normal, drawn once and fixed
    Mode mode = Mode::AnalyticOu;

    static CollocationPlan analytic_ou(PointSet x_init, std::uint64_t z_seed);
    static CollocationPlan coupled(PointSet x_init);
};

/// X(t) = (1−χ_S)⊙X_init + χ_S⊙[e^{−γt}·X_init + √((σ²/2γ)(1−e^{−2γt}))·Z].
PointSet colloc_analytic(const CollocationPlan& plan, const DiffusionSpec& spec, double t);

/// Transport velocity Ẋ = b_t(X) + (σ²/2)·χ_S⊙∇u_θ(X).
Matrix colloc_coupled_rhs(const DiffusionSpec& spec, const EnergyModel& model,
                          const Vector& theta, const PointSet& pts, double t);

}  // namespace mne

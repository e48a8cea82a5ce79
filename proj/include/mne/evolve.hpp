#pragma once

#include "mne/diffusion.hpp"
#include "mne/mne_core.hpp"
#include "mne/model.hpp"
#include "mne/ode.hpp"

namespace mne {

/// Right-hand side of the parameter evolution: per evaluation, assemble the
/// parameter Jacobian Φ at the current collocation points, the operator values
/// A[u_θ], and solve the sketched ridge problem for θ̇.
///
/// Two modes mirror the two collocation mechanisms:
///  - TimeChangedOu: state is θ alone; X(s) follows the closed-form OU bridge
///    at t(s) = s²/2 and the operator carries the time-change factor s.
///  - CoupledDrift: state is [θ; vec(X)]; X follows the transport ODE jointly
///    with θ and the operator is applied at physical time t.
///
/// Instances hold a mutable Jacobian workspace, so one instance must not be
/// used by several concurrent solves; independent trajectories get their own.
class MneEvolution {
public:
    enum class Mode { TimeChangedOu, CoupledDrift };

    MneEvolution(const EnergyModel& model, DiffusionSpec spec, CollocationPlan plan,
                 SketchOp sketch, RegSpec reg, Mode mode);

    int n_points() const { return plan_.x_init.count(); }
    int state_size() const;
    Mode mode() const { return mode_; }

    Vector initial_state(const Vector& theta0) const;
    Vector theta_of(const Vector& state) const;
    PointSet points_at(double t, const Vector& state) const;

    void rhs(double t, const Vector& state, Vector& dstate) const;

    /// RMS collocation residual (1/√N)·‖Φᵀθ̇ − A‖ at (t, state), with θ̇
    /// re-solved from the sketched system (not read off an interpolant).
    double residual_at(double t, const Vector& state) const;

    const SolveDiag& last_diag() const { return diag_; }

private:
    Vector operator_values(double t, const Vector& theta, const PointSet& pts) const;

    const EnergyModel& model_;
    DiffusionSpec spec_;
    CollocationPlan plan_;
    SketchOp sketch_;
    RegSpec reg_;
    Mode mode_;
    mutable Matrix phi_;  // p×N workspace
    mutable SolveDiag diag_;
};

}  // namespace mne

#pragma once

#include "mne/la.hpp"
#include "mne/sketch.hpp"

namespace mne {

/// Ridge regularization λ = N·ε², with ε the pointwise residual tolerance
/// scale the constraint softness is expressed in.
struct RegSpec {
    double epsilon;
    double lambda;
};

RegSpec reg_param(int n_points, double epsilon);

/// Per-evaluation diagnostics for the sketched solve.
struct SolveDiag {
    double gram_condition_estimate = 0.0;  // (max/min Cholesky diagonal)²
    bool lambda_inflated = false;          // retried with 10·λ after a factorization failure
};

/// Parameter velocity from the sketched ridge problem:
///   θ̇ = Φ̃ (Φ̃ᵀΦ̃ + λ·I_n)⁻¹ Ω·a,  Φ̃ = Φ·Ωᵀ.
/// The n×n Gram system is solved by Cholesky; on a factorization failure the
/// solve retries once with λ inflated by 10 and reports it through `diag` and
/// the warning channel instead of aborting mid-trajectory.
Vector theta_dot_sketched(const Matrix& phi, const Vector& a_vals, const SketchOp& sketch,
                          const RegSpec& reg, SolveDiag* diag = nullptr);

/// Same with Φ̃ precomputed (the hot loop reuses the sketched Jacobian).
Vector theta_dot_sketched_pre(const Matrix& phi_sk, const Vector& omega_a, const RegSpec& reg,
                              SolveDiag* diag = nullptr);

/// Unsketched N-side form θ̇ = Φ (ΦᵀΦ + λ·I_N)⁻¹ a; testing/oracle path.
Vector theta_dot_unsketched(const Matrix& phi, const Vector& a_vals, const RegSpec& reg);

/// Root-mean-square residual (1/√N)·‖Φᵀθ̇ − a‖ of the collocation constraints.
double residual_rms(const Matrix& phi, const Vector& theta_dot, const Vector& a_vals);

}  // namespace mne

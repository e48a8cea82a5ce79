#pragma once

#include "mne/model.hpp"

namespace mne {

/// Separable quadratic energy u(x) = c₀ + Σ_i (a_i·x_i + b_i·x_i²) with
/// θ = (c₀, a_1..a_d, b_1..b_d). The Ornstein-Uhlenbeck evolution of a
/// Gaussian stays inside this family, which makes it the exact-model
/// validation path for the parameter dynamics and the reverse-pass weights.
class QuadraticEnergy final : public EnergyModel {
public:
    explicit QuadraticEnergy(int d) : d_(d) {}

    int dim() const override { return d_; }
    int n_params() const override { return 1 + 2 * d_; }

    /// θ for the Gaussian N(mean, diag(var)): b_i = 1/(2v_i), a_i = −m_i/v_i.
    static Vector gaussian_theta(const Vector& mean, const Vector& var);

    /// Per-coordinate mean/variance encoded by θ (requires b_i > 0).
    static void gaussian_moments(const Vector& theta, Vector& mean, Vector& var);

    Vector eval(const Vector& theta, const PointSet& pts) const override;
    Matrix grad_x(const Vector& theta, const PointSet& pts) const override;
    Vector lap_masked(const Vector& theta, const PointSet& pts,
                      const IndexSet& mask) const override;
    void param_jacobian_into(const Vector& theta, const PointSet& pts,
                             Matrix& jac) const override;
    Vector dir_param_deriv(const Vector& theta, const Vector& v,
                           const PointSet& pts) const override;

private:
    int d_;
};

}  // namespace mne

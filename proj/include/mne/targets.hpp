#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "mne/diffusion.hpp"
#include "mne/la.hpp"

namespace mne {

/// Target density ρ(x) ∝ e^{−u(x)} with known energy and score ∇u. Energies
/// may return +inf for rejected regions (e.g. failed kernel factorizations);
/// scores are only queried at finite-energy points.
class TargetDensity {
public:
    virtual ~TargetDensity() = default;
    virtual int dim() const = 0;
    virtual double energy(const Vector& x) const = 0;
    virtual Vector score(const Vector& x) const = 0;
    virtual std::string label() const = 0;

    Vector energy_batch(const Matrix& pts) const;  // one column per point
    Matrix score_batch(const Matrix& pts) const;
};

class GaussianTarget final : public TargetDensity {
public:
    GaussianTarget(Vector mean, Matrix covariance);

    int dim() const override { return static_cast<int>(mean_.size()); }
    double energy(const Vector& x) const override;
    Vector score(const Vector& x) const override;
    std::string label() const override { return "gaussian"; }

    const Vector& mean() const { return mean_; }
    const Matrix& covariance() const { return cov_; }

private:
    Vector mean_;
    Matrix cov_;
    Matrix precision_;
};

/// Periodic 1-d field with the double-well Allen-Cahn potential
///   u(x) = (β/2)·Σ_{i=0}^{d−1} [((x_{i+1}−x_i)/h)² + (x_i²−1)²],  x_d = x₀.
class AllenCahnTarget final : public TargetDensity {
public:
    AllenCahnTarget(int d = 20, double h = 0.05, double beta = 0.3);

    int dim() const override { return d_; }
    double energy(const Vector& x) const override;
    Vector score(const Vector& x) const override;
    std::string label() const override { return "allen_cahn"; }

private:
    int d_;
    double h_, beta_;
};

struct GprDataset {
    Vector t;  // regression inputs on [−1, 1]
    Vector y;  // sin(5t) + noise

    static GprDataset generate(int m, double noise_sd, std::uint64_t seed);
    void save_csv(const std::string& path) const;
    static GprDataset load_csv(const std::string& path);
};

/// Posterior energy for fully Bayesian GPR hyperparameters x = (x₁, x₂, x₃),
/// kernel Σ(t,t′) = α²·exp(−(t−t′)²/ρ²) with α = e^{x₁}, ρ = e^{x₂}, noise
/// σ = e^{x₃}, standard normal prior:
///   u(x) = ½·log det K(x) + ½·yᵀK(x)⁻¹y + ½‖x‖²  (constant dropped),
/// score via Cholesky-based trace identities. A failed factorization maps to
/// energy +inf (rejected region).
class GprPosteriorTarget final : public TargetDensity {
public:
    explicit GprPosteriorTarget(GprDataset data);

    int dim() const override { return 3; }
    double energy(const Vector& x) const override;
    Vector score(const Vector& x) const override;
    std::string label() const override { return "gpr_posterior"; }

    const GprDataset& dataset() const { return data_; }

private:
    bool build_kernel(const Vector& x, Matrix& k) const;

    GprDataset data_;
    Matrix dist2_;  // pairwise (t_i − t_j)²
};

/// Nonequilibrium Langevin setup: state (q, p), drift (p, F_t(q)) with
/// F_t(q) = −q + e^{−q²/2}·cos t, diffusion σ = 0.1 on the momentum only, and
/// Gaussian initial energy u₀ = ½[(q−1)² + p²].
struct LangevinSystem {
    DiffusionSpec spec;
    std::shared_ptr<const GaussianTarget> initial;  // ρ₀ ∝ e^{−u₀}
};

LangevinSystem langevin_system();

}  // namespace mne

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mne/model.hpp"

namespace mne {

enum class Activation { Cosine, Softplus };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

/// Plain MLP architecture: input_dim -> hidden widths -> scalar head.
struct ArchSpec {
    int input_dim = 1;
    std::vector<int> hidden = {128, 128};
    Activation activation = Activation::Softplus;
};

/// Number of parameters: Σ_l (in_l·out_l + out_l) plus the scalar head.
int param_count(const ArchSpec& arch);

/// Architecture plus flat parameter vector. Flattening order is fixed and
/// documented for portable serialization: hidden layers in order, each as
/// weights W (out×in, row-major) followed by biases, then the output head
/// weights followed by the output bias.
struct ModelParams {
    ArchSpec arch;
    Vector theta;
};

/// Weights ~ N(0, 1/fan_in) per layer, biases zero; deterministic in the seed.
ModelParams init_params(const ArchSpec& arch, std::uint64_t seed);

/// Scalar MLP energy with closed-form spatial/parameter derivatives, batched
/// over points so the heavy lifting happens inside dense matrix products.
class MlpEnergy final : public EnergyModel {
public:
    explicit MlpEnergy(ArchSpec arch);

    int dim() const override { return arch_.input_dim; }
    int n_params() const override { return n_params_; }
    const ArchSpec& arch() const { return arch_; }

    Vector eval(const Vector& theta, const PointSet& pts) const override;
    Matrix grad_x(const Vector& theta, const PointSet& pts) const override;
    Vector lap_masked(const Vector& theta, const PointSet& pts,
                      const IndexSet& mask) const override;
    DerivativeBundle derivatives(const Vector& theta, const PointSet& pts,
                                 const IndexSet& grad_set,
                                 const IndexSet& lap_set) const override;
    void param_jacobian_into(const Vector& theta, const PointSet& pts,
                             Matrix& jac) const override;
    Vector dir_param_deriv(const Vector& theta, const Vector& v,
                           const PointSet& pts) const override;

    /// Score-matching objective L(θ) = (1/N)·Σ_j‖∇u_θ(x_j) − s_j‖² and its
    /// exact parameter gradient, assembled from mixed ∂²u/∂θ∂x terms.
    double score_loss_grad(const Vector& theta, const PointSet& pts,
                           const Matrix& target_scores, Vector& grad) const;

private:
    struct Layout {
        int w_offset;  // into theta
        int b_offset;
        int in;
        int out;
    };

    void check_point_dim(const PointSet& pts) const;
    void forward(const Vector& theta, const Matrix& x, std::vector<Matrix>& z,
                 std::vector<Matrix>& a) const;

    ArchSpec arch_;
    std::vector<Layout> layers_;  // hidden layers
    int head_w_offset_ = 0;       // output weights (last hidden width)
    int head_b_offset_ = 0;       // output bias (scalar)
    int n_params_ = 0;
};

void save_params(const ModelParams& params, const std::string& path);
ModelParams load_params(const std::string& path);

}  // namespace mne

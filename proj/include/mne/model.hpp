#pragma once

#include <vector>

#include "mne/la.hpp"

namespace mne {

/// Batch of evaluation points, one d-vector per column.
struct PointSet {
    Matrix x;  // d×N

    PointSet() = default;
    explicit PointSet(Matrix pts) : x(std::move(pts)) {}

    int dim() const { return static_cast<int>(x.rows()); }
    int count() const { return static_cast<int>(x.cols()); }
};

/// Sorted 0-based coordinate indices.
using IndexSet = std::vector<int>;

IndexSet full_index_set(int d);
IndexSet complement_index_set(const IndexSet& s, int d);

/// Values, gradient restricted to grad_set, and masked Laplacian Σ_{i∈lap_set}
/// ∂²u/∂x_i², all per point. The fused form exists because the evolution
/// operator and the reverse-pass weight dynamics need all three at once.
struct DerivativeBundle {
    Vector values;   // N
    Matrix grad;     // |grad_set|×N
    Vector lap;      // N
};

/// Scalar energy ansatz u_θ(x) with the derivative surface the parameter
/// evolution needs. Implementations must be pure: identical inputs give
/// bit-identical outputs, and const methods are safe to call concurrently.
class EnergyModel {
public:
    virtual ~EnergyModel() = default;

    virtual int dim() const = 0;
    virtual int n_params() const = 0;

    virtual Vector eval(const Vector& theta, const PointSet& pts) const = 0;

    /// Exact spatial gradient, d×N.
    virtual Matrix grad_x(const Vector& theta, const PointSet& pts) const = 0;

    /// Σ_{i∈mask} ∂²u/∂x_i² per point; empty mask returns zeros.
    virtual Vector lap_masked(const Vector& theta, const PointSet& pts,
                              const IndexSet& mask) const = 0;

    virtual DerivativeBundle derivatives(const Vector& theta, const PointSet& pts,
                                         const IndexSet& grad_set,
                                         const IndexSet& lap_set) const;

    /// Column j = ∇_θ u_θ(x_j); fills a caller-owned p×N buffer so the hot
    /// path can reuse one allocation across evaluations.
    virtual void param_jacobian_into(const Vector& theta, const PointSet& pts,
                                     Matrix& jac) const = 0;
    Matrix param_jacobian(const Vector& theta, const PointSet& pts) const;

    /// ⟨∇_θ u_θ(x_j), v⟩ per point, by one tangent-propagating forward pass.
    virtual Vector dir_param_deriv(const Vector& theta, const Vector& v,
                                   const PointSet& pts) const = 0;
};

}  // namespace mne

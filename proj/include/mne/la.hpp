#pragma once

#include <Eigen/Dense>

namespace mne {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
class SpdFactor {
public:
    explicit SpdFactor(Matrix lower) : lower_(std::move(lower)) {}

    const Matrix& lower() const { return lower_; }
    Eigen::Index size() const { return lower_.rows(); }

private:
    Matrix lower_;
};

/// Cholesky factorization A = L·Lᵀ. Inputs asymmetric beyond a 1e-12 relative
/// tolerance are symmetrized by averaging with a warning. A non-positive pivot
/// raises std::runtime_error naming the failing pivot index.
SpdFactor cholesky(const Matrix& a);

/// Solve A·X = B given the factor of A.
Matrix solve_spd(const SpdFactor& factor, const Matrix& b);
Vector solve_spd(const SpdFactor& factor, const Vector& b);

/// log det A = 2·Σ log L_ii.
double logdet(const SpdFactor& factor);

}  // namespace mne

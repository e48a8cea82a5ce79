#include "mne/quadratic_energy.hpp"

#include <stdexcept>

namespace mne {

Vector QuadraticEnergy::gaussian_theta(const Vector& mean, const Vector& var) {
    const int d = static_cast<int>(mean.size());
    Vector theta = Vector::Zero(1 + 2 * d);
    for (int i = 0; i < d; ++i) {
        if (!(var[i] > 0.0)) throw std::invalid_argument("gaussian_theta: variance must be > 0");
        theta[1 + i] = -mean[i] / var[i];
        theta[1 + d + i] = 0.5 / var[i];
        theta[0] += 0.5 * mean[i] * mean[i] / var[i];
    }
    return theta;
}

void QuadraticEnergy::gaussian_moments(const Vector& theta, Vector& mean, Vector& var) {
    const int d = static_cast<int>((theta.size() - 1) / 2);
    mean.resize(d);
    var.resize(d);
    for (int i = 0; i < d; ++i) {
        const double b = theta[1 + d + i];
        if (!(b > 0.0)) throw std::invalid_argument("gaussian_moments: quadratic coefficient <= 0");
        var[i] = 0.5 / b;
        mean[i] = -theta[1 + i] * var[i];
    }
}

Vector QuadraticEnergy::eval(const Vector& theta, const PointSet& pts) const {
    const auto a = theta.segment(1, d_);
    const auto b = theta.segment(1 + d_, d_);
    Vector u = pts.x.transpose() * a;
    u.noalias() += pts.x.cwiseAbs2().transpose() * b;
    u.array() += theta[0];
    return u;
}

Matrix QuadraticEnergy::grad_x(const Vector& theta, const PointSet& pts) const {
    const auto a = theta.segment(1, d_);
    const auto b = theta.segment(1 + d_, d_);
    Matrix g = 2.0 * (pts.x.array().colwise() * b.array());
    g.colwise() += a;
    return g;
}

Vector QuadraticEnergy::lap_masked(const Vector& theta, const PointSet& pts,
                                   const IndexSet& mask) const {
    double lap = 0.0;
    for (int i : mask) lap += 2.0 * theta[1 + d_ + i];
    return Vector::Constant(pts.count(), lap);
}

void QuadraticEnergy::param_jacobian_into(const Vector& theta, const PointSet& pts,
                                          Matrix& jac) const {
    (void)theta;
    if (jac.rows() != n_params() || jac.cols() != pts.count())
        throw std::invalid_argument("QuadraticEnergy: jacobian buffer has wrong shape");
    jac.row(0).setOnes();
    jac.middleRows(1, d_) = pts.x;
    jac.middleRows(1 + d_, d_) = pts.x.cwiseAbs2();
}

Vector QuadraticEnergy::dir_param_deriv(const Vector& theta, const Vector& v,
                                        const PointSet& pts) const {
    (void)theta;
    const auto va = v.segment(1, d_);
    const auto vb = v.segment(1 + d_, d_);
    Vector du = pts.x.transpose() * va;
    du.noalias() += pts.x.cwiseAbs2().transpose() * vb;
    du.array() += v[0];
    return du;
}

}  // namespace mne

#include "mne/mne_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mne/diag.hpp"

namespace mne {

RegSpec reg_param(int n_points, double epsilon) {
    if (n_points < 1) throw std::invalid_argument("reg_param: N must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("reg_param: epsilon must be > 0");
    return RegSpec{epsilon, static_cast<double>(n_points) * epsilon * epsilon};
}

namespace {

// Factor G + λI, inflating λ once by 10 if the first attempt fails.
SpdFactor factor_gram(Matrix gram, double lambda, SolveDiag* diag) {
    gram = 0.5 * (gram + gram.transpose());
    gram.diagonal().array() += lambda;
    try {
        SpdFactor f = cholesky(gram);
        if (diag) {
            const auto& d = f.lower().diagonal();
            const double ratio = d.maxCoeff() / d.minCoeff();
            diag->gram_condition_estimate = ratio * ratio;
        }
        return f;
    } catch (const std::runtime_error& e) {
        warn("gram factorization failed at lambda=" + std::to_string(lambda) +
             " (" + e.what() + "), retrying with 10x lambda");
        gram.diagonal().array() += 9.0 * lambda;
        SpdFactor f = cholesky(gram);  // a second failure propagates
        if (diag) {
            diag->lambda_inflated = true;
            const auto& d = f.lower().diagonal();
            const double ratio = d.maxCoeff() / d.minCoeff();
            diag->gram_condition_estimate = ratio * ratio;
        }
        return f;
    }
}

}  // namespace

Vector theta_dot_sketched_pre(const Matrix& phi_sk, const Vector& omega_a, const RegSpec& reg,
                              SolveDiag* diag) {
    if (phi_sk.cols() != omega_a.size())
        throw std::invalid_argument("theta_dot_sketched: sketched dimensions mismatch");
    Matrix gram;
    gram.noalias() = phi_sk.transpose() * phi_sk;
    const SpdFactor f = factor_gram(std::move(gram), reg.lambda, diag);
    const Vector beta = solve_spd(f, omega_a);
    return phi_sk * beta;
}

Vector theta_dot_sketched(const Matrix& phi, const Vector& a_vals, const SketchOp& sketch,
                          const RegSpec& reg, SolveDiag* diag) {
    if (phi.cols() != a_vals.size())
        throw std::invalid_argument("theta_dot_sketched: dimension mismatch");
    if (sketch.input_dim() != phi.cols())
        throw std::invalid_argument("theta_dot_sketched: sketch length mismatch");
    const Matrix phi_sk = sketch.apply_rows(phi);
    const Vector omega_a = sketch.apply(a_vals);
    return theta_dot_sketched_pre(phi_sk, omega_a, reg, diag);
}

Vector theta_dot_unsketched(const Matrix& phi, const Vector& a_vals, const RegSpec& reg) {
    if (phi.cols() != a_vals.size())
        throw std::invalid_argument("theta_dot_unsketched: dimension mismatch");
    Matrix gram;
    gram.noalias() = phi.transpose() * phi;
    const SpdFactor f = factor_gram(std::move(gram), reg.lambda, nullptr);
    const Vector beta = solve_spd(f, a_vals);
    return phi * beta;
}

double residual_rms(const Matrix& phi, const Vector& theta_dot, const Vector& a_vals) {
    if (phi.rows() != theta_dot.size() || phi.cols() != a_vals.size())
        throw std::invalid_argument("residual_rms: dimension mismatch");
    const Vector r = phi.transpose() * theta_dot - a_vals;
    return r.norm() / std::sqrt(static_cast<double>(a_vals.size()));
}

}  // namespace mne

#include "mne/targets.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mne/rng.hpp"

namespace mne {

Vector TargetDensity::energy_batch(const Matrix& pts) const {
    Vector out(pts.cols());
#pragma omp parallel for schedule(static)
    for (int j = 0; j < static_cast<int>(pts.cols()); ++j) out[j] = energy(pts.col(j));
    return out;
}

Matrix TargetDensity::score_batch(const Matrix& pts) const {
    Matrix out(pts.rows(), pts.cols());
#pragma omp parallel for schedule(static)
    for (int j = 0; j < static_cast<int>(pts.cols()); ++j) out.col(j) = score(pts.col(j));
    return out;
}

GaussianTarget::GaussianTarget(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance)) {
    if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size())
        throw std::invalid_argument("GaussianTarget: covariance shape mismatch");
    const SpdFactor f = cholesky(cov_);  // throws on a non-SPD covariance
    precision_ = solve_spd(f, Matrix(Matrix::Identity(cov_.rows(), cov_.cols())));
}

double GaussianTarget::energy(const Vector& x) const {
    const Vector r = x - mean_;
    return 0.5 * r.dot(precision_ * r);
}

Vector GaussianTarget::score(const Vector& x) const { return precision_ * (x - mean_); }

AllenCahnTarget::AllenCahnTarget(int d, double h, double beta) : d_(d), h_(h), beta_(beta) {
    if (d < 2) throw std::invalid_argument("AllenCahnTarget: d must be >= 2");
    if (!(h > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("AllenCahnTarget: h and beta must be > 0");
}

double AllenCahnTarget::energy(const Vector& x) const {
    double acc = 0.0;
    for (int i = 0; i < d_; ++i) {
        const double diff = (x[(i + 1) % d_] - x[i]) / h_;
        const double well = x[i] * x[i] - 1.0;
        acc += diff * diff + well * well;
    }
    return 0.5 * beta_ * acc;
}

Vector AllenCahnTarget::score(const Vector& x) const {
    Vector g(d_);
    const double inv_h2 = 1.0 / (h_ * h_);
    for (int i = 0; i < d_; ++i) {
        const double left = x[(i + d_ - 1) % d_];
        const double right = x[(i + 1) % d_];
        g[i] = beta_ * ((2.0 * x[i] - left - right) * inv_h2 +
                        2.0 * x[i] * (x[i] * x[i] - 1.0));
    }
    return g;
}

GprDataset GprDataset::generate(int m, double noise_sd, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("GprDataset: m must be >= 1");
    Rng rng(seed);
    GprDataset data;
    data.t.resize(m);
    data.y.resize(m);
    for (int i = 0; i < m; ++i) {
        data.t[i] = 2.0 * rng.uniform() - 1.0;
        data.y[i] = std::sin(5.0 * data.t[i]) + noise_sd * rng.normal();
    }
    return data;
}

void GprDataset::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("GprDataset::save_csv: cannot open " + path);
    out << "t,y\n";
    char buf[64];
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", t[i], y[i]);
        out << buf;
    }
}

GprDataset GprDataset::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("GprDataset::load_csv: cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> ts, ys;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        ts.push_back(std::stod(a));
        ys.push_back(std::stod(b));
    }
    GprDataset data;
    data.t = Eigen::Map<const Vector>(ts.data(), ts.size());
    data.y = Eigen::Map<const Vector>(ys.data(), ys.size());
    return data;
}

GprPosteriorTarget::GprPosteriorTarget(GprDataset data) : data_(std::move(data)) {
    const Eigen::Index m = data_.t.size();
    dist2_.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            const double d = data_.t[i] - data_.t[j];
            dist2_(i, j) = d * d;
        }
}

bool GprPosteriorTarget::build_kernel(const Vector& x, Matrix& k) const {
    const double alpha2 = std::exp(2.0 * x[0]);
    const double rho2 = std::exp(2.0 * x[1]);
    const double noise2 = std::exp(2.0 * x[2]);
    k = alpha2 * (-dist2_ / rho2).array().exp();
    k.diagonal().array() += noise2;
    return k.allFinite();
}

double GprPosteriorTarget::energy(const Vector& x) const {
    Matrix k;
    if (!build_kernel(x, k)) return std::numeric_limits<double>::infinity();
    try {
        const SpdFactor f = cholesky(k);
        const Vector kinv_y = solve_spd(f, data_.y);
        return 0.5 * logdet(f) + 0.5 * data_.y.dot(kinv_y) + 0.5 * x.squaredNorm();
    } catch (const std::runtime_error&) {
        return std::numeric_limits<double>::infinity();
    }
}

Vector GprPosteriorTarget::score(const Vector& x) const {
    Matrix k;
    if (!build_kernel(x, k))
        throw std::runtime_error("GprPosteriorTarget::score: kernel overflow at this point");
    const double rho2 = std::exp(2.0 * x[1]);
    const double noise2 = std::exp(2.0 * x[2]);
    const SpdFactor f = cholesky(k);
    const Eigen::Index m = k.rows();
    const Matrix kinv = solve_spd(f, Matrix(Matrix::Identity(m, m)));
    const Vector kinv_y = solve_spd(f, data_.y);
    const Matrix a = k - noise2 * Matrix::Identity(m, m);  // noise-free part

    // ∂K/∂x₁ = 2A, ∂K/∂x₂ = A ⊙ (2·D²/ρ²), ∂K/∂x₃ = 2σ²I;
    // ∂u/∂x_k = ½tr(K⁻¹∂K) − ½(K⁻¹y)ᵀ∂K(K⁻¹y) + x_k.
    Vector g(3);
    const Matrix da2 = a.cwiseProduct(dist2_) * (2.0 / rho2);
    g[0] = 0.5 * 2.0 * (kinv.cwiseProduct(a)).sum() - 0.5 * 2.0 * kinv_y.dot(a * kinv_y) + x[0];
    g[1] = 0.5 * (kinv.cwiseProduct(da2)).sum() - 0.5 * kinv_y.dot(da2 * kinv_y) + x[1];
    g[2] = 0.5 * 2.0 * noise2 * kinv.trace() - 0.5 * 2.0 * noise2 * kinv_y.squaredNorm() + x[2];
    return g;
}

LangevinSystem langevin_system() {
    LangevinSystem sys;
    sys.spec.drift = DriftKind::UnderdampedLangevin;
    sys.spec.sigma = 0.1;
    sys.spec.gamma = 1.0;  // not used by this drift
    sys.spec.mask = {1};   // diffusion on the momentum only
    Vector mean(2);
    mean << 1.0, 0.0;
    sys.initial = std::make_shared<GaussianTarget>(mean, Matrix::Identity(2, 2));
    return sys;
}

}  // namespace mne

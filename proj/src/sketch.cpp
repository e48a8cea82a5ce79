#include "mne/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mne/rng.hpp"

namespace mne {

SketchOp::SketchOp(int n_in, int n_out, std::uint64_t seed, std::vector<double> signs,
                   std::vector<int> indices)
    : n_in_(n_in),
      n_out_(n_out),
      seed_(seed),
      signs_(std::move(signs)),
      indices_(std::move(indices)),
      plan_(std::make_shared<DhtPlan>(static_cast<std::size_t>(n_in))) {}

SketchOp SketchOp::make(int n_in, int n_out, std::uint64_t seed) {
    if (n_in < 1) throw std::invalid_argument("SketchOp: N must be >= 1");
    if (n_out < 1 || n_out > n_in) throw std::invalid_argument("SketchOp: need 1 <= n <= N");
    Rng rng(seed);
    std::vector<double> signs(n_in);
    for (auto& s : signs) s = rng.sign();
    // Uniform subset without replacement: partial Fisher-Yates, then sort.
    std::vector<int> pool(n_in);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < n_out; ++i) {
        const int j = i + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n_in - i)));
        std::swap(pool[i], pool[j]);
    }
    std::vector<int> indices(pool.begin(), pool.begin() + n_out);
    std::sort(indices.begin(), indices.end());
    return SketchOp(n_in, n_out, seed, std::move(signs), std::move(indices));
}

SketchOp SketchOp::with_explicit(std::vector<double> signs, std::vector<int> indices) {
    const int n_in = static_cast<int>(signs.size());
    const int n_out = static_cast<int>(indices.size());
    if (n_in < 1 || n_out < 1 || n_out > n_in)
        throw std::invalid_argument("SketchOp: need 1 <= |I| <= |signs|");
    for (double s : signs)
        if (s != 1.0 && s != -1.0) throw std::invalid_argument("SketchOp: signs must be ±1");
    std::sort(indices.begin(), indices.end());
    for (int i = 0; i < n_out; ++i) {
        if (indices[i] < 0 || indices[i] >= n_in || (i > 0 && indices[i] == indices[i - 1]))
            throw std::invalid_argument("SketchOp: indices must be distinct in [0, N)");
    }
    return SketchOp(n_in, n_out, 0, std::move(signs), std::move(indices));
}

Vector SketchOp::apply(const Vector& v) const {
    if (v.size() != n_in_) throw std::invalid_argument("SketchOp::apply: length mismatch");
    std::vector<double> w(n_in_), h(n_in_);
    for (int j = 0; j < n_in_; ++j) w[j] = signs_[j] * v[j];
    std::vector<std::complex<double>> scratch(plan_->scratch_length());
    plan_->dht(w.data(), h.data(), scratch.data());
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_out_));
    Vector out(n_out_);
    for (int i = 0; i < n_out_; ++i) out[i] = scale * h[indices_[i]];
    return out;
}

Matrix SketchOp::apply_rows(const Matrix& m) const {
    if (m.cols() != n_in_) throw std::invalid_argument("SketchOp::apply_rows: column count mismatch");
    const int p = static_cast<int>(m.rows());
    const int n = n_in_;
    Matrix out(p, n_out_);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_out_));
    const int pairs = (p + 1) / 2;
#pragma omp parallel
    {
        std::vector<std::complex<double>> scratch(plan_->scratch_length());
        std::vector<double> u(n), v(n), hu(n), hv(n);
#pragma omp for schedule(static)
        for (int q = 0; q < pairs; ++q) {
            const int r0 = 2 * q;
            const int r1 = r0 + 1;
            if (r1 < p) {
                for (int j = 0; j < n; ++j) {
                    u[j] = signs_[j] * m(r0, j);
                    v[j] = signs_[j] * m(r1, j);
                }
                plan_->dht_pair(u.data(), v.data(), hu.data(), hv.data(), scratch.data());
                for (int i = 0; i < n_out_; ++i) {
                    out(r0, i) = scale * hu[indices_[i]];
                    out(r1, i) = scale * hv[indices_[i]];
                }
            } else {
                for (int j = 0; j < n; ++j) u[j] = signs_[j] * m(r0, j);
                plan_->dht(u.data(), hu.data(), scratch.data());
                for (int i = 0; i < n_out_; ++i) out(r0, i) = scale * hu[indices_[i]];
            }
        }
    }
    return out;
}

}  // namespace mne

#include "mne/hartley.hpp"

#include <cmath>
#include <stdexcept>

namespace mne {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

}  // namespace

Pow2Fft::Pow2Fft(std::size_t n) : n_(n) {
    if (!is_pow2(n)) throw std::invalid_argument("Pow2Fft: length must be a power of two");
    bitrev_.resize(n);
    std::uint32_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t r = 0;
        for (std::uint32_t b = 0; b < log2n; ++b) r |= ((i >> b) & 1u) << (log2n - 1 - b);
        bitrev_[i] = r;
    }
    tw_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double a = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        tw_[k] = {std::cos(a), std::sin(a)};
    }
}

void Pow2Fft::run(std::complex<double>* a, bool inverse) const {
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = bitrev_[i];
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len >> 1;
        const std::size_t step = n / len;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t k = 0; k < half; ++k) {
                std::complex<double> w = tw_[k * step];
                if (inverse) w = std::conj(w);
                const std::complex<double> u = a[base + k];
                const std::complex<double> t = w * a[base + k + half];
                a[base + k] = u + t;
                a[base + k + half] = u - t;
            }
        }
    }
    if (inverse) {
        const double s = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) a[i] *= s;
    }
}

DhtPlan::DhtPlan(std::size_t n)
    : n_(n),
      pow2_(is_pow2(n)),
      m_(pow2_ ? 0 : next_pow2(2 * n - 1)),
      fft_(pow2_ ? n : m_) {
    if (n == 0) throw std::invalid_argument("DhtPlan: length must be >= 1");
    if (pow2_) return;
    chirp_.resize(n);
    // exp(-iπ j²/n) is periodic in j² mod 2n; reducing keeps the trig argument
    // small so the chirp stays accurate for large n.
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t q = (j * j) % (2 * n);
        const double a = -kPi * static_cast<double>(q) / static_cast<double>(n);
        chirp_[j] = {std::cos(a), std::sin(a)};
    }
    std::vector<std::complex<double>> b(m_, {0.0, 0.0});
    b[0] = {1.0, 0.0};
    for (std::size_t j = 1; j < n; ++j) {
        b[j] = std::conj(chirp_[j]);
        b[m_ - j] = std::conj(chirp_[j]);
    }
    fft_.forward(b.data());
    bspec_ = std::move(b);
}

void DhtPlan::dft(std::complex<double>* scratch) const {
    if (pow2_) {
        fft_.forward(scratch);
        return;
    }
    for (std::size_t j = 0; j < n_; ++j) scratch[j] *= chirp_[j];
    for (std::size_t j = n_; j < m_; ++j) scratch[j] = {0.0, 0.0};
    fft_.forward(scratch);
    for (std::size_t j = 0; j < m_; ++j) scratch[j] *= bspec_[j];
    fft_.inverse(scratch);
    for (std::size_t k = 0; k < n_; ++k) scratch[k] *= chirp_[k];
}

void DhtPlan::dht(const double* in, double* out, std::complex<double>* scratch) const {
    for (std::size_t j = 0; j < n_; ++j) scratch[j] = {in[j], 0.0};
    dft(scratch);
    for (std::size_t k = 0; k < n_; ++k) out[k] = scratch[k].real() - scratch[k].imag();
}

void DhtPlan::dht_pair(const double* u, const double* v, double* hu, double* hv,
                       std::complex<double>* scratch) const {
    for (std::size_t j = 0; j < n_; ++j) scratch[j] = {u[j], v[j]};
    dft(scratch);
    // Split the packed spectrum: F(u)_k = (W_k + conj(W_{n-k}))/2,
    // F(v)_k = (W_k - conj(W_{n-k}))/(2i), then take Re - Im of each.
    for (std::size_t k = 0; k < n_; ++k) {
        const std::size_t km = (k == 0) ? 0 : n_ - k;
        const double a = scratch[k].real(), b = scratch[k].imag();
        const double c = scratch[km].real(), d = scratch[km].imag();
        hu[k] = 0.5 * ((a + c) - (b - d));
        hv[k] = 0.5 * ((b + d) + (a - c));
    }
}

std::vector<double> dht(const std::vector<double>& v) {
    DhtPlan plan(v.size());
    std::vector<std::complex<double>> scratch(plan.scratch_length());
    std::vector<double> out(v.size());
    plan.dht(v.data(), out.data(), scratch.data());
    return out;
}

}  // namespace mne

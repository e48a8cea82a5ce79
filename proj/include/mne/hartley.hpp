#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace mne {

/// In-place iterative radix-2 FFT for a fixed power-of-two length, with
/// precomputed bit-reversal and twiddle tables.
class Pow2Fft {
public:
    explicit Pow2Fft(std::size_t n);

    std::size_t length() const { return n_; }
    void forward(std::complex<double>* a) const { run(a, false); }
    void inverse(std::complex<double>* a) const { run(a, true); }  // includes 1/n

private:
    void run(std::complex<double>* a, bool inverse) const;

    std::size_t n_;
    std::vector<std::uint32_t> bitrev_;
    std::vector<std::complex<double>> tw_;  // exp(-2πik/n), k < n/2
};

/// Discrete Hartley transform of a fixed length N:
///   H(v)_k = Σ_j v_j · cas(2πjk/N),  cas(x) = cos(x) + sin(x).
/// Power-of-two lengths run the FFT directly; other lengths go through the
/// Bluestein chirp reduction to a power-of-two FFT, so the exact-length
/// transform is available for every N. Plans are immutable and thread-safe;
/// callers provide scratch so rows can be transformed in parallel.
class DhtPlan {
public:
    explicit DhtPlan(std::size_t n);

    std::size_t length() const { return n_; }
    std::size_t scratch_length() const { return pow2_ ? n_ : m_; }

    /// Complex DFT of scratch[0..n) in place (entries [n..scratch_length) are
    /// free workspace for the chirp path).
    void dft(std::complex<double>* scratch) const;

    /// Hartley transforms of one or two real vectors; the pair variant packs
    /// them into a single complex DFT.
    void dht(const double* in, double* out, std::complex<double>* scratch) const;
    void dht_pair(const double* u, const double* v, double* hu, double* hv,
                  std::complex<double>* scratch) const;

private:
    std::size_t n_;
    bool pow2_;
    std::size_t m_;  // chirp FFT length (0 on the direct path)
    Pow2Fft fft_;
    std::vector<std::complex<double>> chirp_;  // exp(-iπ j²/n)
    std::vector<std::complex<double>> bspec_;  // FFT_m of the chirp kernel
};

/// One-shot transform (plans internally); for repeated use build a DhtPlan.
std::vector<double> dht(const std::vector<double>& v);

}  // namespace mne

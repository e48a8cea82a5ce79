#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mne/hartley.hpp"
#include "mne/la.hpp"

namespace mne {

/// Fixed randomized partial isometry Ω compressing length-N vectors to length
/// n: Ωv = (1/√n)·[H(σ⊙v)]_I with H the discrete Hartley transform, σ i.i.d.
/// random signs and I a uniform random index subset without replacement. Both
/// σ and I derive deterministically from the seed and stay fixed for the life
/// of the operator. With the unnormalized transform this scaling equals the
/// usual √(N/n) × (orthonormal transform) convention, so apply is an exact
/// isometry at n = N and an isometry in expectation otherwise.
class SketchOp {
public:
    static SketchOp make(int n_in, int n_out, std::uint64_t seed);

    /// Test-only: explicit signs/indices so hand-computed cases are exercisable.
    static SketchOp with_explicit(std::vector<double> signs, std::vector<int> indices);

    int input_dim() const { return n_in_; }
    int output_dim() const { return n_out_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<double>& signs() const { return signs_; }
    const std::vector<int>& indices() const { return indices_; }

    Vector apply(const Vector& v) const;

    /// Sketch applied to every row: M (p×N) -> M·Ωᵀ (p×n). Rows are packed in
    /// pairs into complex transforms and processed in parallel.
    Matrix apply_rows(const Matrix& m) const;

private:
    SketchOp(int n_in, int n_out, std::uint64_t seed, std::vector<double> signs,
             std::vector<int> indices);

    int n_in_ = 0;
    int n_out_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> signs_;
    std::vector<int> indices_;
    std::shared_ptr<const DhtPlan> plan_;
};

}  // namespace mne

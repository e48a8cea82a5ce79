#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "mne/la.hpp"

namespace mne {

struct OdeProblem {
    std::function<void(double, const Vector&, Vector&)> rhs;
    double t0 = 0.0;
    double t1 = 1.0;
    Vector y0;
    double rtol = 1e-3;
    double atol = 1e-6;
    double max_step = 0.0;   // 0 → (t1 − t0)/10
    double init_step = 0.0;  // 0 → automatic estimate
};

struct SolveStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

/// Continuous-time representation of an accepted Runge-Kutta trajectory:
/// node states plus the stage derivatives of every step, enough for the
/// method's 4th-order free interpolant and its time derivative. Evaluation at
/// the node times reproduces the stored states; queries outside [t0, t1] are
/// rejected. Immutable after the solve and safe for concurrent reads.
class DenseTrajectory {
public:
    double t0() const { return nodes_.front(); }
    double t1() const { return nodes_.back(); }
    int state_size() const { return static_cast<int>(states_.front().size()); }
    int n_steps() const { return static_cast<int>(stages_.size()); }
    const std::vector<double>& nodes() const { return nodes_; }
    const Vector& final_state() const { return states_.back(); }

    Vector value(double t) const;
    Vector derivative(double t) const;

    void save(const std::string& path) const;
    static DenseTrajectory load(const std::string& path);

private:
    friend DenseTrajectory solve_ode(const OdeProblem&, SolveStats*,
                                     const std::function<void(double, const Vector&)>&);
    int locate(double t) const;

    std::vector<double> nodes_;                   // accepted times, size m+1
    std::vector<Vector> states_;                  // size m+1
    std::vector<std::array<Vector, 7>> stages_;   // size m
};

/// Tsitouras 5(4) with a PI step controller (safety 0.9, step-ratio clamp
/// [0.2, 10]) and error-per-step control against atol + rtol·|y|. `on_accept`
/// fires after each accepted step with the node time and state.
DenseTrajectory solve_ode(const OdeProblem& prob, SolveStats* stats = nullptr,
                          const std::function<void(double, const Vector&)>& on_accept = {});

}  // namespace mne

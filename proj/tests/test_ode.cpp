#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "mne/ode.hpp"

using namespace mne;

namespace {

OdeProblem decay_problem(double rtol = 1e-3, double atol = 1e-6) {
    OdeProblem prob;
    prob.rhs = [](double, const Vector& y, Vector& dy) { dy = -y; };
    prob.t0 = 0.0;
    prob.t1 = 1.0;
    prob.y0 = Vector::Ones(1);
    prob.rtol = rtol;
    prob.atol = atol;
    return prob;
}

}  // namespace

TEST_CASE("solve_ode: constant solution is exact") {
    OdeProblem prob;
    prob.rhs = [](double, const Vector&, Vector& dy) { dy.setZero(); };
    prob.t0 = 0.0;
    prob.t1 = 5.0;
    prob.y0 = (Vector(2) << 3.5, -1.25).finished();
    const DenseTrajectory traj = solve_ode(prob);
    CHECK(traj.final_state() == prob.y0);
    CHECK(traj.value(2.3) == prob.y0);
}

TEST_CASE("solve_ode: exponential decay within tolerance") {
    const DenseTrajectory traj = solve_ode(decay_problem());
    CHECK(std::abs(traj.final_state()[0] - std::exp(-1.0)) <= 1e-4);
}

TEST_CASE("solve_ode: harmonic oscillator energy drift over 10 periods") {
    OdeProblem prob;
    prob.rhs = [](double, const Vector& y, Vector& dy) {
        dy.resize(2);
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    prob.t0 = 0.0;
    prob.t1 = 10.0 * 2.0 * M_PI;
    prob.y0 = (Vector(2) << 1.0, 0.0).finished();
    const DenseTrajectory traj = solve_ode(prob);
    const double energy = traj.final_state().squaredNorm();
    CHECK(std::abs(energy - 1.0) <= 1e-3);
}

TEST_CASE("solve_ode: global error scales with the tolerance") {
    double prev_err = -1.0;
    std::vector<double> tols, errs;
    for (double tol : {1e-3, 1e-5, 1e-7, 1e-9}) {
        OdeProblem prob = decay_problem(tol, tol * 1e-3);
        const DenseTrajectory traj = solve_ode(prob);
        const double err = std::abs(traj.final_state()[0] - std::exp(-1.0));
        tols.push_back(tol);
        errs.push_back(std::max(err, 1e-16));
        if (prev_err > 0.0) CHECK(err < prev_err);
        prev_err = err;
    }
    // log-log slope across the sweep stays near 1.
    const double slope = (std::log(errs.back()) - std::log(errs.front())) /
                         (std::log(tols.back()) - std::log(tols.front()));
    CHECK(slope > 0.6);
    CHECK(slope < 1.4);
}

TEST_CASE("solve_ode: identical problems give identical step sequences") {
    const DenseTrajectory a = solve_ode(decay_problem());
    const DenseTrajectory b = solve_ode(decay_problem());
    REQUIRE(a.nodes() == b.nodes());
    CHECK(a.final_state() == b.final_state());
}

TEST_CASE("dense output: node states exact, midpoints accurate, C0 across steps") {
    SolveStats stats;
    const DenseTrajectory traj = solve_ode(decay_problem(), &stats);
    const auto& nodes = traj.nodes();
    REQUIRE(nodes.size() >= 3);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Vector y = traj.value(nodes[i]);
        CHECK(std::abs(y[0] - std::exp(-nodes[i])) <= 2e-4);
    }
    // Node values from the interpolant reproduce the stored states exactly
    // (θ=0 on the right step); just left of a node the interpolant agrees to
    // roundoff with the stored state (C0 continuity).
    for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
        const double t = nodes[i];
        const Vector right = traj.value(t);
        const Vector left = traj.value(std::nextafter(t, -1.0));
        CHECK(std::abs(right[0] - left[0]) <= 1e-9);
    }
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double mid = 0.5 * (nodes[i] + nodes[i + 1]);
        CHECK(std::abs(traj.value(mid)[0] - std::exp(-mid)) <= 1e-5);
    }
}

TEST_CASE("dense output: derivative is consistent with the rhs") {
    OdeProblem prob;
    prob.rhs = [](double t, const Vector& y, Vector& dy) {
        dy.resize(2);
        dy[0] = y[1];
        dy[1] = -std::sin(t) - 0.3 * y[0];
    };
    prob.t0 = 0.0;
    prob.t1 = 4.0;
    prob.y0 = (Vector(2) << 0.5, 0.1).finished();
    const DenseTrajectory traj = solve_ode(prob);
    for (double t : {0.37, 1.1, 2.9, 3.7}) {
        const Vector y = traj.value(t);
        Vector f(2);
        prob.rhs(t, y, f);
        const Vector dy = traj.derivative(t);
        CHECK((dy - f).norm() / f.norm() <= 1e-3);
    }
}

TEST_CASE("dense output: queries outside the span are rejected") {
    const DenseTrajectory traj = solve_ode(decay_problem());
    CHECK_THROWS_AS(traj.value(-0.5), std::out_of_range);
    CHECK_THROWS_AS(traj.value(1.5), std::out_of_range);
    CHECK_NOTHROW(traj.value(1.0));
    CHECK_NOTHROW(traj.value(0.0));
}

TEST_CASE("solve_ode: non-finite rhs output is an error") {
    OdeProblem prob = decay_problem();
    prob.rhs = [](double t, const Vector& y, Vector& dy) {
        dy = -y;
        if (t > 0.5) dy[0] = std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(solve_ode(prob), std::runtime_error);
}

TEST_CASE("DenseTrajectory: save/load round trip is bit exact") {
    const DenseTrajectory traj = solve_ode(decay_problem());
    const std::string path = "/tmp/mne_test_traj.bin";
    traj.save(path);
    const DenseTrajectory loaded = DenseTrajectory::load(path);
    REQUIRE(loaded.nodes() == traj.nodes());
    CHECK(loaded.final_state() == traj.final_state());
    for (double t : {0.1, 0.42, 0.9}) CHECK(loaded.value(t) == traj.value(t));
    std::remove(path.c_str());
}

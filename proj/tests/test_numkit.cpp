#include <doctest.h>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "mne/diag.hpp"
#include "mne/hartley.hpp"
#include "mne/la.hpp"
#include "mne/rng.hpp"

using namespace mne;

namespace {

Matrix random_spd(int n, std::uint64_t seed) {
    Rng rng(seed);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    return Matrix(a.transpose() * a) + Matrix::Identity(n, n);
}

// Independent solve oracle: Gaussian elimination with partial pivoting.
Vector gauss_solve(Matrix a, Vector b) {
    const int n = static_cast<int>(a.rows());
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        a.row(c).swap(a.row(piv));
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < n; ++r) {
            const double f = a(r, c) / a(c, c);
            a.row(r).tail(n - c) -= f * a.row(c).tail(n - c);
            b[r] -= f * b[c];
        }
    }
    Vector x(n);
    for (int r = n - 1; r >= 0; --r)
        x[r] = (b[r] - a.row(r).tail(n - 1 - r).dot(x.tail(n - 1 - r))) / a(r, r);
    return x;
}

// det(A − x·I) by elimination, for the characteristic-scan eigenvalue oracle.
double char_poly(const Matrix& m, double x) {
    Matrix a = m;
    a.diagonal().array() -= x;
    const int n = static_cast<int>(a.rows());
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        if (piv != c) {
            a.row(c).swap(a.row(piv));
            det = -det;
        }
        if (a(c, c) == 0.0) return 0.0;
        det *= a(c, c);
        for (int r = c + 1; r < n; ++r) {
            const double f = a(r, c) / a(c, c);
            a.row(r).tail(n - c) -= f * a.row(c).tail(n - c);
        }
    }
    return det;
}

std::vector<double> eigenvalues_by_scan(const Matrix& a) {
    const double hi = a.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;  // Gershgorin bound
    std::vector<double> roots;
    const int grid = 20000;
    double prev_x = 0.0, prev_f = char_poly(a, 0.0);
    for (int i = 1; i <= grid; ++i) {
        const double x = hi * static_cast<double>(i) / grid;
        const double f = char_poly(a, x);
        if (prev_f == 0.0) roots.push_back(prev_x);
        if (prev_f * f < 0.0) {
            double lo_x = prev_x, hi_x = x;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo_x + hi_x);
                if (char_poly(a, lo_x) * char_poly(a, mid) <= 0.0)
                    hi_x = mid;
                else
                    lo_x = mid;
            }
            roots.push_back(0.5 * (lo_x + hi_x));
        }
        prev_x = x;
        prev_f = f;
    }
    return roots;
}

// Direct O(N²) cas-sum transform.
std::vector<double> dht_direct(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double a = 2.0 * M_PI * static_cast<double>((j * k) % n) / static_cast<double>(n);
            acc += v[j] * (std::cos(a) + std::sin(a));
        }
        out[k] = acc;
    }
    return out;
}

}  // namespace

TEST_CASE("cholesky: identity and diagonal cases") {
    const SpdFactor f = cholesky(Matrix::Identity(3, 3));
    CHECK((f.lower() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const SpdFactor fd = cholesky(d);
    CHECK(fd.lower()(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(fd.lower()(1, 1) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(fd.lower()(1, 0) == 0.0);
}

TEST_CASE("cholesky: random SPD reconstructs") {
    const Matrix a = random_spd(5, 42);
    const SpdFactor f = cholesky(a);
    const Matrix rec = f.lower() * f.lower().transpose();
    CHECK((rec - a).norm() / a.norm() <= 1e-12);
    for (int i = 0; i < 5; ++i) CHECK(f.lower()(i, i) > 0.0);
}

TEST_CASE("cholesky: non-positive pivot is reported by index") {
    Matrix a = Matrix::Identity(3, 3);
    a(1, 1) = -2.0;
    try {
        cholesky(a);
        FAIL("expected a failure");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("pivot 1") != std::string::npos);
    }
}

TEST_CASE("cholesky: asymmetric input symmetrized with a warning") {
    std::string seen;
    set_warning_handler([&](const std::string& msg) { seen = msg; });
    Matrix a = random_spd(4, 7);
    a(0, 1) += 1e-3;
    const SpdFactor f = cholesky(a);
    set_warning_handler({});
    CHECK(!seen.empty());
    const Matrix sym = 0.5 * (a + a.transpose());
    CHECK((f.lower() * f.lower().transpose() - sym).norm() / sym.norm() <= 1e-12);
}

TEST_CASE("solve_spd: identity, diagonal, and elimination oracle") {
    const SpdFactor fi = cholesky(Matrix::Identity(4, 4));
    const Vector b = (Vector(4) << 1, -2, 3, 0.5).finished();
    CHECK((solve_spd(fi, b) - b).norm() == 0.0);

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const Vector rhs = (Vector(2) << 8, 27).finished();
    const Vector x = solve_spd(cholesky(d), rhs);
    CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-14));

    const Matrix a = random_spd(6, 99);
    Rng rng(5);
    Vector b6(6);
    for (int i = 0; i < 6; ++i) b6[i] = rng.normal();
    const Vector got = solve_spd(cholesky(a), b6);
    const Vector oracle = gauss_solve(a, b6);
    CHECK((got - oracle).norm() / oracle.norm() <= 1e-10);
}

TEST_CASE("solve_spd: dimension mismatch rejected") {
    const SpdFactor f = cholesky(Matrix::Identity(3, 3));
    CHECK_THROWS_AS(solve_spd(f, Vector(Vector::Ones(4))), std::invalid_argument);
}

TEST_CASE("solve_spd: residual stays small on conditioned matrices") {
    // Condition number about 1e6 by construction.
    Rng rng(3);
    Matrix q(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) q(i, j) = rng.normal();
    const Eigen::HouseholderQR<Matrix> qr(q);
    const Matrix orth = qr.householderQ();
    Vector evals(8);
    for (int i = 0; i < 8; ++i) evals[i] = std::pow(10.0, -6.0 * i / 7.0);
    const Matrix a = orth * evals.asDiagonal() * orth.transpose();
    Vector b(8);
    for (int i = 0; i < 8; ++i) b[i] = rng.normal();
    const Vector x = solve_spd(cholesky(a), b);
    CHECK((a * x - b).norm() / b.norm() <= 1e-10);
}

TEST_CASE("logdet: identity, diagonal, and eigenvalue-scan oracle") {
    CHECK(logdet(cholesky(Matrix::Identity(5, 5))) == 0.0);

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 3.0;
    CHECK(logdet(cholesky(d)) == doctest::Approx(std::log(6.0)).epsilon(1e-14));

    const Matrix a = random_spd(3, 11);
    const auto evals = eigenvalues_by_scan(a);
    REQUIRE(evals.size() == 3);
    double expect = 0.0;
    for (double ev : evals) expect += std::log(ev);
    CHECK(logdet(cholesky(a)) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("dht: impulse and constant vectors") {
    for (std::size_t n : {4u, 7u, 16u}) {
        std::vector<double> impulse(n, 0.0);
        impulse[0] = 1.0;
        const auto h = dht(impulse);
        for (double x : h) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));

        const std::vector<double> ones(n, 1.0);
        const auto h1 = dht(ones);
        CHECK(h1[0] == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
        for (std::size_t k = 1; k < n; ++k) CHECK(std::abs(h1[k]) <= 1e-10);
    }
}

TEST_CASE("dht: matches the direct cas-sum oracle") {
    for (std::size_t n : {1u, 2u, 5u, 7u, 16u, 100u, 257u}) {
        Rng rng(1000 + n);
        std::vector<double> v(n);
        for (auto& x : v) x = rng.normal();
        const auto fast = dht(v);
        const auto slow = dht_direct(v);
        double scale = 0.0, err = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            scale = std::max(scale, std::abs(slow[k]));
            err = std::max(err, std::abs(fast[k] - slow[k]));
        }
        CHECK(err <= 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("dht: involution up to the factor N") {
    for (std::size_t n : {1u, 2u, 7u, 16u, 100u, 10000u}) {
        Rng rng(7 + n);
        std::vector<double> v(n);
        for (auto& x : v) x = rng.normal();
        const auto hh = dht(dht(v));
        double err = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            err = std::max(err, std::abs(hh[k] - static_cast<double>(n) * v[k]));
        CHECK(err <= 1e-10 * static_cast<double>(n));
    }
}

TEST_CASE("dht: (1/sqrt(N))-scaled transform preserves norms") {
    for (std::size_t n : {3u, 8u, 129u, 1000u}) {
        Rng rng(77 + n);
        std::vector<double> v(n);
        double norm2 = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            norm2 += x * x;
        }
        const auto h = dht(v);
        double hnorm2 = 0.0;
        for (double x : h) hnorm2 += x * x;
        CHECK(std::sqrt(hnorm2 / n) == doctest::Approx(std::sqrt(norm2)).epsilon(1e-12));
    }
}

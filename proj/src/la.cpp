#include "mne/la.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>

#include "mne/diag.hpp"

namespace mne {

namespace {

WarnHandler g_warn_handler;
std::mutex g_warn_mutex;

// Plain textbook factorization, used only to locate the failing pivot for the
// error message after Eigen's LLT reports a failure.
int find_failing_pivot(const Matrix& a) {
    const Eigen::Index n = a.rows();
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(d > 0.0)) return static_cast<int>(j);
        d = std::sqrt(d);
        l(j, j) = d;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / d;
        }
    }
    return -1;
}

}  // namespace

void set_warning_handler(WarnHandler handler) {
    std::lock_guard<std::mutex> lock(g_warn_mutex);
    g_warn_handler = std::move(handler);
}

void warn(const std::string& message) {
    WarnHandler handler;
    {
        std::lock_guard<std::mutex> lock(g_warn_mutex);
        handler = g_warn_handler;
    }
    if (handler) {
        handler(message);
    } else {
        std::fprintf(stderr, "[mne] warning: %s\n", message.c_str());
    }
}

SpdFactor cholesky(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix must be square");
    const double scale = a.cwiseAbs().maxCoeff();
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    Matrix sym;
    if (scale > 0.0 && asym > 1e-12 * scale) {
        warn("cholesky: input asymmetric (max |A_ij - A_ji| / max|A| = " +
             std::to_string(asym / scale) + "), symmetrizing by averaging");
        sym = 0.5 * (a + a.transpose());
    } else {
        sym = a;
    }
    Eigen::LLT<Matrix> llt(sym);
    if (llt.info() != Eigen::Success) {
        const int pivot = find_failing_pivot(sym);
        throw std::runtime_error("cholesky: not positive definite (pivot " +
                                 std::to_string(pivot) + ")");
    }
    return SpdFactor(llt.matrixL());
}

Matrix solve_spd(const SpdFactor& factor, const Matrix& b) {
    if (factor.size() != b.rows()) throw std::invalid_argument("solve_spd: dimension mismatch");
    const auto& l = factor.lower();
    Matrix x = l.triangularView<Eigen::Lower>().solve(b);
    l.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

Vector solve_spd(const SpdFactor& factor, const Vector& b) {
    if (factor.size() != b.size()) throw std::invalid_argument("solve_spd: dimension mismatch");
    const auto& l = factor.lower();
    Vector x = l.triangularView<Eigen::Lower>().solve(b);
    l.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

double logdet(const SpdFactor& factor) {
    return 2.0 * factor.lower().diagonal().array().log().sum();
}

}  // namespace mne

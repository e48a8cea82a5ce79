#include "mne/ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace mne {

namespace {

// Tsitouras 5(4) tableau.
constexpr double c2 = 0.161, c3 = 0.327, c4 = 0.9, c5 = 0.9800255409045097;
constexpr double a21 = 0.161;
constexpr double a31 = -0.008480655492356989, a32 = 0.335480655492357;
constexpr double a41 = 2.8971530571054935, a42 = -6.359448489975075, a43 = 4.3622954328695815;
constexpr double a51 = 5.325864828439257, a52 = -11.748883564062828, a53 = 7.4955393428898365,
                 a54 = -0.09249506636175525;
constexpr double a61 = 5.86145544294642, a62 = -12.92096931784711, a63 = 8.159367898576159,
                 a64 = -0.071584973281401, a65 = -0.028269050394068383;
constexpr double b1 = 0.09646076681806523, b2 = 0.01, b3 = 0.4798896504144996,
                 b4 = 1.379008574103742, b5 = -3.290069515436081, b6 = 2.324710524099774;
// b − b̂ (error estimator weights); the 7th stage is FSAL.
constexpr double bt1 = -0.00178001105222577714, bt2 = -0.0008164344596567469,
                 bt3 = 0.007880878010261995, bt4 = -0.1447110071732629,
                 bt5 = 0.5823571654525552, bt6 = -0.45808210592918697,
                 bt7 = 0.015151515151515152;

// Free interpolant b_i(θ), expanded to monomial coefficients {θ, θ², θ³, θ⁴}.
struct Quartic {
    double c1, c2q, c3q, c4q;
    double eval(double th) const { return th * (c1 + th * (c2q + th * (c3q + th * c4q))); }
    double deriv(double th) const { return c1 + th * (2 * c2q + th * (3 * c3q + th * 4 * c4q)); }
};

// b(θ) = A·θ·(θ − r)(θ² + pθ + q)
constexpr Quartic cubic_form(double A, double r, double p, double q) {
    return Quartic{A * (-r * q), A * (q - r * p), A * (p - r), A};
}
// b(θ) = A·θ²·(θ² + pθ + q)
constexpr Quartic biquad_form(double A, double p, double q) {
    return Quartic{0.0, A * q, A * p, A};
}
// b(θ) = A·θ²·(θ − α)(θ − β)
constexpr Quartic rooted_form(double A, double alpha, double beta) {
    return Quartic{0.0, A * alpha * beta, -A * (alpha + beta), A};
}

constexpr std::array<Quartic, 7> kInterp = {
    cubic_form(-1.0530884977290216, 1.3299890189751412, -1.4364028541716351, 0.7139816917074209),
    biquad_form(0.1017, -2.1966568338249754, 1.2949852507374631),
    biquad_form(2.490627285651252793, -2.38535645472061657, 1.57803468208092486),
    rooted_form(-16.54810288924490272, 1.21712927295533244, 0.61620406037800089),
    rooted_form(47.37952196281928122, 1.203071208372362603, 0.658047292653547382),
    rooted_form(-34.87065786149660974, 1.2, 2.0 / 3.0),
    rooted_form(2.5, 1.0, 0.6),
};

double error_norm(const Vector& err, const Vector& y_old, const Vector& y_new, double atol,
                  double rtol) {
    const Eigen::Index n = err.size();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::max(std::abs(y_old[i]), std::abs(y_new[i]));
        const double q = err[i] / sc;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

}  // namespace

int DenseTrajectory::locate(double t) const {
    const double span = nodes_.back() - nodes_.front();
    const double slack = 1e-12 * std::max(1.0, std::abs(span));
    if (t < nodes_.front() - slack || t > nodes_.back() + slack)
        throw std::out_of_range("DenseTrajectory: time outside [t0, t1]");
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    int idx = static_cast<int>(it - nodes_.begin()) - 1;
    idx = std::clamp(idx, 0, static_cast<int>(stages_.size()) - 1);
    return idx;
}

Vector DenseTrajectory::value(double t) const {
    const int s = locate(t);
    const double h = nodes_[s + 1] - nodes_[s];
    const double th = (t - nodes_[s]) / h;
    Vector y = states_[s];
    for (int i = 0; i < 7; ++i) y.noalias() += (h * kInterp[i].eval(th)) * stages_[s][i];
    return y;
}

Vector DenseTrajectory::derivative(double t) const {
    const int s = locate(t);
    const double h = nodes_[s + 1] - nodes_[s];
    const double th = (t - nodes_[s]) / h;
    Vector dy = Vector::Zero(states_[s].size());
    for (int i = 0; i < 7; ++i) dy.noalias() += kInterp[i].deriv(th) * stages_[s][i];
    return dy;
}

DenseTrajectory solve_ode(const OdeProblem& prob, SolveStats* stats,
                          const std::function<void(double, const Vector&)>& on_accept) {
    if (!(prob.t1 > prob.t0)) throw std::invalid_argument("solve_ode: need t1 > t0");
    if (!(prob.rtol > 0.0) || !(prob.atol > 0.0))
        throw std::invalid_argument("solve_ode: tolerances must be > 0");
    const double span = prob.t1 - prob.t0;
    const double hmax = prob.max_step > 0.0 ? std::min(prob.max_step, span / 10.0) : span / 10.0;

    SolveStats local;
    SolveStats& st = stats ? *stats : local;

    const Eigen::Index dim = prob.y0.size();
    Vector y = prob.y0;
    double t = prob.t0;

    auto eval = [&](double tt, const Vector& yy, Vector& out) {
        prob.rhs(tt, yy, out);
        ++st.rhs_evals;
        if (!out.allFinite())
            throw std::runtime_error("solve_ode: non-finite rhs at t=" + std::to_string(tt));
    };

    Vector k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
    Vector ytmp(dim), ynew(dim), errv(dim);
    eval(t, y, k1);

    // Hairer-style initial step estimate from the rhs magnitude.
    double h = prob.init_step;
    if (h <= 0.0) {
        double d0 = 0.0, d1 = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double sc = prob.atol + prob.rtol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (k1[i] / sc) * (k1[i] / sc);
        }
        d0 = std::sqrt(d0 / dim);
        d1 = std::sqrt(d1 / dim);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, hmax);
        ytmp = y + h0 * k1;
        eval(t + h0, ytmp, k2);
        double d2 = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double sc = prob.atol + prob.rtol * std::abs(y[i]);
            const double q = (k2[i] - k1[i]) / sc;
            d2 += q * q;
        }
        d2 = std::sqrt(d2 / dim) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                      : std::pow(0.01 / dm, 1.0 / 5.0);
        h = std::min({100.0 * h0, h1, hmax});
    }
    h = std::min(h, hmax);

    DenseTrajectory traj;
    traj.nodes_.push_back(t);
    traj.states_.push_back(y);

    double err_prev = 1e-4;
    bool just_rejected = false;
    const double tiny = 16.0 * std::numeric_limits<double>::epsilon();

    while (t < prob.t1) {
        bool last = false;
        if (1.01 * h >= prob.t1 - t) {  // stretch slightly rather than leave a sliver
            h = prob.t1 - t;
            last = true;
        }
        if (h < tiny * std::max(std::abs(t), 1.0))
            throw std::runtime_error("solve_ode: step size underflow at t=" + std::to_string(t));

        ytmp = y + (h * a21) * k1;
        eval(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        eval(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        eval(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        eval(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        eval(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b2 * k2 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        eval(t + h, ynew, k7);
        errv = h * (bt1 * k1 + bt2 * k2 + bt3 * k3 + bt4 * k4 + bt5 * k5 + bt6 * k6 + bt7 * k7);
        const double err = error_norm(errv, y, ynew, prob.atol, prob.rtol);

        if (err <= 1.0) {
            traj.stages_.push_back({k1, k2, k3, k4, k5, k6, k7});
            t = last ? prob.t1 : t + h;
            y.swap(ynew);
            traj.nodes_.push_back(t);
            traj.states_.push_back(y);
            ++st.accepted;
            k1.swap(k7);  // FSAL
            if (on_accept) on_accept(t, y);

            const double e = std::max(err, 1e-10);
            double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, just_rejected ? 1.0 : 10.0);
            h = std::min(h * fac, hmax);
            err_prev = std::max(err, 1e-4);
            just_rejected = false;
        } else {
            ++st.rejected;
            const double fac = std::clamp(0.9 * std::pow(err, -1.0 / 5.0), 0.2, 1.0);
            h *= fac;
            just_rejected = true;
        }
    }
    return traj;
}

void DenseTrajectory::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("DenseTrajectory::save: cannot open " + path);
    const char magic[8] = {'M', 'N', 'E', 'T', 'R', 'J', '0', '1'};
    out.write(magic, 8);
    const std::int64_t dim = state_size();
    const std::int64_t steps = n_steps();
    out.write(reinterpret_cast<const char*>(&dim), 8);
    out.write(reinterpret_cast<const char*>(&steps), 8);
    out.write(reinterpret_cast<const char*>(nodes_.data()),
              static_cast<std::streamsize>(nodes_.size() * 8));
    for (const auto& s : states_)
        out.write(reinterpret_cast<const char*>(s.data()), static_cast<std::streamsize>(dim * 8));
    for (const auto& ks : stages_)
        for (const auto& k : ks)
            out.write(reinterpret_cast<const char*>(k.data()),
                      static_cast<std::streamsize>(dim * 8));
    if (!out) throw std::runtime_error("DenseTrajectory::save: write failed for " + path);
}

DenseTrajectory DenseTrajectory::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("DenseTrajectory::load: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::string(magic, 8) != "MNETRJ01")
        throw std::runtime_error("DenseTrajectory::load: bad magic in " + path);
    std::int64_t dim = 0, steps = 0;
    in.read(reinterpret_cast<char*>(&dim), 8);
    in.read(reinterpret_cast<char*>(&steps), 8);
    if (dim <= 0 || steps <= 0) throw std::runtime_error("DenseTrajectory::load: corrupt header");
    DenseTrajectory traj;
    traj.nodes_.resize(steps + 1);
    in.read(reinterpret_cast<char*>(traj.nodes_.data()),
            static_cast<std::streamsize>((steps + 1) * 8));
    traj.states_.resize(steps + 1, Vector(dim));
    for (auto& s : traj.states_)
        in.read(reinterpret_cast<char*>(s.data()), static_cast<std::streamsize>(dim * 8));
    traj.stages_.resize(steps);
    for (auto& ks : traj.stages_)
        for (auto& k : ks) {
            k.resize(dim);
            in.read(reinterpret_cast<char*>(k.data()), static_cast<std::streamsize>(dim * 8));
        }
    if (!in) throw std::runtime_error("DenseTrajectory::load: truncated file " + path);
    return traj;
}

}  // namespace mne

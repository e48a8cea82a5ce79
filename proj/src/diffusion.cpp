#include "mne/diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "mne/rng.hpp"

namespace mne {

double langevin_forcing(double q, double t) {
    return -q + std::exp(-0.5 * q * q) * std::cos(t);
}

Matrix drift_field(const DiffusionSpec& spec, const PointSet& pts, double t) {
    const int npts = pts.count();
    if (spec.drift == DriftKind::Ou) {
        Matrix b = Matrix::Zero(pts.dim(), npts);
        for (int i : spec.mask) b.row(i) = -spec.gamma * pts.x.row(i);
        return b;
    }
    if (pts.dim() != 2)
        throw std::invalid_argument("drift_field: the Langevin system is 2-dimensional (q, p)");
    Matrix b(2, npts);
    b.row(0) = pts.x.row(1);
    for (int j = 0; j < npts; ++j) b(1, j) = langevin_forcing(pts.x(0, j), t);
    return b;
}

double drift_divergence(const DiffusionSpec& spec) {
    if (spec.drift == DriftKind::Ou) return -spec.gamma * static_cast<double>(spec.mask.size());
    return 0.0;  // ∂p/∂q + ∂F_t(q)/∂p
}

Vector apply_operator(const DiffusionSpec& spec, const EnergyModel& model, const Vector& theta,
                      const PointSet& pts, double t) {
    if (spec.mask.empty()) throw std::invalid_argument("apply_operator: mask S must be nonempty");
    const int npts = pts.count();
    const double half_s2 = 0.5 * spec.sigma * spec.sigma;
    Vector a = Vector::Constant(npts, drift_divergence(spec));

    if (spec.drift == DriftKind::Ou) {
        // b·∇u needs only the masked gradient here.
        const DerivativeBundle bundle = model.derivatives(theta, pts, spec.mask, spec.mask);
        for (std::size_t i = 0; i < spec.mask.size(); ++i) {
            a += spec.gamma *
                 pts.x.row(spec.mask[i]).cwiseProduct(bundle.grad.row(i)).transpose();
        }
        a += half_s2 * bundle.lap;
        a -= half_s2 * bundle.grad.cwiseAbs2().colwise().sum().transpose();
        return a;
    }

    const DerivativeBundle bundle =
        model.derivatives(theta, pts, full_index_set(model.dim()), spec.mask);
    const Matrix b = drift_field(spec, pts, t);
    a -= b.cwiseProduct(bundle.grad).colwise().sum().transpose();
    a += half_s2 * bundle.lap;
    for (int i : spec.mask)
        a -= half_s2 * bundle.grad.row(i).cwiseAbs2().transpose();
    return a;
}

Vector time_changed_operator(const DiffusionSpec& spec, const EnergyModel& model,
                             const Vector& theta, const PointSet& pts, double s) {
    if (spec.drift != DriftKind::Ou)
        throw std::invalid_argument("time_changed_operator: requires a time-independent drift");
    if (s == 0.0) return Vector::Zero(pts.count());
    return s * apply_operator(spec, model, theta, pts, 0.5 * s * s);
}

CollocationPlan CollocationPlan::analytic_ou(PointSet x_init, std::uint64_t z_seed) {
    CollocationPlan plan;
    plan.mode = Mode::AnalyticOu;
    Rng rng(z_seed);
    Matrix z(x_init.dim(), x_init.count());
    for (Eigen::Index j = 0; j < z.cols(); ++j)
        for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = rng.normal();
    plan.x_init = std::move(x_init);
    plan.z = std::move(z);
    return plan;
}

CollocationPlan CollocationPlan::coupled(PointSet x_init) {
    CollocationPlan plan;
    plan.mode = Mode::CoupledOde;
    plan.x_init = std::move(x_init);
    return plan;
}

PointSet colloc_analytic(const CollocationPlan& plan, const DiffusionSpec& spec, double t) {
    if (plan.mode != CollocationPlan::Mode::AnalyticOu)
        throw std::invalid_argument("colloc_analytic: plan is not in analytic-OU mode");
    if (t < 0.0) throw std::invalid_argument("colloc_analytic: t must be >= 0");
    const double decay = std::exp(-spec.gamma * t);
    const double spread =
        std::sqrt(0.5 * spec.sigma * spec.sigma / spec.gamma * (1.0 - std::exp(-2.0 * spec.gamma * t)));
    PointSet out(plan.x_init.x);
    for (int i : spec.mask)
        out.x.row(i) = decay * plan.x_init.x.row(i) + spread * plan.z.row(i);
    return out;
}

Matrix colloc_coupled_rhs(const DiffusionSpec& spec, const EnergyModel& model,
                          const Vector& theta, const PointSet& pts, double t) {
    Matrix v = drift_field(spec, pts, t);
    const double half_s2 = 0.5 * spec.sigma * spec.sigma;
    if (half_s2 == 0.0) return v;
    const DerivativeBundle bundle = model.derivatives(theta, pts, spec.mask, {});
    for (std::size_t i = 0; i < spec.mask.size(); ++i)
        v.row(spec.mask[i]) += half_s2 * bundle.grad.row(i);
    return v;
}

}  // namespace mne

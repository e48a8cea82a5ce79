#include "mne/evolve.hpp"

#include <stdexcept>

namespace mne {

MneEvolution::MneEvolution(const EnergyModel& model, DiffusionSpec spec, CollocationPlan plan,
                           SketchOp sketch, RegSpec reg, Mode mode)
    : model_(model),
      spec_(std::move(spec)),
      plan_(std::move(plan)),
      sketch_(std::move(sketch)),
      reg_(reg),
      mode_(mode) {
    if (sketch_.input_dim() != plan_.x_init.count())
        throw std::invalid_argument("MneEvolution: sketch length must equal the point count");
    if (mode_ == Mode::TimeChangedOu && plan_.mode != CollocationPlan::Mode::AnalyticOu)
        throw std::invalid_argument("MneEvolution: time-changed mode needs an analytic-OU plan");
    if (mode_ == Mode::CoupledDrift && plan_.mode != CollocationPlan::Mode::CoupledOde)
        throw std::invalid_argument("MneEvolution: coupled mode needs a coupled plan");
    phi_.resize(model_.n_params(), plan_.x_init.count());
}

int MneEvolution::state_size() const {
    if (mode_ == Mode::TimeChangedOu) return model_.n_params();
    return model_.n_params() + plan_.x_init.dim() * plan_.x_init.count();
}

Vector MneEvolution::initial_state(const Vector& theta0) const {
    if (theta0.size() != model_.n_params())
        throw std::invalid_argument("MneEvolution: initial parameter length mismatch");
    if (mode_ == Mode::TimeChangedOu) return theta0;
    Vector state(state_size());
    state.head(model_.n_params()) = theta0;
    state.tail(plan_.x_init.dim() * plan_.x_init.count()) =
        Eigen::Map<const Vector>(plan_.x_init.x.data(), plan_.x_init.x.size());
    return state;
}

Vector MneEvolution::theta_of(const Vector& state) const {
    return state.head(model_.n_params());
}

PointSet MneEvolution::points_at(double t, const Vector& state) const {
    if (mode_ == Mode::TimeChangedOu) return colloc_analytic(plan_, spec_, 0.5 * t * t);
    const int d = plan_.x_init.dim();
    const int n = plan_.x_init.count();
    PointSet pts;
    pts.x = Eigen::Map<const Matrix>(state.data() + model_.n_params(), d, n);
    return pts;
}

Vector MneEvolution::operator_values(double t, const Vector& theta, const PointSet& pts) const {
    if (mode_ == Mode::TimeChangedOu) return time_changed_operator(spec_, model_, theta, pts, t);
    return apply_operator(spec_, model_, theta, pts, t);
}

void MneEvolution::rhs(double t, const Vector& state, Vector& dstate) const {
    const int p = model_.n_params();
    dstate.resize(state.size());
    const Vector theta = theta_of(state);
    const PointSet pts = points_at(t, state);
    model_.param_jacobian_into(theta, pts, phi_);
    const Vector a_vals = operator_values(t, theta, pts);
    diag_ = SolveDiag{};
    dstate.head(p) = theta_dot_sketched(phi_, a_vals, sketch_, reg_, &diag_);
    if (mode_ == Mode::CoupledDrift) {
        const Matrix xdot = colloc_coupled_rhs(spec_, model_, theta, pts, t);
        dstate.tail(state.size() - p) = Eigen::Map<const Vector>(xdot.data(), xdot.size());
    }
}

double MneEvolution::residual_at(double t, const Vector& state) const {
    const Vector theta = theta_of(state);
    const PointSet pts = points_at(t, state);
    model_.param_jacobian_into(theta, pts, phi_);
    const Vector a_vals = operator_values(t, theta, pts);
    const Vector theta_dot = theta_dot_sketched(phi_, a_vals, sketch_, reg_, nullptr);
    return residual_rms(phi_, theta_dot, a_vals);
}

}  // namespace mne

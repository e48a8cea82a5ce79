#include "mne/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace mne {

IndexSet full_index_set(int d) {
    IndexSet s(d);
    for (int i = 0; i < d; ++i) s[i] = i;
    return s;
}

IndexSet complement_index_set(const IndexSet& s, int d) {
    IndexSet out;
    out.reserve(d - s.size());
    std::size_t k = 0;
    for (int i = 0; i < d; ++i) {
        if (k < s.size() && s[k] == i) {
            ++k;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

DerivativeBundle EnergyModel::derivatives(const Vector& theta, const PointSet& pts,
                                          const IndexSet& grad_set,
                                          const IndexSet& lap_set) const {
    DerivativeBundle out;
    out.values = eval(theta, pts);
    const Matrix full = grad_x(theta, pts);
    out.grad.resize(static_cast<Eigen::Index>(grad_set.size()), pts.count());
    for (std::size_t i = 0; i < grad_set.size(); ++i) out.grad.row(i) = full.row(grad_set[i]);
    out.lap = lap_masked(theta, pts, lap_set);
    return out;
}

Matrix EnergyModel::param_jacobian(const Vector& theta, const PointSet& pts) const {
    Matrix jac(n_params(), pts.count());
    param_jacobian_into(theta, pts, jac);
    return jac;
}

}  // namespace mne

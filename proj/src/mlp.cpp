#include "mne/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "mne/rng.hpp"

namespace mne {

namespace {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MutRowMajorMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void act_value(Activation act, const Matrix& z, Matrix& out) {
    out.resizeLike(z);
    const double* zp = z.data();
    double* op = out.data();
    const Eigen::Index sz = z.size();
    if (act == Activation::Cosine) {
        for (Eigen::Index i = 0; i < sz; ++i) op[i] = std::cos(zp[i]);
    } else {
        for (Eigen::Index i = 0; i < sz; ++i) op[i] = softplus(zp[i]);
    }
}

void act_d1(Activation act, const Matrix& z, Matrix& out) {
    out.resizeLike(z);
    const double* zp = z.data();
    double* op = out.data();
    const Eigen::Index sz = z.size();
    if (act == Activation::Cosine) {
        for (Eigen::Index i = 0; i < sz; ++i) op[i] = -std::sin(zp[i]);
    } else {
        for (Eigen::Index i = 0; i < sz; ++i) op[i] = sigmoid(zp[i]);
    }
}

void act_d2(Activation act, const Matrix& z, Matrix& out) {
    out.resizeLike(z);
    const double* zp = z.data();
    double* op = out.data();
    const Eigen::Index sz = z.size();
    if (act == Activation::Cosine) {
        for (Eigen::Index i = 0; i < sz; ++i) op[i] = -std::cos(zp[i]);
    } else {
        for (Eigen::Index i = 0; i < sz; ++i) {
            const double s = sigmoid(zp[i]);
            op[i] = s * (1.0 - s);
        }
    }
}

}  // namespace

Activation activation_from_string(const std::string& name) {
    if (name == "cosine") return Activation::Cosine;
    if (name == "softplus") return Activation::Softplus;
    throw std::invalid_argument("unknown activation: " + name);
}

std::string to_string(Activation a) {
    return a == Activation::Cosine ? "cosine" : "softplus";
}

int param_count(const ArchSpec& arch) {
    if (arch.input_dim < 1) throw std::invalid_argument("ArchSpec: input_dim must be >= 1");
    if (arch.hidden.empty()) throw std::invalid_argument("ArchSpec: need at least one hidden layer");
    int p = 0;
    int in = arch.input_dim;
    for (int w : arch.hidden) {
        if (w < 1) throw std::invalid_argument("ArchSpec: hidden widths must be >= 1");
        p += in * w + w;
        in = w;
    }
    p += in + 1;  // scalar head
    return p;
}

ModelParams init_params(const ArchSpec& arch, std::uint64_t seed) {
    const int p = param_count(arch);
    Vector theta = Vector::Zero(p);
    Rng rng(seed);
    int offset = 0;
    int in = arch.input_dim;
    for (int w : arch.hidden) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        for (int i = 0; i < in * w; ++i) theta[offset + i] = scale * rng.normal();
        offset += in * w + w;  // biases stay zero
        in = w;
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (int i = 0; i < in; ++i) theta[offset + i] = scale * rng.normal();
    return ModelParams{arch, std::move(theta)};
}

MlpEnergy::MlpEnergy(ArchSpec arch) : arch_(std::move(arch)) {
    n_params_ = param_count(arch_);
    int offset = 0;
    int in = arch_.input_dim;
    for (int w : arch_.hidden) {
        layers_.push_back(Layout{offset, offset + in * w, in, w});
        offset += in * w + w;
        in = w;
    }
    head_w_offset_ = offset;
    head_b_offset_ = offset + in;
}

void MlpEnergy::check_point_dim(const PointSet& pts) const {
    if (pts.dim() != arch_.input_dim)
        throw std::invalid_argument("MlpEnergy: point dimension does not match architecture");
    if (pts.count() < 1) throw std::invalid_argument("MlpEnergy: empty point set");
}

void MlpEnergy::forward(const Vector& theta, const Matrix& x, std::vector<Matrix>& z,
                        std::vector<Matrix>& a) const {
    if (theta.size() != n_params_) throw std::invalid_argument("MlpEnergy: parameter length mismatch");
    const std::size_t nl = layers_.size();
    z.resize(nl);
    a.resize(nl);
    const Matrix* prev = &x;
    for (std::size_t l = 0; l < nl; ++l) {
        const Layout& ly = layers_[l];
        RowMajorMap w(theta.data() + ly.w_offset, ly.out, ly.in);
        auto b = theta.segment(ly.b_offset, ly.out);
        z[l].noalias() = w * (*prev);
        z[l].colwise() += b;
        act_value(arch_.activation, z[l], a[l]);
        prev = &a[l];
    }
}

Vector MlpEnergy::eval(const Vector& theta, const PointSet& pts) const {
    check_point_dim(pts);
    std::vector<Matrix> z, a;
    forward(theta, pts.x, z, a);
    const auto wout = theta.segment(head_w_offset_, layers_.back().out);
    const double bout = theta[head_b_offset_];
    Vector u = a.back().transpose() * wout;
    u.array() += bout;
    return u;
}

Matrix MlpEnergy::grad_x(const Vector& theta, const PointSet& pts) const {
    check_point_dim(pts);
    const int npts = pts.count();
    std::vector<Matrix> z, a;
    forward(theta, pts.x, z, a);
    const auto wout = theta.segment(head_w_offset_, layers_.back().out);
    // Backward sweep: q^l = φ'(z^l) ⊙ (∂u/∂a^l); the spatial gradient is W¹ᵀq¹.
    Matrix q;
    Matrix d1;
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
        act_d1(arch_.activation, z[l], d1);
        if (l == static_cast<int>(layers_.size()) - 1) {
            q = d1.array().colwise() * wout.array();
        } else {
            const Layout& up = layers_[l + 1];
            RowMajorMap w(theta.data() + up.w_offset, up.out, up.in);
            Matrix g;
            g.noalias() = w.transpose() * q;
            q = d1.cwiseProduct(g);
        }
    }
    const Layout& first = layers_.front();
    RowMajorMap w1(theta.data() + first.w_offset, first.out, first.in);
    Matrix grad(first.in, npts);
    grad.noalias() = w1.transpose() * q;
    return grad;
}

Vector MlpEnergy::lap_masked(const Vector& theta, const PointSet& pts,
                             const IndexSet& mask) const {
    if (mask.empty()) return Vector::Zero(pts.count());
    return derivatives(theta, pts, {}, mask).lap;
}

DerivativeBundle MlpEnergy::derivatives(const Vector& theta, const PointSet& pts,
                                        const IndexSet& grad_set,
                                        const IndexSet& lap_set) const {
    check_point_dim(pts);
    const int npts = pts.count();
    const int nl = static_cast<int>(layers_.size());

    // Union of requested directions; per-point spatial tangents are propagated
    // for every coordinate in it.
    IndexSet dirs = grad_set;
    dirs.insert(dirs.end(), lap_set.begin(), lap_set.end());
    std::sort(dirs.begin(), dirs.end());
    dirs.erase(std::unique(dirs.begin(), dirs.end()), dirs.end());
    for (int i : dirs)
        if (i < 0 || i >= arch_.input_dim)
            throw std::invalid_argument("MlpEnergy: coordinate index out of range");
    const int nd = static_cast<int>(dirs.size());

    std::vector<Matrix> z, a;
    forward(theta, pts.x, z, a);

    DerivativeBundle out;
    out.values = a.back().transpose() * theta.segment(head_w_offset_, layers_.back().out);
    out.values.array() += theta[head_b_offset_];
    out.grad.resize(static_cast<Eigen::Index>(grad_set.size()), npts);
    out.lap = Vector::Zero(npts);
    if (nd == 0) return out;

    // J (first spatial tangent) and K (second) per layer, stored as
    // width × (npts·nd) with point-major column blocks. The first layer's J is
    // W¹ columns of the requested coordinates, identical for every point.
    const Layout& first = layers_.front();
    RowMajorMap w1(theta.data() + first.w_offset, first.out, first.in);
    Matrix j1(first.out, nd), j1sq(first.out, nd);
    for (int i = 0; i < nd; ++i) j1.col(i) = w1.col(dirs[i]);
    j1sq = j1.cwiseAbs2();

    Matrix d1, d2;
    Matrix jcur, kcur, jnext, knext;
    for (int l = 0; l < nl - 1; ++l) {
        act_d1(arch_.activation, z[l], d1);
        act_d2(arch_.activation, z[l], d2);
        const Layout& up = layers_[l + 1];
        const Matrix wup = RowMajorMap(theta.data() + up.w_offset, up.out, up.in);
        if (l == 0) {
            jcur.resize(first.out, static_cast<Eigen::Index>(npts) * nd);
            kcur.resize(first.out, static_cast<Eigen::Index>(npts) * nd);
            for (int p = 0; p < npts; ++p) {
                jcur.middleCols(static_cast<Eigen::Index>(p) * nd, nd) =
                    j1.array().colwise() * d1.col(p).array();
                kcur.middleCols(static_cast<Eigen::Index>(p) * nd, nd) =
                    j1sq.array().colwise() * d2.col(p).array();
            }
        } else {
            for (int p = 0; p < npts; ++p) {
                auto jb = jcur.middleCols(static_cast<Eigen::Index>(p) * nd, nd);
                auto kb = kcur.middleCols(static_cast<Eigen::Index>(p) * nd, nd);
                kb = (jb.cwiseAbs2().array().colwise() * d2.col(p).array()).matrix() +
                     (kb.array().colwise() * d1.col(p).array()).matrix();
                jb = (jb.array().colwise() * d1.col(p).array()).matrix();
            }
        }
        jnext.noalias() = wup * jcur;
        knext.noalias() = wup * kcur;
        jcur.swap(jnext);
        kcur.swap(knext);
    }

    const auto wout = theta.segment(head_w_offset_, layers_.back().out);
    act_d1(arch_.activation, z[nl - 1], d1);
    act_d2(arch_.activation, z[nl - 1], d2);

    // Positions of lap_set / grad_set entries inside dirs.
    std::vector<int> lap_pos(lap_set.size()), grad_pos(grad_set.size());
    for (std::size_t i = 0; i < lap_set.size(); ++i)
        lap_pos[i] = static_cast<int>(std::lower_bound(dirs.begin(), dirs.end(), lap_set[i]) -
                                      dirs.begin());
    for (std::size_t i = 0; i < grad_set.size(); ++i)
        grad_pos[i] = static_cast<int>(std::lower_bound(dirs.begin(), dirs.end(), grad_set[i]) -
                                       dirs.begin());

    const int wl = layers_.back().out;
    Vector q(wl), r(wl);
    for (int p = 0; p < npts; ++p) {
        q = wout.cwiseProduct(d1.col(p));
        r = wout.cwiseProduct(d2.col(p));
        if (nl == 1) {
            // Single hidden layer: J = j1, K = 0.
            for (std::size_t i = 0; i < grad_set.size(); ++i)
                out.grad(static_cast<Eigen::Index>(i), p) = j1.col(grad_pos[i]).dot(q);
            double lap = 0.0;
            for (int pos : lap_pos) lap += j1sq.col(pos).dot(r);
            out.lap[p] = lap;
        } else {
            auto jb = jcur.middleCols(static_cast<Eigen::Index>(p) * nd, nd);
            auto kb = kcur.middleCols(static_cast<Eigen::Index>(p) * nd, nd);
            for (std::size_t i = 0; i < grad_set.size(); ++i)
                out.grad(static_cast<Eigen::Index>(i), p) = jb.col(grad_pos[i]).dot(q);
            double lap = 0.0;
            for (int pos : lap_pos)
                lap += jb.col(pos).cwiseAbs2().dot(r) + kb.col(pos).dot(q);
            out.lap[p] = lap;
        }
    }
    return out;
}

void MlpEnergy::param_jacobian_into(const Vector& theta, const PointSet& pts, Matrix& jac) const {
    check_point_dim(pts);
    const int npts = pts.count();
    if (jac.rows() != n_params_ || jac.cols() != npts)
        throw std::invalid_argument("MlpEnergy: jacobian buffer has wrong shape");
    const int nl = static_cast<int>(layers_.size());
    std::vector<Matrix> z, a;
    forward(theta, pts.x, z, a);
    const auto wout = theta.segment(head_w_offset_, layers_.back().out);

    // q^l = ∂u/∂z^l for every layer (width_l × npts).
    std::vector<Matrix> q(nl);
    Matrix d1;
    for (int l = nl - 1; l >= 0; --l) {
        act_d1(arch_.activation, z[l], d1);
        if (l == nl - 1) {
            q[l] = d1.array().colwise() * wout.array();
        } else {
            const Layout& up = layers_[l + 1];
            RowMajorMap w(theta.data() + up.w_offset, up.out, up.in);
            Matrix g;
            g.noalias() = w.transpose() * q[l + 1];
            q[l] = d1.cwiseProduct(g);
        }
    }

#pragma omp parallel for schedule(static)
    for (int p = 0; p < npts; ++p) {
        double* col = jac.data() + static_cast<std::ptrdiff_t>(p) * n_params_;
        for (int l = 0; l < nl; ++l) {
            const Layout& ly = layers_[l];
            const double* qp = q[l].data() + static_cast<std::ptrdiff_t>(p) * ly.out;
            const double* ap =
                (l == 0) ? pts.x.data() + static_cast<std::ptrdiff_t>(p) * ly.in
                         : a[l - 1].data() + static_cast<std::ptrdiff_t>(p) * ly.in;
            double* wcol = col + ly.w_offset;
            for (int rrow = 0; rrow < ly.out; ++rrow) {
                const double qv = qp[rrow];
                double* dst = wcol + static_cast<std::ptrdiff_t>(rrow) * ly.in;
                for (int c = 0; c < ly.in; ++c) dst[c] = qv * ap[c];
            }
            double* bcol = col + ly.b_offset;
            for (int rrow = 0; rrow < ly.out; ++rrow) bcol[rrow] = qp[rrow];
        }
        const int wl = layers_.back().out;
        const double* alast = a.back().data() + static_cast<std::ptrdiff_t>(p) * wl;
        double* hw = col + head_w_offset_;
        for (int i = 0; i < wl; ++i) hw[i] = alast[i];
        col[head_b_offset_] = 1.0;
    }
}

Vector MlpEnergy::dir_param_deriv(const Vector& theta, const Vector& v,
                                  const PointSet& pts) const {
    check_point_dim(pts);
    if (v.size() != n_params_) throw std::invalid_argument("MlpEnergy: tangent length mismatch");
    std::vector<Matrix> z, a;
    forward(theta, pts.x, z, a);

    // Parameter-tangent forward pass: ż¹ = Ẇ¹x + ḃ¹, ȧ = φ'(z)⊙ż,
    // ż^{l+1} = Ẇ^{l+1}a^l + W^{l+1}ȧ^l + ḃ^{l+1}.
    Matrix adot, zdot, d1;
    const Matrix* prev_a = &pts.x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layout& ly = layers_[l];
        RowMajorMap wdot(v.data() + ly.w_offset, ly.out, ly.in);
        auto bdot = v.segment(ly.b_offset, ly.out);
        zdot.noalias() = wdot * (*prev_a);
        if (l > 0) {
            RowMajorMap w(theta.data() + ly.w_offset, ly.out, ly.in);
            zdot.noalias() += w * adot;
        }
        zdot.colwise() += bdot;
        act_d1(arch_.activation, z[l], d1);
        adot = d1.cwiseProduct(zdot);
        prev_a = &a[l];
    }
    const auto wout = theta.segment(head_w_offset_, layers_.back().out);
    const auto wout_dot = v.segment(head_w_offset_, layers_.back().out);
    Vector du = a.back().transpose() * wout_dot;
    du.noalias() += adot.transpose() * wout;
    du.array() += v[head_b_offset_];
    return du;
}

double MlpEnergy::score_loss_grad(const Vector& theta, const PointSet& pts,
                                  const Matrix& target_scores, Vector& grad) const {
    check_point_dim(pts);
    const int npts = pts.count();
    if (target_scores.rows() != arch_.input_dim || target_scores.cols() != npts)
        throw std::invalid_argument("MlpEnergy: target score shape mismatch");
    const int nl = static_cast<int>(layers_.size());
    std::vector<Matrix> z, a;
    forward(theta, pts.x, z, a);

    std::vector<Matrix> d1(nl), d2(nl);
    for (int l = 0; l < nl; ++l) {
        act_d1(arch_.activation, z[l], d1[l]);
        act_d2(arch_.activation, z[l], d2[l]);
    }
    const auto wout = theta.segment(head_w_offset_, layers_.back().out);

    // Residual direction per point: r_j = ∇u(x_j) − s_j.
    Matrix q;
    for (int l = nl - 1; l >= 0; --l) {
        if (l == nl - 1) {
            q = d1[l].array().colwise() * wout.array();
        } else {
            const Layout& up = layers_[l + 1];
            RowMajorMap w(theta.data() + up.w_offset, up.out, up.in);
            Matrix g;
            g.noalias() = w.transpose() * q;
            q = d1[l].cwiseProduct(g);
        }
    }
    const Layout& first = layers_.front();
    RowMajorMap w1(theta.data() + first.w_offset, first.out, first.in);
    Matrix resid;
    resid.noalias() = w1.transpose() * q;
    resid -= target_scores;
    const double loss = resid.squaredNorm() / npts;

    // Forward tangent along r_j at each point.
    std::vector<Matrix> zdot(nl), adot(nl);
    for (int l = 0; l < nl; ++l) {
        const Layout& ly = layers_[l];
        RowMajorMap w(theta.data() + ly.w_offset, ly.out, ly.in);
        zdot[l].noalias() = w * (l == 0 ? resid : adot[l - 1]);
        adot[l] = d1[l].cwiseProduct(zdot[l]);
    }

    // Reverse through the tangent computation; T = Σ_j woutᵀ ȧ^L_j.
    grad.setZero(n_params_);
    Matrix abar = Matrix::Zero(layers_.back().out, npts);
    Matrix adotbar = Matrix(layers_.back().out, npts);
    adotbar.colwise() = wout;
    Matrix zbar, zdotbar;
    for (int l = nl - 1; l >= 0; --l) {
        const Layout& ly = layers_[l];
        zbar = d1[l].cwiseProduct(abar) + d2[l].cwiseProduct(zdot[l]).cwiseProduct(adotbar);
        zdotbar = d1[l].cwiseProduct(adotbar);
        const Matrix& aprev = (l == 0) ? pts.x : a[l - 1];
        MutRowMajorMap wbar(grad.data() + ly.w_offset, ly.out, ly.in);
        wbar.noalias() = zbar * aprev.transpose();
        if (l == 0) {
            wbar.noalias() += zdotbar * resid.transpose();
        } else {
            wbar.noalias() += zdotbar * adot[l - 1].transpose();
        }
        grad.segment(ly.b_offset, ly.out) = zbar.rowwise().sum();
        if (l > 0) {
            RowMajorMap w(theta.data() + ly.w_offset, ly.out, ly.in);
            abar.noalias() = w.transpose() * zbar;
            adotbar = (w.transpose() * zdotbar).eval();
        }
    }
    grad.segment(head_w_offset_, layers_.back().out) = adot[nl - 1].rowwise().sum();
    grad[head_b_offset_] = 0.0;
    grad *= 2.0 / npts;
    return loss;
}

void save_params(const ModelParams& params, const std::string& path) {
    nlohmann::json j;
    j["format"] = "mne-params-v1";
    j["input_dim"] = params.arch.input_dim;
    j["hidden"] = params.arch.hidden;
    j["activation"] = to_string(params.arch.activation);
    j["theta"] = std::vector<double>(params.theta.data(), params.theta.data() + params.theta.size());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_params: cannot open " + path);
    out << j.dump(2) << "\n";
}

ModelParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_params: cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != "mne-params-v1")
        throw std::runtime_error("load_params: unrecognized format in " + path);
    ModelParams params;
    params.arch.input_dim = j.at("input_dim").get<int>();
    params.arch.hidden = j.at("hidden").get<std::vector<int>>();
    params.arch.activation = activation_from_string(j.at("activation").get<std::string>());
    const auto theta = j.at("theta").get<std::vector<double>>();
    if (static_cast<int>(theta.size()) != param_count(params.arch))
        throw std::runtime_error("load_params: parameter count does not match architecture");
    params.theta = Eigen::Map<const Vector>(theta.data(), theta.size());
    for (double t : params.theta)
        if (!std::isfinite(t)) throw std::runtime_error("load_params: non-finite parameter");
    return params;
}

}  // namespace mne

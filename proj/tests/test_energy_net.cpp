#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mne/mlp.hpp"
#include "mne/rng.hpp"

using namespace mne;

namespace {

ArchSpec small_arch(int d, Activation act) {
    ArchSpec a;
    a.input_dim = d;
    a.hidden = {9, 7};
    a.activation = act;
    return a;
}

PointSet random_points(int d, int n, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(d, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < d; ++i) x(i, j) = rng.normal();
    return PointSet(std::move(x));
}

Vector random_theta(const ArchSpec& arch, std::uint64_t seed) {
    Rng rng(seed);
    Vector theta(param_count(arch));
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = 0.7 * rng.normal();
    return theta;
}

double eval_one(const MlpEnergy& model, const Vector& theta, const Vector& x) {
    Matrix pt = x;
    return model.eval(theta, PointSet(std::move(pt)))[0];
}

}  // namespace

TEST_CASE("init_params: determinism and parameter counts") {
    ArchSpec a;
    a.input_dim = 2;
    a.hidden = {128, 128};
    const ModelParams p1 = init_params(a, 42);
    const ModelParams p2 = init_params(a, 42);
    CHECK(p1.theta == p2.theta);
    CHECK(param_count(a) == 17025);  // 3·128 + 129·128 + 129

    ArchSpec b;
    b.input_dim = 1;
    b.hidden = {1};
    CHECK(param_count(b) == 4);  // (1+1) + (1+1)
}

TEST_CASE("eval: zero output head gives zero energy") {
    ArchSpec a = small_arch(3, Activation::Softplus);
    const MlpEnergy model(a);
    const Vector theta = Vector::Zero(param_count(a));
    const PointSet pts = random_points(3, 5, 1);
    CHECK(model.eval(theta, pts).cwiseAbs().maxCoeff() == 0.0);
    CHECK(model.grad_x(theta, pts).cwiseAbs().maxCoeff() == 0.0);
    CHECK(model.lap_masked(theta, pts, {0, 1, 2}).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eval: single-unit network matches the symbolic composition") {
    ArchSpec a;
    a.input_dim = 1;
    a.hidden = {1, 1};
    a.activation = Activation::Softplus;
    const MlpEnergy model(a);
    // Order: W1, b1, W2, b2, w_out, b_out.
    Vector theta(param_count(a));
    theta << 1.3, 0.2, -0.8, 0.5, 2.0, -0.1;
    const double x = 0.7;
    auto sp = [](double z) { return std::log1p(std::exp(z)); };
    const double expect = 2.0 * sp(-0.8 * sp(1.3 * x + 0.2) + 0.5) - 0.1;
    Matrix pt(1, 1);
    pt(0, 0) = x;
    CHECK(model.eval(theta, PointSet(std::move(pt)))[0] ==
          doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("eval: permuting hidden units leaves outputs unchanged") {
    ArchSpec a = small_arch(2, Activation::Cosine);
    const MlpEnergy model(a);
    const Vector theta = random_theta(a, 3);
    const PointSet pts = random_points(2, 6, 4);
    const Vector base = model.eval(theta, pts);

    // Swap hidden units 0 and 1 of the first layer with matched weights.
    Vector perm = theta;
    const int in = 2, out = 9;
    for (int c = 0; c < in; ++c) std::swap(perm[0 * in + c], perm[1 * in + c]);  // W1 rows
    std::swap(perm[in * out + 0], perm[in * out + 1]);                           // b1
    const int w2_off = in * out + out;
    for (int r = 0; r < 7; ++r) std::swap(perm[w2_off + r * out + 0], perm[w2_off + r * out + 1]);
    const Vector permuted = model.eval(perm, pts);
    CHECK((base - permuted).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("grad_x: finite-difference oracle at 100 random draws") {
    for (Activation act : {Activation::Cosine, Activation::Softplus}) {
        ArchSpec a = small_arch(3, act);
        const MlpEnergy model(a);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const Vector theta = random_theta(a, 100 + trial);
            const PointSet pts = random_points(3, 1, 200 + trial);
            const Matrix grad = model.grad_x(theta, pts);
            const double h = 1e-5;
            for (int i = 0; i < 3; ++i) {
                Vector xp = pts.x.col(0), xm = pts.x.col(0);
                xp[i] += h;
                xm[i] -= h;
                const double fd = (eval_one(model, theta, xp) - eval_one(model, theta, xm)) / (2 * h);
                const double scale = std::max(1.0, std::abs(fd));
                worst = std::max(worst, std::abs(grad(i, 0) - fd) / scale);
            }
        }
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("grad_x: single cosine unit has the hand chain-rule gradient") {
    ArchSpec a;
    a.input_dim = 1;
    a.hidden = {1};
    a.activation = Activation::Cosine;
    const MlpEnergy model(a);
    Vector theta(param_count(a));
    theta << 1.7, 0.3, -0.9, 0.0;  // W1, b1, w_out, b_out: u = −0.9·cos(1.7x + 0.3)
    Matrix pt(1, 1);
    pt(0, 0) = 0.4;
    const double expect = -(-0.9) * 1.7 * std::sin(1.7 * 0.4 + 0.3);
    CHECK(model.grad_x(theta, PointSet(std::move(pt)))(0, 0) ==
          doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("lap_masked: finite-difference oracle and masked symmetry") {
    ArchSpec a = small_arch(4, Activation::Softplus);
    const MlpEnergy model(a);
    double worst = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
        const Vector theta = random_theta(a, 300 + trial);
        const PointSet pts = random_points(4, 1, 400 + trial);
        const IndexSet mask = {0, 2};
        const double lap = model.lap_masked(theta, pts, mask)[0];
        const double h = 1e-4;
        double fd = 0.0;
        const double u0 = eval_one(model, theta, pts.x.col(0));
        for (int i : mask) {
            Vector xp = pts.x.col(0), xm = pts.x.col(0);
            xp[i] += h;
            xm[i] -= h;
            fd += (eval_one(model, theta, xp) - 2 * u0 + eval_one(model, theta, xm)) / (h * h);
        }
        worst = std::max(worst, std::abs(lap - fd) / std::max(1.0, std::abs(fd)));
    }
    CHECK(worst <= 1e-5);

    // A net that ignores coordinates 1..3 has the same Laplacian for S = {0}
    // and S = {0,..,3}.
    Vector theta = random_theta(a, 55);
    for (int r = 0; r < 9; ++r)
        for (int c = 1; c < 4; ++c) theta[r * 4 + c] = 0.0;
    const PointSet pts = random_points(4, 5, 56);
    const Vector l1 = model.lap_masked(theta, pts, {0});
    const Vector l2 = model.lap_masked(theta, pts, {0, 1, 2, 3});
    CHECK((l1 - l2).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("lap_masked: empty mask returns zeros") {
    ArchSpec a = small_arch(2, Activation::Cosine);
    const MlpEnergy model(a);
    const Vector theta = random_theta(a, 77);
    const PointSet pts = random_points(2, 3, 78);
    CHECK(model.lap_masked(theta, pts, {}).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("param_jacobian: head-bias row, finite differences, duplicated points") {
    ArchSpec a = small_arch(2, Activation::Softplus);
    const MlpEnergy model(a);
    const Vector theta = random_theta(a, 500);
    const PointSet pts = random_points(2, 4, 501);
    const Matrix jac = model.param_jacobian(theta, pts);
    CHECK((jac.row(param_count(a) - 1).array() == 1.0).all());

    double worst = 0.0;
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        const int k = trial % param_count(a);
        const int j = trial % pts.count();
        Vector tp = theta, tm = theta;
        tp[k] += h;
        tm[k] -= h;
        const double fd =
            (eval_one(model, tp, pts.x.col(j)) - eval_one(model, tm, pts.x.col(j))) / (2 * h);
        worst = std::max(worst, std::abs(jac(k, j) - fd) / std::max(1.0, std::abs(fd)));
    }
    CHECK(worst <= 1e-6);

    Matrix dup(2, 2);
    dup.col(0) = pts.x.col(1);
    dup.col(1) = pts.x.col(1);
    const Matrix jd = model.param_jacobian(theta, PointSet(std::move(dup)));
    CHECK((jd.col(0) - jd.col(1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dir_param_deriv: zero, basis extraction, inner-product oracle") {
    ArchSpec a = small_arch(3, Activation::Cosine);
    const MlpEnergy model(a);
    const int p = param_count(a);
    const Vector theta = random_theta(a, 600);
    const PointSet pts = random_points(3, 5, 601);

    CHECK(model.dir_param_deriv(theta, Vector::Zero(p), pts).cwiseAbs().maxCoeff() == 0.0);

    const Matrix jac = model.param_jacobian(theta, pts);
    for (int k : {0, p / 2, p - 1}) {
        Vector e = Vector::Zero(p);
        e[k] = 1.0;
        const Vector got = model.dir_param_deriv(theta, e, pts);
        CHECK((got.transpose() - jac.row(k)).cwiseAbs().maxCoeff() <= 1e-13);
    }

    Rng rng(602);
    Vector v(p);
    for (int i = 0; i < p; ++i) v[i] = rng.normal();
    const Vector got = model.dir_param_deriv(theta, v, pts);
    const Vector expect = jac.transpose() * v;
    CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, expect.cwiseAbs().maxCoeff()));
}

TEST_CASE("score_loss_grad: perfect fit, finite differences, symbolic single unit") {
    ArchSpec a = small_arch(2, Activation::Softplus);
    const MlpEnergy model(a);
    const Vector theta = random_theta(a, 700);
    const PointSet pts = random_points(2, 6, 701);

    // Target scores equal to the model's own gradient: zero loss and gradient.
    const Matrix own = model.grad_x(theta, pts);
    Vector grad;
    const double loss0 = model.score_loss_grad(theta, pts, own, grad);
    CHECK(loss0 <= 1e-28);
    CHECK(grad.cwiseAbs().maxCoeff() <= 1e-13);

    // Finite differences of the loss in θ.
    Rng rng(702);
    Matrix scores(2, 6);
    for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 2; ++i) scores(i, j) = rng.normal();
    const double loss = model.score_loss_grad(theta, pts, scores, grad);
    CHECK(loss > 0.0);
    double worst = 0.0;
    const double h = 1e-6;
    Vector dummy;
    for (int k = 0; k < param_count(a); ++k) {
        Vector tp = theta, tm = theta;
        tp[k] += h;
        tm[k] -= h;
        const double fd = (model.score_loss_grad(tp, pts, scores, dummy) -
                           model.score_loss_grad(tm, pts, scores, dummy)) /
                          (2 * h);
        worst = std::max(worst, std::abs(grad[k] - fd) / std::max(1.0, std::abs(fd)));
    }
    CHECK(worst <= 1e-5);

    // One point, one cosine unit: u = w2·cos(w1 x + b1) + b2,
    // u' = −w2·w1·sin(z), L = (u' − s)², hand mixed derivatives.
    ArchSpec tiny;
    tiny.input_dim = 1;
    tiny.hidden = {1};
    tiny.activation = Activation::Cosine;
    const MlpEnergy tiny_model(tiny);
    Vector th(4);
    th << 1.1, -0.2, 0.8, 0.05;  // w1, b1, w2, b2
    Matrix x1(1, 1);
    x1(0, 0) = 0.3;
    Matrix s1(1, 1);
    s1(0, 0) = 0.25;
    Vector g;
    const double l = tiny_model.score_loss_grad(th, PointSet(Matrix(x1)), s1, g);
    const double z = 1.1 * 0.3 - 0.2;
    const double up = -0.8 * 1.1 * std::sin(z);
    const double r = up - 0.25;
    CHECK(l == doctest::Approx(r * r).epsilon(1e-12));
    // ∂u'/∂w1 = −w2·sin(z) − w2·w1·cos(z)·x, ∂u'/∂b1 = −w2·w1·cos(z),
    // ∂u'/∂w2 = −w1·sin(z), ∂u'/∂b2 = 0.
    const Vector expect =
        2.0 * r *
        (Vector(4) << -0.8 * std::sin(z) - 0.8 * 1.1 * std::cos(z) * 0.3,
         -0.8 * 1.1 * std::cos(z), -1.1 * std::sin(z), 0.0)
            .finished();
    CHECK((g - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("activation ranges") {
    ArchSpec a = small_arch(2, Activation::Cosine);
    ArchSpec b = small_arch(2, Activation::Softplus);
    const PointSet pts = random_points(2, 50, 900);
    // Cosine hidden activations lie in [−1, 1]: with a unit output head that
    // sums them, |u| ≤ width of the last layer.
    Vector theta = random_theta(a, 901);
    const int p = param_count(a);
    theta.segment(p - 8, 7).setOnes();
    theta[p - 1] = 0.0;
    CHECK(MlpEnergy(a).eval(theta, pts).cwiseAbs().maxCoeff() <= 7.0 + 1e-12);
    // Softplus activations are positive: the same head gives positive outputs.
    CHECK((MlpEnergy(b).eval(theta, pts).array() > 0.0).all());
}

TEST_CASE("determinism: identical inputs give bit-identical outputs") {
    ArchSpec a = small_arch(3, Activation::Softplus);
    const MlpEnergy model(a);
    const Vector theta = random_theta(a, 1000);
    const PointSet pts = random_points(3, 30, 1001);
    CHECK(model.eval(theta, pts) == model.eval(theta, pts));
    CHECK(model.grad_x(theta, pts) == model.grad_x(theta, pts));
    CHECK(model.lap_masked(theta, pts, {0, 2}) == model.lap_masked(theta, pts, {0, 2}));
    CHECK(model.param_jacobian(theta, pts) == model.param_jacobian(theta, pts));
}

TEST_CASE("params: save/load round trip") {
    ArchSpec a = small_arch(2, Activation::Cosine);
    ModelParams p{a, random_theta(a, 1100)};
    save_params(p, "/tmp/mne_test_params.json");
    const ModelParams q = load_params("/tmp/mne_test_params.json");
    CHECK(q.arch.input_dim == a.input_dim);
    CHECK(q.arch.hidden == a.hidden);
    CHECK(q.theta == p.theta);
}

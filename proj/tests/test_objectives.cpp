#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "samedge/objectives.hpp"
#include "samedge/rng.hpp"

#include <cmath>
#include <memory>

using namespace samedge;

namespace {

// Independent dense evaluation of c + b.w + w'Hw/2 with plain loops; the
// oracle for QuadraticModel::loss.
double dense_quadratic_loss(const Eigen::MatrixXd& h, const Eigen::VectorXd& b, double c,
                            const Eigen::VectorXd& w) {
    double acc = c;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        acc += b[i] * w[i];
        for (Eigen::Index j = 0; j < w.size(); ++j) acc += 0.5 * w[i] * h(i, j) * w[j];
    }
    return acc;
}

Eigen::MatrixXd random_symmetric(int d, Rng& rng) {
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return 0.5 * (m + m.transpose());
}

MlpModel small_mlp(Activation act, int n = 20, std::uint64_t seed = 5) {
    Rng rng(seed);
    const int p = 3, q = 2;
    Eigen::MatrixXd x(n, p), y(n, q);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
    return MlpModel({p, 4, 4, q}, act, x, y);
}

double fd_directional_loss(const Objective& obj, const ParamVector& w, const ParamVector& u,
                           double eps) {
    return (obj.loss(w + eps * u) - obj.loss(w - eps * u)) / (2.0 * eps);
}

ParamVector fd_hvp(const Objective& obj, const ParamVector& w, const ParamVector& v, double eps) {
    return (obj.gradient(w + eps * v).grad - obj.gradient(w - eps * v).grad) / (2.0 * eps);
}

}  // namespace

TEST_CASE("quadratic loss, hand values") {
    const QuadraticModel model(Eigen::MatrixXd::Identity(2, 2));
    ParamVector w(2);
    w << 3.0, 4.0;
    CHECK(model.loss(w) == doctest::Approx(12.5).epsilon(1e-15));
}

TEST_CASE("quadratic loss matches independent dense evaluation") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 5;
        const Eigen::MatrixXd h = random_symmetric(d, rng);
        const Eigen::VectorXd b = rng.normal_vector(d);
        const double c = rng.normal();
        const QuadraticModel model(h, b, c);
        const ParamVector w = rng.normal_vector(d);
        const double expected = dense_quadratic_loss(h, b, c, w);
        CHECK(model.loss(w) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("quadratic gradient and stationary point") {
    ParamVector diag(2);
    diag << 2.0, 4.0;
    const QuadraticModel model = QuadraticModel::from_diagonal(diag);
    ParamVector w(2);
    w << 1.0, 1.0;
    const GradientInfo g = model.gradient(w);
    CHECK(g.grad[0] == 2.0);
    CHECK(g.grad[1] == 4.0);
    CHECK(g.norm == doctest::Approx(std::sqrt(20.0)).epsilon(1e-15));

    // minimizer of a PSD quadratic with a linear term
    Rng rng(3);
    const int d = 6;
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    const Eigen::MatrixXd h = m * m.transpose() + Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd b = rng.normal_vector(d);
    const QuadraticModel psd(h, b, 0.0);
    const ParamVector w_min = -h.ldlt().solve(b);
    CHECK(psd.gradient(w_min).norm <= 1e-10);
}

TEST_CASE("quadratic hvp is H v independent of w") {
    Rng rng(17);
    const Eigen::MatrixXd h = random_symmetric(4, rng);
    const QuadraticModel model(h);
    const ParamVector v = rng.normal_vector(4);
    const ParamVector expected = h.selfadjointView<Eigen::Lower>() * v;
    for (int i = 0; i < 3; ++i) {
        const ParamVector w = rng.normal_vector(4) * 10.0;
        CHECK((model.hvp(w, v) - expected).norm() == 0.0);
    }
}

TEST_CASE("upper triangle of the input never matters") {
    Rng rng(23);
    Eigen::MatrixXd h = random_symmetric(4, rng);
    Eigen::MatrixXd poisoned = h;
    poisoned(0, 3) = 99.0;  // strict upper entry, must be ignored
    const QuadraticModel a(h), b(poisoned);
    const ParamVector w = rng.normal_vector(4);
    CHECK(a.loss(w) == b.loss(w));
    CHECK((a.dense_hessian() - b.dense_hessian()).norm() == 0.0);
}

TEST_CASE("mlp: zero weights and zero targets give zero loss") {
    const int n = 8, p = 3, q = 2;
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(n, p);
    const Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, q);
    const MlpModel model({p, 5, q}, Activation::tanh, x, y);
    CHECK(model.loss(ParamVector::Zero(model.dim())) == 0.0);
}

TEST_CASE("mlp packed parameter count") {
    CHECK(packed_param_count({3, 4, 4, 2}) == (3 + 1) * 4 + (4 + 1) * 4 + (4 + 1) * 2);
    const MlpModel model = small_mlp(Activation::tanh);
    CHECK(model.dim() == packed_param_count({3, 4, 4, 2}));
}

TEST_CASE("mlp gradient matches central finite differences of the loss") {
    const MlpModel model = small_mlp(Activation::tanh);
    Rng rng(29);
    const ParamVector w = 0.5 * rng.normal_vector(model.dim());
    const GradientInfo g = model.gradient(w);
    for (int i = 0; i < 10; ++i) {
        ParamVector u = rng.normal_vector(model.dim());
        u.normalize();
        const double fd = fd_directional_loss(model, w, u, 1e-5);
        CHECK(g.grad.dot(u) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("mlp hvp matches finite differences of the gradient (tanh)") {
    const MlpModel model = small_mlp(Activation::tanh);
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const ParamVector w = 0.5 * rng.normal_vector(model.dim());
        ParamVector v = rng.normal_vector(model.dim());
        v.normalize();
        const ParamVector hv = model.hvp(w, v);
        const ParamVector fd = fd_hvp(model, w, v, 1e-4);
        CHECK((hv - fd).norm() <= 1e-4 * std::max(1.0, hv.norm()));
    }
}

TEST_CASE("mlp hvp matches finite differences away from relu kinks") {
    const MlpModel model = small_mlp(Activation::relu);
    Rng rng(37);
    int tested = 0;
    while (tested < 10) {
        const ParamVector w = 0.7 * rng.normal_vector(model.dim());
        if (model.min_abs_preactivation(w) <= 1e-3) continue;  // too close to a kink for FD
        ParamVector v = rng.normal_vector(model.dim());
        v.normalize();
        const ParamVector hv = model.hvp(w, v);
        const ParamVector fd = fd_hvp(model, w, v, 1e-6);
        CHECK((hv - fd).norm() <= 1e-4 * std::max(1.0, hv.norm()));
        ++tested;
    }
}

TEST_CASE("hvp linearity and symmetry over random draws") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const bool use_mlp = trial % 2 == 0;
        std::unique_ptr<Objective> holder;
        if (use_mlp) {
            holder = std::make_unique<MlpModel>(small_mlp(
                trial % 4 == 0 ? Activation::tanh : Activation::relu, 10, 100 + trial));
        } else {
            holder = std::make_unique<QuadraticModel>(random_symmetric(6, rng));
        }
        const Objective& obj = *holder;
        const ParamVector w = 0.5 * rng.normal_vector(obj.dim());
        const ParamVector u = rng.normal_vector(obj.dim());
        const ParamVector v = rng.normal_vector(obj.dim());
        const double a = rng.normal(), b = rng.normal();

        const ParamVector lhs = obj.hvp(w, a * u + b * v);
        const ParamVector rhs = a * obj.hvp(w, u) + b * obj.hvp(w, v);
        CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, lhs.norm()));

        const double ut_hv = u.dot(obj.hvp(w, v));
        const double vt_hu = v.dot(obj.hvp(w, u));
        CHECK(ut_hv == doctest::Approx(vt_hu).epsilon(1e-10));
    }
}

TEST_CASE("one-step GD loss change equals the quadratic expansion") {
    Rng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform_int(0, 7));
        const Eigen::MatrixXd h = random_symmetric(d, rng);
        const Eigen::VectorXd b = rng.normal_vector(d);
        const QuadraticModel model(h, b, rng.normal());
        const ParamVector w = rng.normal_vector(d);
        const GradientInfo g = model.gradient(w);
        const double eta = rng.log_uniform(1e-4, 1e-1);

        const ParamVector w1 = w - eta * g.grad;
        const double l0 = model.loss(w), l1 = model.loss(w1);
        const double direct = l1 - l0;
        const double ghg = g.grad.dot(model.apply_hessian(g.grad));
        const double expansion = -eta * g.grad.squaredNorm() + 0.5 * eta * eta * ghg;
        // `direct` subtracts two O(|l0|) losses, so agreement is relative to
        // the magnitudes that entered the subtraction.
        const double scale = std::max({std::abs(direct), std::abs(expansion), std::abs(l0),
                                       std::abs(l1)});
        CHECK(std::abs(direct - expansion) <= 1e-12 * std::max(scale, 1e-300));
    }
}

TEST_CASE("mse loss is nonnegative and stable under pack/unpack") {
    const MlpModel model = small_mlp(Activation::tanh);
    Rng rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        const ParamVector w = rng.normal_vector(model.dim());
        const double loss = model.loss(w);
        CHECK(loss >= 0.0);
        const ParamVector repacked = model.pack(model.unpack(w));
        CHECK((repacked - w).norm() == 0.0);
        CHECK(model.loss(repacked) == loss);
    }
}

TEST_CASE("glorot init: variance, determinism, zero biases") {
    // single 2->2 layer: 4 weights per seed, target variance 2/(2+2) = 0.5
    const std::vector<int> widths = {2, 2};
    double sum = 0.0, sum_sq = 0.0;
    long count = 0;
    for (std::uint64_t seed = 0; seed < 100000; ++seed) {
        const ParamVector w = glorot_init(widths, seed);
        for (int i = 0; i < 4; ++i) {
            sum += w[i];
            sum_sq += w[i] * w[i];
            ++count;
        }
        CHECK(w[4] == 0.0);
        CHECK(w[5] == 0.0);
    }
    const double mean = sum / count;
    const double var = sum_sq / count - mean * mean;
    CHECK(var == doctest::Approx(0.5).epsilon(0.05));

    const ParamVector a = glorot_init({3, 4, 2}, 1234);
    const ParamVector b = glorot_init({3, 4, 2}, 1234);
    CHECK((a - b).norm() == 0.0);
    CHECK(a != glorot_init({3, 4, 2}, 1235));
}

TEST_CASE("dimension and finiteness errors") {
    const QuadraticModel model(Eigen::MatrixXd::Identity(3, 3));
    CHECK_THROWS_AS(model.loss(ParamVector::Zero(2)), std::invalid_argument);
    CHECK_THROWS_AS(model.hvp(ParamVector::Zero(3), ParamVector::Zero(4)),
                    std::invalid_argument);
    ParamVector bad = ParamVector::Zero(3);
    bad[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(model.gradient(bad), DivergedError);

    const MlpModel mlp = small_mlp(Activation::tanh);
    CHECK_THROWS_AS(mlp.loss(ParamVector::Zero(3)), std::invalid_argument);
    ParamVector bad_mlp = ParamVector::Zero(mlp.dim());
    bad_mlp[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(mlp.gradient(bad_mlp), DivergedError);
}

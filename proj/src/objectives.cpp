#include "samedge/objectives.hpp"

#include "samedge/rng.hpp"

#include <cmath>

namespace samedge {

// ---------------------------------------------------------------------------
// QuadraticModel

QuadraticModel::QuadraticModel(const Eigen::MatrixXd& hessian, ParamVector linear, double offset)
    : lower_(Eigen::MatrixXd::Zero(hessian.rows(), hessian.cols())),
      linear_(std::move(linear)),
      offset_(offset) {
    if (hessian.rows() != hessian.cols() || hessian.rows() < 1) {
        throw std::invalid_argument("QuadraticModel: hessian must be square, d >= 1");
    }
    require_dim(hessian.rows(), linear_.size(), "QuadraticModel linear term");
    lower_.triangularView<Eigen::Lower>() = hessian.triangularView<Eigen::Lower>();
}

QuadraticModel::QuadraticModel(const Eigen::MatrixXd& hessian)
    : QuadraticModel(hessian, ParamVector::Zero(hessian.rows()), 0.0) {}

QuadraticModel QuadraticModel::from_diagonal(const ParamVector& diag) {
    return QuadraticModel(Eigen::MatrixXd(diag.asDiagonal()));
}

ParamVector QuadraticModel::apply_hessian(const ParamVector& v) const {
    require_dim(dim(), v.size(), "QuadraticModel::apply_hessian");
    return lower_.selfadjointView<Eigen::Lower>() * v;
}

double QuadraticModel::loss(const ParamVector& w) const {
    require_dim(dim(), w.size(), "QuadraticModel::loss");
    return offset_ + linear_.dot(w) + 0.5 * w.dot(apply_hessian(w));
}

GradientInfo QuadraticModel::gradient(const ParamVector& w) const {
    require_dim(dim(), w.size(), "QuadraticModel::gradient");
    if (!w.allFinite()) throw DivergedError("QuadraticModel::gradient: non-finite parameters");
    return GradientInfo(linear_ + apply_hessian(w));
}

ParamVector QuadraticModel::hvp(const ParamVector& w, const ParamVector& v) const {
    require_dim(dim(), w.size(), "QuadraticModel::hvp");
    return apply_hessian(v);
}

Eigen::MatrixXd QuadraticModel::dense_hessian() const {
    Eigen::MatrixXd h = lower_.selfadjointView<Eigen::Lower>();
    return h;
}

// ---------------------------------------------------------------------------
// MlpModel

Eigen::Index packed_param_count(const std::vector<int>& widths) {
    if (widths.size() < 2) throw std::invalid_argument("widths: need at least input and output");
    Eigen::Index count = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        if (widths[l] < 1 || widths[l + 1] < 1) {
            throw std::invalid_argument("widths: all layer widths must be positive");
        }
        count += static_cast<Eigen::Index>(widths[l] + 1) * widths[l + 1];
    }
    return count;
}

namespace {

inline double act(Activation a, double x) {
    return a == Activation::tanh ? std::tanh(x) : (x > 0.0 ? x : 0.0);
}

// First derivative in terms of the preactivation x and the activation h.
inline double act_d1(Activation a, double x, double h) {
    return a == Activation::tanh ? 1.0 - h * h : (x > 0.0 ? 1.0 : 0.0);
}

// Second derivative; identically zero for relu (derivative-at-0 convention).
inline double act_d2(Activation a, double /*x*/, double h) {
    return a == Activation::tanh ? -2.0 * h * (1.0 - h * h) : 0.0;
}

}  // namespace

struct MlpModel::Tape {
    std::vector<Eigen::MatrixXd> h;  // h[0] = inputs, h[l+1] = layer-l output, width x n
    std::vector<Eigen::MatrixXd> a;  // a[l] = preactivations of layer l
};

MlpModel::MlpModel(std::vector<int> widths, Activation activation, Eigen::MatrixXd inputs,
                   Eigen::MatrixXd targets)
    : widths_(std::move(widths)),
      activation_(activation),
      inputs_t_(inputs.transpose()),
      targets_t_(targets.transpose()) {
    param_count_ = packed_param_count(widths_);
    if (inputs.rows() != targets.rows() || inputs.rows() < 1) {
        throw std::invalid_argument("MlpModel: inputs/targets must have the same nonzero row count");
    }
    if (inputs.cols() != widths_.front()) {
        throw std::invalid_argument("MlpModel: input dimension does not match widths.front()");
    }
    if (targets.cols() != widths_.back()) {
        throw std::invalid_argument("MlpModel: target dimension does not match widths.back()");
    }
}

std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> MlpModel::unpack(
    const ParamVector& w) const {
    require_dim(param_count_, w.size(), "MlpModel::unpack");
    std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> out;
    Eigen::Index off = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        const Eigen::Index rows = widths_[l + 1], cols = widths_[l];
        out.emplace_back(Eigen::Map<const Eigen::MatrixXd>(w.data() + off, rows, cols),
                         Eigen::Map<const Eigen::VectorXd>(w.data() + off + rows * cols, rows));
        off += rows * cols + rows;
    }
    return out;
}

ParamVector MlpModel::pack(
    const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& layers) const {
    ParamVector w(param_count_);
    Eigen::Index off = 0;
    for (const auto& [weight, bias] : layers) {
        Eigen::Map<Eigen::MatrixXd>(w.data() + off, weight.rows(), weight.cols()) = weight;
        Eigen::Map<Eigen::VectorXd>(w.data() + off + weight.size(), bias.size()) = bias;
        off += weight.size() + bias.size();
    }
    require_dim(param_count_, off, "MlpModel::pack");
    return w;
}

void MlpModel::forward(const ParamVector& w, Tape& tape) const {
    const auto layers = unpack(w);
    const std::size_t n_layers = layers.size();
    tape.h.resize(n_layers + 1);
    tape.a.resize(n_layers);
    tape.h[0] = inputs_t_;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const auto& [weight, bias] = layers[l];
        tape.a[l] = (weight * tape.h[l]).colwise() + bias;
        if (l + 1 < n_layers) {
            tape.h[l + 1] =
                tape.a[l].unaryExpr([this](double x) { return act(activation_, x); });
        } else {
            tape.h[l + 1] = tape.a[l];  // linear output layer
        }
    }
}

double MlpModel::loss(const ParamVector& w) const {
    Tape tape;
    forward(w, tape);
    const double n = static_cast<double>(inputs_t_.cols());
    return (tape.h.back() - targets_t_).squaredNorm() / n;
}

GradientInfo MlpModel::gradient(const ParamVector& w) const {
    require_dim(param_count_, w.size(), "MlpModel::gradient");
    if (!w.allFinite()) throw DivergedError("MlpModel::gradient: non-finite parameters");

    const auto layers = unpack(w);
    const std::size_t n_layers = layers.size();
    Tape tape;
    forward(w, tape);
    const double n = static_cast<double>(inputs_t_.cols());

    ParamVector grad = ParamVector::Zero(param_count_);
    Eigen::Index off_end = param_count_;

    // delta = dloss/da for the current layer, swept from the output down.
    Eigen::MatrixXd delta = (2.0 / n) * (tape.h.back() - targets_t_);
    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& weight = layers[l].first;
        off_end -= static_cast<Eigen::Index>(widths_[l] + 1) * widths_[l + 1];
        Eigen::Map<Eigen::MatrixXd>(grad.data() + off_end, weight.rows(), weight.cols()) =
            delta * tape.h[l].transpose();
        Eigen::Map<Eigen::VectorXd>(grad.data() + off_end + weight.size(), weight.rows()) =
            delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd gh = weight.transpose() * delta;  // dloss/dh[l]
            delta = gh.cwiseProduct(tape.a[l - 1].binaryExpr(
                tape.h[l], [this](double x, double h) { return act_d1(activation_, x, h); }));
        }
    }
    return GradientInfo(std::move(grad));
}

ParamVector MlpModel::hvp(const ParamVector& w, const ParamVector& v) const {
    require_dim(param_count_, w.size(), "MlpModel::hvp");
    require_dim(param_count_, v.size(), "MlpModel::hvp direction");

    const auto layers = unpack(w);
    const auto tangents = unpack(v);
    const std::size_t n_layers = layers.size();
    Tape tape;
    forward(w, tape);
    const double n = static_cast<double>(inputs_t_.cols());

    // Forward tangent sweep: ra[l] = R(a[l]), rh[l] = R(h[l]).
    std::vector<Eigen::MatrixXd> ra(n_layers), rh(n_layers + 1), d1(n_layers);
    rh[0] = Eigen::MatrixXd::Zero(inputs_t_.rows(), inputs_t_.cols());
    for (std::size_t l = 0; l < n_layers; ++l) {
        const auto& [weight, bias] = layers[l];
        const auto& [tweight, tbias] = tangents[l];
        ra[l] = ((weight * rh[l] + tweight * tape.h[l]).colwise() + tbias);
        if (l + 1 < n_layers) {
            d1[l] = tape.a[l].binaryExpr(
                tape.h[l + 1], [this](double x, double h) { return act_d1(activation_, x, h); });
            rh[l + 1] = d1[l].cwiseProduct(ra[l]);
        } else {
            rh[l + 1] = ra[l];
        }
    }

    ParamVector out = ParamVector::Zero(param_count_);
    Eigen::Index off_end = param_count_;

    // Reverse sweep carrying both delta and its tangent R(delta).
    Eigen::MatrixXd delta = (2.0 / n) * (tape.h.back() - targets_t_);
    Eigen::MatrixXd rdelta = (2.0 / n) * rh.back();
    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& weight = layers[l].first;
        const auto& tweight = tangents[l].first;
        off_end -= static_cast<Eigen::Index>(widths_[l] + 1) * widths_[l + 1];
        Eigen::Map<Eigen::MatrixXd>(out.data() + off_end, weight.rows(), weight.cols()) =
            rdelta * tape.h[l].transpose() + delta * rh[l].transpose();
        Eigen::Map<Eigen::VectorXd>(out.data() + off_end + weight.size(), weight.rows()) =
            rdelta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd gh = weight.transpose() * delta;
            Eigen::MatrixXd rgh = weight.transpose() * rdelta + tweight.transpose() * delta;
            const Eigen::MatrixXd d2 = tape.a[l - 1].binaryExpr(
                tape.h[l], [this](double x, double h) { return act_d2(activation_, x, h); });
            delta = gh.cwiseProduct(d1[l - 1]);
            rdelta = rgh.cwiseProduct(d1[l - 1]) + gh.cwiseProduct(d2).cwiseProduct(ra[l - 1]);
        }
    }
    return out;
}

double MlpModel::min_abs_preactivation(const ParamVector& w) const {
    Tape tape;
    forward(w, tape);
    double min_abs = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l + 1 < tape.a.size(); ++l) {  // hidden layers only
        min_abs = std::min(min_abs, tape.a[l].cwiseAbs().minCoeff());
    }
    return min_abs;
}

ParamVector glorot_init(const std::vector<int>& widths, std::uint64_t seed) {
    const Eigen::Index count = packed_param_count(widths);
    ParamVector w = ParamVector::Zero(count);
    Rng rng(seed);
    Eigen::Index off = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const Eigen::Index rows = widths[l + 1], cols = widths[l];
        const double stdev = std::sqrt(2.0 / (widths[l] + widths[l + 1]));
        for (Eigen::Index i = 0; i < rows * cols; ++i) w[off + i] = stdev * rng.normal();
        off += rows * cols + rows;  // biases stay zero
    }
    return w;
}

}  // namespace samedge

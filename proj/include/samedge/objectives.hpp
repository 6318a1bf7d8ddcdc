#pragma once

#include "samedge/types.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace samedge {

/// A twice-differentiable objective. Implementations are immutable after
/// construction; loss/gradient/hvp are pure functions of their arguments and
/// safe to call concurrently.
class Objective {
  public:
    virtual ~Objective() = default;

    virtual Eigen::Index dim() const = 0;

    /// l(w). Finite unless w itself is non-finite.
    virtual double loss(const ParamVector& w) const = 0;

    /// Exact analytic gradient with its norm. Throws DivergedError when w is
    /// non-finite.
    virtual GradientInfo gradient(const ParamVector& w) const = 0;

    /// Exact Hessian-vector product H(w) * v, computed without materializing
    /// H and without finite differences.
    virtual ParamVector hvp(const ParamVector& w, const ParamVector& v) const = 0;
};

/// Explicit quadratic l(w) = c + b.w + w'Hw/2. Only the lower triangle of H
/// is stored, so symmetry holds by construction.
class QuadraticModel final : public Objective {
  public:
    /// The lower triangle of `hessian` defines the (symmetric) operator; the
    /// strict upper triangle is ignored.
    QuadraticModel(const Eigen::MatrixXd& hessian, ParamVector linear, double offset);

    /// Homogeneous quadratic: b = 0, c = 0.
    explicit QuadraticModel(const Eigen::MatrixXd& hessian);

    static QuadraticModel from_diagonal(const ParamVector& diag);

    Eigen::Index dim() const override { return lower_.rows(); }
    double loss(const ParamVector& w) const override;
    GradientInfo gradient(const ParamVector& w) const override;
    ParamVector hvp(const ParamVector& w, const ParamVector& v) const override;

    /// H * v (the Hessian does not depend on w).
    ParamVector apply_hessian(const ParamVector& v) const;

    /// Dense symmetric reconstruction, for tests and lab tooling.
    Eigen::MatrixXd dense_hessian() const;

    const ParamVector& linear() const { return linear_; }
    double offset() const { return offset_; }

  private:
    Eigen::MatrixXd lower_;  // only the lower triangle is meaningful
    ParamVector linear_;
    double offset_ = 0.0;
};

enum class Activation { relu, tanh };

/// Fully connected network trained with quadratic loss on a fixed dataset:
///
///   loss(w) = (1/n) sum_i || f(x_i; w) - y_i ||^2
///
/// (mean over examples, sum over output coordinates). Hidden layers use the
/// configured activation, the output layer is linear. Parameters are packed
/// per layer: the w_out x w_in weight matrix in column-major order, then the
/// bias. ReLU uses derivative 0 at 0; its HVP is the almost-everywhere
/// Hessian.
class MlpModel final : public Objective {
  public:
    MlpModel(std::vector<int> widths, Activation activation,
             Eigen::MatrixXd inputs,   // n x p, one row per example
             Eigen::MatrixXd targets); // n x q

    Eigen::Index dim() const override { return param_count_; }
    double loss(const ParamVector& w) const override;
    GradientInfo gradient(const ParamVector& w) const override;

    /// Exact HVP by forward-over-reverse differentiation on the stored
    /// forward tape (Pearlmutter's trick).
    ParamVector hvp(const ParamVector& w, const ParamVector& v) const override;

    const std::vector<int>& widths() const { return widths_; }
    Activation activation() const { return activation_; }
    Eigen::Index n_examples() const { return inputs_t_.cols(); }

    /// Smallest |preactivation| over all hidden units and examples; ReLU's
    /// HVP agrees with finite differences only away from these kinks.
    double min_abs_preactivation(const ParamVector& w) const;

    /// Per-layer (weights, bias) views of a packed vector.
    std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> unpack(const ParamVector& w) const;
    ParamVector pack(const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& layers) const;

  private:
    struct Tape;  // forward activations, defined in the .cpp
    void forward(const ParamVector& w, Tape& tape) const;

    std::vector<int> widths_;
    Activation activation_;
    Eigen::MatrixXd inputs_t_;   // p x n, column per example
    Eigen::MatrixXd targets_t_;  // q x n
    Eigen::Index param_count_ = 0;
};

/// Number of packed parameters for the given layer widths.
Eigen::Index packed_param_count(const std::vector<int>& widths);

/// Glorot normal initialization: weights ~ N(0, 2/(fan_in+fan_out)), biases
/// zero. Deterministic for a fixed seed.
ParamVector glorot_init(const std::vector<int>& widths, std::uint64_t seed);

}  // namespace samedge

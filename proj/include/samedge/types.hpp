#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace samedge {

/// Flat float64 parameter/state vector of dimension d >= 1.
using ParamVector = Eigen::VectorXd;

/// Gradient together with its Euclidean norm.
struct GradientInfo {
    ParamVector grad;
    double norm = 0.0;

    GradientInfo() = default;
    explicit GradientInfo(ParamVector g) : grad(std::move(g)), norm(grad.norm()) {}
};

/// Thrown when an update rule is evaluated at a point where it is undefined
/// (SAM with rho > 0 and a vanishing gradient).
struct ZeroGradientError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when parameters or gradients stop being finite.
struct DivergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Configuration / validation problem (exit code 1 at the CLI).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem / file-format problem (exit code 2 at the CLI).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require_dim(Eigen::Index expected, Eigen::Index got, const char* what) {
    if (expected != got) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch, expected " +
                                    std::to_string(expected) + ", got " + std::to_string(got));
    }
}

}  // namespace samedge

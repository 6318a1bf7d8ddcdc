#pragma once

#include "samedge/objectives.hpp"
#include "samedge/types.hpp"

#include <optional>

namespace samedge {

/// Step size, SAM radius and run limits. rho = 0 means plain GD.
struct OptimConfig {
    double eta = 0.1;
    double rho = 0.0;
    long max_steps = 1000;
    /// Absolute loss cap; unset means 1e6 x initial loss.
    std::optional<double> divergence_threshold;
};

void validate(const OptimConfig& config);

/// GD edge of stability, 2/eta.
double gd_edge(double eta);

/// SAM edge of stability, (|g|/2rho)(sqrt(1 + 8rho/(eta|g|)) - 1).
/// By convention rho = 0 returns gd_edge(eta), the continuous limit, so
/// logging code needs no branch.
double sam_edge(double eta, double rho, double grad_norm);

/// Ratio of the SAM edge to 2/eta as a function of alpha = eta|g|/(2rho):
/// (alpha/2)(sqrt(1 + 4/alpha) - 1). Approaches 1 as alpha -> inf and
/// sqrt(alpha) as alpha -> 0.
double edge_ratio(double alpha);

/// Both edges plus the alpha/ratio pair they are connected by.
struct EdgeReport {
    double gd_edge = 0.0;
    double sam_edge = 0.0;
    double alpha = 0.0;
    double ratio = 0.0;
};

EdgeReport edge_report(double eta, double rho, double grad_norm);

/// One gradient-descent step w - eta * grad(w). config.rho is ignored.
ParamVector gd_step(const Objective& objective, const ParamVector& w, const OptimConfig& config);

/// One SAM step: gradient taken at w + rho * g/|g|, then a step of length
/// eta times that gradient. rho = 0 reduces to gd_step bit-for-bit. Throws
/// ZeroGradientError when rho > 0 and |g| = 0.
ParamVector sam_step(const Objective& objective, const ParamVector& w, const OptimConfig& config);

/// The arithmetic of gd_step/sam_step given an already-computed gradient at
/// w; the steppers above and the experiment harness share this path so their
/// trajectories are bit-identical.
ParamVector gd_step_with_grad(const ParamVector& w, const GradientInfo& g,
                              const OptimConfig& config);
ParamVector sam_step_with_grad(const Objective& objective, const ParamVector& w,
                               const GradientInfo& g, const OptimConfig& config);

}  // namespace samedge

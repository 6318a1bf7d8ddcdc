#include "samedge/optim.hpp"

#include <cmath>

namespace samedge {

void validate(const OptimConfig& config) {
    if (!(config.eta > 0.0)) throw ConfigError("optim.eta must be > 0");
    if (!(config.rho >= 0.0)) throw ConfigError("optim.rho must be >= 0");
    if (config.max_steps < 1) throw ConfigError("optim.max_steps must be >= 1");
    if (config.divergence_threshold && !(*config.divergence_threshold > 0.0)) {
        throw ConfigError("optim.divergence_threshold must be > 0");
    }
}

double gd_edge(double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("gd_edge: eta must be > 0");
    return 2.0 / eta;
}

double sam_edge(double eta, double rho, double grad_norm) {
    if (!(eta > 0.0)) throw std::invalid_argument("sam_edge: eta must be > 0");
    if (!(rho >= 0.0)) throw std::invalid_argument("sam_edge: rho must be >= 0");
    if (rho == 0.0) return gd_edge(eta);
    if (!(grad_norm > 0.0)) throw std::invalid_argument("sam_edge: grad_norm must be > 0");
    return grad_norm / (2.0 * rho) * (std::sqrt(1.0 + 8.0 * rho / (eta * grad_norm)) - 1.0);
}

double edge_ratio(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("edge_ratio: alpha must be > 0");
    return 0.5 * alpha * (std::sqrt(1.0 + 4.0 / alpha) - 1.0);
}

EdgeReport edge_report(double eta, double rho, double grad_norm) {
    EdgeReport report;
    report.gd_edge = gd_edge(eta);
    report.sam_edge = sam_edge(eta, rho, grad_norm);
    if (rho > 0.0) {
        report.alpha = eta * grad_norm / (2.0 * rho);
        report.ratio = report.sam_edge / report.gd_edge;
    } else {
        report.alpha = std::numeric_limits<double>::infinity();
        report.ratio = 1.0;
    }
    return report;
}

ParamVector gd_step_with_grad(const ParamVector& w, const GradientInfo& g,
                              const OptimConfig& config) {
    if (!g.grad.allFinite()) throw DivergedError("gd_step: non-finite gradient");
    return w - config.eta * g.grad;
}

ParamVector sam_step_with_grad(const Objective& objective, const ParamVector& w,
                               const GradientInfo& g, const OptimConfig& config) {
    if (config.rho == 0.0) return gd_step_with_grad(w, g, config);
    if (!g.grad.allFinite()) throw DivergedError("sam_step: non-finite gradient");
    if (g.norm == 0.0) throw ZeroGradientError("sam_step: SAM update undefined at zero gradient");
    const ParamVector uphill = w + (config.rho / g.norm) * g.grad;
    const GradientInfo uphill_grad = objective.gradient(uphill);
    if (!uphill_grad.grad.allFinite()) throw DivergedError("sam_step: non-finite uphill gradient");
    return w - config.eta * uphill_grad.grad;
}

ParamVector gd_step(const Objective& objective, const ParamVector& w, const OptimConfig& config) {
    return gd_step_with_grad(w, objective.gradient(w), config);
}

ParamVector sam_step(const Objective& objective, const ParamVector& w, const OptimConfig& config) {
    return sam_step_with_grad(objective, w, objective.gradient(w), config);
}

}  // namespace samedge

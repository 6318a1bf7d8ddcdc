#pragma once

#include "samedge/objectives.hpp"
#include "samedge/optim.hpp"
#include "samedge/rng.hpp"
#include "samedge/types.hpp"

#include <cstdint>
#include <utility>

namespace samedge {

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// (one per column).
struct EigenDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;

    Eigen::Index dim() const { return eigenvalues.size(); }
    ParamVector principal_eigenvector() const { return eigenvectors.col(0); }
};

/// Dense symmetric eigendecomposition of a quadratic model's Hessian,
/// sorted by descending eigenvalue.
EigenDecomposition dense_eigendecomposition(const QuadraticModel& model);

/// Exact one-step loss change of SAM on the quadratic with this spectrum,
/// starting from gradient g:
///
///   delta = -eta * sum_i (v_i.g)^2 (1 + rho lam_i/|g|)(1 - eta (1 + rho lam_i/|g|) lam_i / 2)
///
/// rho = 0 reduces to the GD expansion -eta sum_i (v_i.g)^2 (1 - eta lam_i/2).
double closed_form_step_delta(const EigenDecomposition& eig, const GradientInfo& g, double eta,
                              double rho);

/// Open interval of eigenvalues whose per-direction term decreases the loss:
/// the two roots of eta*rho*lam^2 + eta*|g|*lam - 2|g| = 0. The upper
/// endpoint equals sam_edge(eta, rho, |g|).
std::pair<double, double> stable_interval(double grad_norm, double eta, double rho);

enum class TermSign { positive, zero, negative };

/// Sign of the per-eigendirection factor product
/// (1 + rho*lam/|g|)(1 - eta(1 + rho*lam/|g|)lam/2), decided by comparing
/// lam against -|g|/rho and the stable_interval endpoints.
TermSign term_sign(double lambda_i, double grad_norm, double eta, double rho);

/// Outcome of a randomized sign-law verification. Trials whose loss change
/// is within the 1e-12 boundary band are skipped, not adjudicated.
struct SignLawReport {
    long trials = 0;
    long checked = 0;
    long mismatches = 0;
    long boundary_skips = 0;

    bool passed() const { return mismatches == 0; }
};

/// Loss change over one step, evaluated in the cancellation-free product
/// form l(w1) - l(w0) = (w1-w0).(b + H(w1+w0)/2); exact for quadratics.
double exact_loss_change(const QuadraticModel& model, const ParamVector& w0,
                         const ParamVector& w1);

/// A random quadratic QᵀDQ with |D| log-uniform in [1e-2, 1e2] and Q drawn
/// from the QR factorization of a Gaussian matrix, together with its known
/// eigendecomposition (sorted descending). mixed_sign flips each
/// eigenvalue's sign with probability 1/2; otherwise the model is PSD.
std::pair<QuadraticModel, EigenDecomposition> random_quadratic(int dim, Rng& rng, bool mixed_sign);

/// Randomized verification of the SAM sign law: on PSD quadratics with the
/// gradient aligned to the principal eigenvector,
/// sign(l(w1) - l(w0)) == sign(lam_1 - sam_edge). Trials draw the dimension
/// uniformly from [2, max_dim].
SignLawReport verify_prop_sign(int max_dim, long trials, std::uint64_t seed);

/// Same protocol for plain GD: sign(l(w1) - l(w0)) == sign(lam_1 - 2/eta).
SignLawReport verify_gd_prop_sign(int max_dim, long trials, std::uint64_t seed);

/// Randomized verification that closed_form_step_delta matches the directly
/// simulated one-step loss change on mixed-sign quadratics to 1e-10
/// relative error.
SignLawReport verify_closed_form(int max_dim, long trials, std::uint64_t seed);

/// Locates the loss-change sign flip of one SAM step on the aligned 1D
/// quadratic by bisection over the curvature, using only direct sam_step
/// simulation. Independent numerical confirmation of the sam_edge formula.
double edge_bisection_oracle(double eta, double rho, double grad_norm, double tol);

/// edge_bisection_oracle vs sam_edge over an n x n x n log-spaced grid of
/// (eta, rho, |g|) in [1e-3, 1]^3; a trial mismatches when the two disagree
/// by more than 1e-6 relative.
SignLawReport verify_edge_bisection(int grid_n);

}  // namespace samedge

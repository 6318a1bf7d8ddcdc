#include "samedge/spectral.hpp"

#include "samedge/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace samedge {

namespace {

void fix_sign(ParamVector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] != 0.0) {
            if (v[i] < 0.0) v = -v;
            return;
        }
    }
}

struct RitzSelection {
    Eigen::VectorXd values;          // top-k by |theta|, descending magnitude
    Eigen::MatrixXd coefficients;    // m x k, columns are tridiagonal eigenvectors
    Eigen::VectorXd residual_bounds; // beta_m * |last coefficient| per pair
};

RitzSelection select_top_ritz(const Eigen::VectorXd& diag, const Eigen::VectorXd& subdiag,
                              double next_beta, int k) {
    const Eigen::Index m = diag.size();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, subdiag.head(std::max<Eigen::Index>(m - 1, 0)));

    std::vector<Eigen::Index> order(m);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(solver.eigenvalues()[a]) > std::abs(solver.eigenvalues()[b]);
    });

    RitzSelection sel;
    const int kk = static_cast<int>(std::min<Eigen::Index>(k, m));
    sel.values.resize(kk);
    sel.coefficients.resize(m, kk);
    sel.residual_bounds.resize(kk);
    for (int i = 0; i < kk; ++i) {
        sel.values[i] = solver.eigenvalues()[order[i]];
        sel.coefficients.col(i) = solver.eigenvectors().col(order[i]);
        sel.residual_bounds[i] = std::abs(next_beta * sel.coefficients(m - 1, i));
    }
    return sel;
}

}  // namespace

SpectralEstimate top_k_eigs(const Objective& objective, const ParamVector& w,
                            const SpectralOptions& options) {
    const Eigen::Index d = objective.dim();
    require_dim(d, w.size(), "top_k_eigs");
    if (options.k < 1 || options.k > d) {
        throw std::invalid_argument("top_k_eigs: need 1 <= k <= dim");
    }
    if (!(options.tol > 0.0)) throw std::invalid_argument("top_k_eigs: tol must be > 0");
    if (options.max_iters <= options.k) {
        throw std::invalid_argument("top_k_eigs: max_iters must exceed k");
    }

    SpectralEstimate estimate;
    Rng rng(options.seed);

    // Krylov basis with full reorthogonalization; the HVP budget keeps
    // hvp_calls <= max_iters * k including the k explicit residual products.
    const Eigen::Index max_basis = std::min<Eigen::Index>(d, options.max_iters - options.k);
    std::vector<ParamVector> basis;
    basis.reserve(static_cast<std::size_t>(max_basis));
    Eigen::VectorXd diag(max_basis), subdiag(max_basis);

    ParamVector v = rng.normal_vector(d);
    v.normalize();
    basis.push_back(v);

    const auto reorthogonalize = [&](ParamVector& u) {
        for (int pass = 0; pass < 2; ++pass) {
            for (const ParamVector& q : basis) u -= q.dot(u) * q;
        }
    };

    Eigen::Index m = 0;
    double next_beta = 0.0;
    double op_scale = 0.0;
    while (m < max_basis) {
        ParamVector u = objective.hvp(w, basis[static_cast<std::size_t>(m)]);
        ++estimate.hvp_calls;
        diag[m] = basis[static_cast<std::size_t>(m)].dot(u);
        reorthogonalize(u);
        next_beta = u.norm();
        ++m;
        op_scale = std::max({op_scale, std::abs(diag[m - 1]), next_beta});

        if (m >= options.k) {
            const auto sel = select_top_ritz(diag.head(m), subdiag, next_beta, options.k);
            bool all_small = true;
            for (int i = 0; i < sel.values.size(); ++i) {
                if (sel.residual_bounds[i] > 0.9 * options.tol * std::max(1.0, std::abs(sel.values[i]))) {
                    all_small = false;
                    break;
                }
            }
            if (all_small) break;
        }

        if (next_beta <= 1e-13 * std::max(op_scale, 1.0)) {
            // Invariant subspace found. Restart with a fresh direction if the
            // basis is still too small to carry k pairs.
            if (m >= options.k) break;
            ParamVector fresh = rng.normal_vector(d);
            reorthogonalize(fresh);
            const double norm = fresh.norm();
            if (norm <= 1e-13) break;  // space exhausted
            subdiag[m - 1] = 0.0;
            basis.push_back(fresh / norm);
            continue;
        }
        if (m < max_basis) {
            subdiag[m - 1] = next_beta;
            basis.push_back(u / next_beta);
        }
    }

    const auto sel = select_top_ritz(diag.head(m), subdiag, next_beta, options.k);
    const int kk = static_cast<int>(sel.values.size());
    estimate.eigenvalues = sel.values;
    estimate.residuals.resize(kk);
    estimate.eigenvectors.reserve(static_cast<std::size_t>(kk));
    estimate.converged = true;
    for (int i = 0; i < kk; ++i) {
        ParamVector y = ParamVector::Zero(d);
        for (Eigen::Index j = 0; j < m; ++j) {
            y += sel.coefficients(j, i) * basis[static_cast<std::size_t>(j)];
        }
        y.normalize();
        fix_sign(y);
        const ParamVector hy = objective.hvp(w, y);
        ++estimate.hvp_calls;
        estimate.residuals[i] = (hy - sel.values[i] * y).norm();
        if (estimate.residuals[i] > options.tol * std::max(1.0, std::abs(sel.values[i]))) {
            estimate.converged = false;
        }
        estimate.eigenvectors.push_back(std::move(y));
    }
    if (kk < options.k) estimate.converged = false;
    return estimate;
}

double operator_norm(const SpectralEstimate& estimate) {
    if (estimate.eigenvalues.size() == 0) {
        throw std::invalid_argument("operator_norm: empty estimate");
    }
    return std::abs(estimate.eigenvalues[0]);
}

double alignment(const ParamVector& g, const ParamVector& v1) {
    require_dim(g.size(), v1.size(), "alignment");
    const double gn = g.norm(), vn = v1.norm();
    if (gn == 0.0 || vn == 0.0) throw std::invalid_argument("alignment: zero vector");
    return std::abs(g.dot(v1)) / (gn * vn);
}

AlignmentRecord alignment_pair(const Objective& objective, const ParamVector& w, double rho,
                               const ParamVector& v1) {
    const GradientInfo g = objective.gradient(w);
    if (g.norm == 0.0) throw ZeroGradientError("alignment_pair: zero gradient");
    AlignmentRecord record;
    record.align_iterate = alignment(g.grad, v1);
    if (rho == 0.0) {
        record.align_uphill = record.align_iterate;
    } else {
        const GradientInfo uphill = objective.gradient(w + (rho / g.norm) * g.grad);
        if (uphill.norm == 0.0) throw ZeroGradientError("alignment_pair: zero uphill gradient");
        record.align_uphill = alignment(uphill.grad, v1);
    }
    return record;
}

}  // namespace samedge

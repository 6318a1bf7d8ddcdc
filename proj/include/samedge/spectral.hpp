#pragma once

#include "samedge/objectives.hpp"
#include "samedge/types.hpp"

#include <cstdint>
#include <vector>

namespace samedge {

/// Top-k Hessian eigenpairs ordered by descending |eigenvalue| (signed
/// values retained), with the per-pair residual norms |Hv - lam v| and the
/// number of Hessian-vector products spent.
struct SpectralEstimate {
    Eigen::VectorXd eigenvalues;
    std::vector<ParamVector> eigenvectors;
    Eigen::VectorXd residuals;
    long hvp_calls = 0;
    bool converged = true;
};

struct SpectralOptions {
    int k = 3;
    double tol = 1e-6;
    int max_iters = 200;
    std::uint64_t seed = 0;
};

/// Estimates the top-k eigenpairs (by magnitude) of the Hessian of the
/// objective at w, using Lanczos iteration with full reorthogonalization on
/// the matrix-free HVP. Deterministic for a fixed seed. If the residual
/// targets are not met within max_iters the best estimate is returned with
/// converged = false. Eigenvectors are unit length, pairwise orthogonal, and
/// sign-fixed so their first nonzero component is positive.
SpectralEstimate top_k_eigs(const Objective& objective, const ParamVector& w,
                            const SpectralOptions& options);

/// |lam_1| of an estimate: the Hessian operator norm. Throws on an empty
/// estimate.
double operator_norm(const SpectralEstimate& estimate);

/// Absolute cosine |u.v| / (|u||v|) in [0, 1]. Throws on zero vectors.
double alignment(const ParamVector& g, const ParamVector& v1);

/// Alignment of the iterate gradient and of the uphill gradient (evaluated
/// at w + rho g/|g|) with a principal eigenvector.
struct AlignmentRecord {
    double align_iterate = 0.0;
    double align_uphill = 0.0;
};

AlignmentRecord alignment_pair(const Objective& objective, const ParamVector& w, double rho,
                               const ParamVector& v1);

}  // namespace samedge

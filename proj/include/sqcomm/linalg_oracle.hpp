#pragma once

// Exact centralized linear algebra used as ground truth by the reductions and
// tests. Dense only; sizes stay at desk scale.

#include <cstddef>
#include <span>
#include <vector>

#include "sqcomm/types.hpp"

namespace sqcomm {

/// Singular values below rank_cutoff * sigma_max are treated as zero.
inline constexpr double rank_cutoff = 1e-10;
inline constexpr std::size_t max_dense_dimension = 4096;

/// Thin SVD restricted to the numerical rank: sigma is strictly decreasing or
/// tied, all entries positive; u, v have orthonormal columns.
struct svd_factors {
    rvector sigma;
    rmatrix u;
    rmatrix v;

    std::size_t rank() const { return static_cast<std::size_t>(sigma.size()); }
    rmatrix reconstruct() const;
};

/// Throws zero_matrix if a is zero or empty.
svd_factors svd(const rmatrix& a);

rmatrix pseudoinverse(const rmatrix& a);
/// x* = A^+ b.
rvector pinv_solve(const rmatrix& a, const rvector& b);

struct problem_params {
    double kappa_f = 0.0;  // ||A||_F / sigma_min
    double kappa = 0.0;    // ||A|| / sigma_min
    double gamma = 0.0;    // ||A x*|| / ||b||
    std::size_t sparsity = 0;
    std::size_t rank = 0;
};

/// Throws gamma_undefined if b is zero.
problem_params params(const rmatrix& a, const rvector& b);

/// sum over sigma_i >= delta of sigma_i u_i v_i^T. Ties at delta are kept.
rmatrix threshold_svd(const rmatrix& a, double delta);

struct top_singular_result {
    double sigma = 0.0;
    rvector v;
    /// The top singular value is repeated; v is then one unit vector of the
    /// top space, chosen by the decomposition.
    bool degenerate = false;
};

top_singular_result top_singular(const rmatrix& a);

/// e^{iAt} for Hermitian A, by eigendecomposition. Throws not_hermitian when
/// ||A - A^dagger||_F > 1e-10, bad_dimension above max_dense_dimension, and
/// numerical_failure if the result is not unitary to 1e-9.
cmatrix expm(const cmatrix& a, double t);
cvector expm_apply(const cmatrix& a, double t, const cvector& v);

/// H^{(x)n} v by the fast transform. Throws bad_dimension unless v has 2^n
/// entries.
rvector hadamard_apply(std::size_t n, const rvector& v);
cvector hadamard_apply(std::size_t n, const cvector& v);
rmatrix hadamard_matrix(std::size_t n);

/// Walsh-Hadamard transform without normalization: sum_x v_x (-1)^{x.y}.
rvector walsh_hadamard(const rvector& v);

/// Pr(y) = ((1/2^n) sum_x f(x) g(x) (-1)^{x.y})^2. Throws bad_dimension if the
/// lengths differ or are not a power of two, invalid_argument on entries
/// other than +-1.
std::vector<double> dsp_distribution(std::span<const int> f, std::span<const int> g);

/// log2 of a power of two; throws bad_dimension otherwise.
std::size_t log2_exact(std::size_t size);

} // namespace sqcomm

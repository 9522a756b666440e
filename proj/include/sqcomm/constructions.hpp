#pragma once

// The five reductions from communication problems to SQ-access tasks. Each
// builder returns the centralized data, its ownership layout for a session,
// and the closed-form quantities the proofs predict.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sqcomm/instances.hpp"
#include "sqcomm/session.hpp"
#include "sqcomm/types.hpp"

namespace sqcomm {

// ---------------------------------------------------------------------------
// Linear regression, row-sparse case (from k-player Set-Disjointness)

struct sparse_regression {
    rmatrix a;             // kn x k, one nonzero per row
    rvector b;             // kn
    session_layout layout; // first row block public, A block j at player j+1, rest of b at player 1
    rvector closed_form_x; // (beta_b/beta_a) e_0 + n sum_j <t_0|t_j> e_j
};

/// Throws invalid_argument unless beta_a, beta_b > 0.
sparse_regression build_regression_sparse(const disjointness_instance& inst, double beta_a = 1.0,
                                          double beta_b = 1.0);

struct disjointness_decision {
    bool intersect = false;
    std::vector<std::size_t> draws;
    std::uint64_t bits = 0;
};

/// Runs both setups through the session, then draws num_samples indices from
/// SQ(solution) and declares an intersection iff some draw is not index 0.
disjointness_decision decide_disjointness(session& s, const rvector& solution, std::size_t num_samples,
                                          rng_t& rng);

// ---------------------------------------------------------------------------
// Linear regression, dense case (from the distributed sampling problem)

struct dense_regression {
    std::size_t n = 0;
    rmatrix a;             // D_f H^{(x)n}, held by player 1
    rvector b;             // |g>, held by player 2
    session_layout layout;
    std::vector<double> target; // dsp_distribution(f, g)
};

/// Throws bad_dimension for n > 10.
dense_regression build_regression_dense(const function_pair& pair);

/// l2 law of pinv_solve(A, b).
std::vector<double> solution_law(const dense_regression& r);

// ---------------------------------------------------------------------------
// Supervised clustering (from k-Gap-Hamming)

struct clustering_construction {
    rmatrix a;             // rows -p/||p|| and q_i/(||q_i|| sqrt(k))
    rvector b;             // ||p||, ||q_i||/sqrt(k)
    session_layout layout; // player k+1 holds p's row and entry, player i holds q_i's
    rvector p;
    rvector q;             // mean of the q_i
    double alpha = 0.0;
    double distance_sq = 0.0;   // ||p - q||^2, direct vector arithmetic
    double bta_norm_sq = 0.0;   // ||b^T A||^2
    double threshold = 0.0;     // alpha^2 d (1 + 1/k^2)
    double epsilon = 0.0;       // alpha^2 sqrt(d) / k
};

/// alpha defaults to d^{-1/4}, so that alpha^2 sqrt(d) = 1.
clustering_construction build_clustering(const gap_hamming_instance& inst, std::optional<double> alpha = {});

/// Branch implied by an estimate of ||b^T A||^2: below the threshold means p
/// sits close to the centre, i.e. a positive inner product.
gap_sign decide_clustering(const clustering_construction& c, double estimate);

/// True iff both worst-case estimates distance_sq +- epsilon decide the
/// instance's branch.
bool clustering_separates(const clustering_construction& c, gap_sign truth);

// ---------------------------------------------------------------------------
// PCA and recommendation systems (from 2-player Set-Disjointness)

struct pca_construction {
    rmatrix a;             // (D_a; D_b), 2n x n
    session_layout layout; // D_a at player 1, D_b at player 2
    bit_string a_bits;
    bit_string b_bits;
    std::optional<std::size_t> intersection;
};

/// Throws dimension_mismatch on unequal lengths, zero_matrix if both strings
/// are zero, promise_violation on more than one intersection.
pca_construction build_pca(const bit_string& a_bits, const bit_string& b_bits);

struct pca_decision {
    double sigma = 0.0;
    bool degenerate = false;
    bool intersect_by_sigma = false;
    std::size_t sampled = 0;     // index drawn from the top right singular vector
    bool intersect_by_sample = false;
    bool sample_consistent = false; // sampled index lies in the set the proof allows
};

/// sigma >= sqrt(2) - margin means intersection.
inline constexpr double pca_sigma_margin = 0.1;

pca_decision decide_pca(const pca_construction& c, rng_t& rng);

struct recsys_construction {
    pca_construction base;
    double delta = 1.2;
    rmatrix thresholded; // A_{>=delta}
    std::size_t rank = 0;
};

/// Throws invalid_argument unless delta lies in (1, sqrt(2)).
recsys_construction build_recsys(const bit_string& a_bits, const bit_string& b_bits, double delta = 1.2);

struct recsys_decision {
    bool intersect = false;
    std::optional<std::size_t> row;
    std::optional<std::size_t> column;
};

/// l2-samples a row of A_{>=delta}, then a column within it. A zero matrix is
/// reported as no intersection.
recsys_decision decide_recsys(const recsys_construction& c, rng_t& rng);

// ---------------------------------------------------------------------------
// Hamiltonian simulation (from the distributed sampling problem)

struct hamiltonian_construction {
    std::size_t n = 0;
    rmatrix a;  // D_f ((1/2n) sum_j I (x) (I - H) (x) I) D_f, held by player 1
    rvector v;  // D_g H^{(x)n} |0...0>, held by player 2
    double t = 0.0; // n pi
    sign_vector f;
    sign_vector g;
    session_layout layout;
};

/// Throws bad_dimension for n = 0 or n > 8.
hamiltonian_construction build_hamiltonian(const function_pair& pair);

/// The matrix A for f alone.
rmatrix hamiltonian_matrix(std::span<const int> f);
/// D_f H^{(x)n} D_f.
rmatrix conjugated_hadamard(std::span<const int> f);
/// ||e^{iAt} - D_f H^{(x)n} D_f||_F
double identity_error(const hamiltonian_construction& h);
/// l2 law of e^{iAt} v.
std::vector<double> evolved_law(const hamiltonian_construction& h);
/// 2^{n-2} (n+1) / n
double hamiltonian_frobenius_sq(std::size_t n);

} // namespace sqcomm

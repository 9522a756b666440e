#pragma once

// Sampling-and-query (SQ) access to vectors and matrices, and phi-oversampled
// access with rejection sampling and norm estimation on top of it.
//
// Indices are zero-based throughout.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sqcomm/types.hpp"

namespace sqcomm {

/// Index drawn with probability proportional to nonnegative weights by a linear
/// scan. Throws all_zero if every weight is zero.
std::size_t sample_from_weights(std::span<const double> weights, rng_t& rng);

/// Immutable SQ structure over a complex vector: entry queries, the l2 norm, and
/// index samples with Pr(i) = |v_i|^2 / ||v||^2 drawn by inverse CDF over a
/// cumulative weight table.
class sq_vector {
public:
    /// Throws all_zero if every entry is zero, invalid_argument if empty.
    explicit sq_vector(std::vector<scalar> values);
    explicit sq_vector(const cvector& values);
    explicit sq_vector(const rvector& values);

    /// Same structure but a zero vector is accepted. Sampling it throws all_zero.
    /// Used for matrix rows and for protocol parts that may legitimately be zero.
    static sq_vector allow_zero(std::vector<scalar> values);

    std::size_t size() const noexcept { return values_.size(); }
    bool is_zero() const noexcept { return norm_sq_ == 0.0; }

    scalar query(std::size_t i) const;
    double norm() const noexcept { return norm_; }
    double norm_squared() const noexcept { return norm_sq_; }

    std::size_t sample(rng_t& rng) const;

    /// (|v_i|^2 / ||v||^2)_i. Throws all_zero on the zero vector.
    std::vector<double> exact_distribution() const;

    /// Mass |v_i|^2 held by bucket i of the weight table.
    double bucket_mass(std::size_t i) const;

    std::span<const scalar> values() const noexcept { return values_; }

private:
    struct unchecked {};
    sq_vector(std::vector<scalar> values, unchecked);

    std::vector<scalar> values_;
    std::vector<double> cumulative_;
    double norm_sq_ = 0.0;
    double norm_ = 0.0;
};

/// SQ access to a matrix: SQ(A_i*) for every row plus SQ(a) for the row-norm
/// vector a = (||A_1*||, ..., ||A_m*||).
class sq_matrix {
public:
    /// Throws all_zero if the matrix is zero, invalid_argument if it has no entries.
    explicit sq_matrix(const cmatrix& m);
    explicit sq_matrix(const rmatrix& m);

    /// Accepts the zero matrix; row sampling on it throws all_zero.
    static sq_matrix allow_zero(const rmatrix& m);

    std::size_t rows() const noexcept { return rows_.size(); }
    std::size_t cols() const noexcept { return cols_; }

    const sq_vector& row(std::size_t i) const;
    const sq_vector& row_norms() const noexcept { return row_norms_; }

    scalar query(std::size_t i, std::size_t j) const;
    double frobenius_norm() const noexcept { return row_norms_.norm(); }

    /// Row index drawn from the row-norm distribution.
    std::size_t sample_row(rng_t& rng) const { return row_norms_.sample(rng); }
    /// Column index drawn from row i. Throws all_zero for a zero row.
    std::size_t sample_in_row(std::size_t i, rng_t& rng) const { return row(i).sample(rng); }

private:
    struct unchecked {};
    sq_matrix(const cmatrix& m, unchecked);

    std::vector<sq_vector> rows_;
    sq_vector row_norms_;
    std::size_t cols_ = 0;
};

/// One entry of a target vector v together with the matching entry of its
/// dominator v~.
struct oversampled_entry {
    scalar target;
    scalar dominator;
};

/// phi-oversampled and query access SQ_phi(v): query access to v and SQ access
/// to a dominating vector v~ with |v~_j| >= |v_j| and ||v~||^2 = phi ||v||^2.
/// Implemented locally by oversample_access and by the coordinator protocols.
class oversampled_source {
public:
    virtual ~oversampled_source() = default;

    virtual std::size_t dimension() const = 0;
    virtual oversampled_entry query(std::size_t j) = 0;
    virtual std::size_t sample_dominator(rng_t& rng) = 0;
    virtual double dominator_norm() = 0;
    virtual double phi() const = 0;
};

/// Local SQ_phi(v): an exact copy of the target plus an SQ structure for v~.
class oversample_access final : public oversampled_source {
public:
    /// Throws dimension_mismatch, all_zero (zero target) or not_dominated.
    oversample_access(std::vector<scalar> target, sq_vector dominator);

    std::size_t dimension() const override { return target_.size(); }
    oversampled_entry query(std::size_t j) override;
    std::size_t sample_dominator(rng_t& rng) override { return dominator_.sample(rng); }
    double dominator_norm() override { return dominator_.norm(); }
    double phi() const override { return phi_; }

    std::span<const scalar> target() const noexcept { return target_; }
    const sq_vector& dominator() const noexcept { return dominator_; }
    double target_norm() const noexcept { return target_norm_; }

private:
    std::vector<scalar> target_;
    sq_vector dominator_;
    double target_norm_ = 0.0;
    double phi_ = 1.0;
};

struct rejection_outcome {
    std::size_t index = 0;
    std::size_t rounds = 0;
    std::size_t dominator_samples = 0;
    std::size_t target_queries = 0;
};

/// Round cap ceil(phi ln(1/delta)) + 1.
std::size_t rejection_round_cap(double phi, double delta);

/// Draws from D_v using SQ_phi(v): sample j from v~ and accept with probability
/// |v_j|^2 / |v~_j|^2. Throws timeout when every round up to the cap rejects.
rejection_outcome rejection_sample(oversampled_source& source, double delta, rng_t& rng);

/// Exact behaviour of rejection sampling obtained by expanding every
/// (dominator index, accept/reject) branch up to max_rounds.
struct rejection_law {
    std::vector<double> accepted;     // law of the output conditioned on acceptance
    double acceptance_probability = 0.0;
    double timeout_probability = 0.0;
    double expected_rounds = 0.0;
};

rejection_law enumerate_rejection(std::span<const double> dominator_law,
                                  std::span<const double> acceptance, std::size_t max_rounds);

/// Branch enumeration for a local oversample_access.
rejection_law enumerate_rejection(const oversample_access& access, std::size_t max_rounds);

struct norm_estimate {
    double value = 0.0;
    std::size_t samples = 0;
};

/// Sample count ceil(3 phi ln(2/delta) / eps^2) used by estimate_norm.
std::size_t norm_estimate_samples(double phi, double eps, double delta);

/// ||v~|| * sqrt(mean of |v_j|^2/|v~_j|^2) over dominator samples j.
/// Pr[|est - ||v||| > eps ||v||] <= delta.
norm_estimate estimate_norm(oversampled_source& source, double eps, double delta, rng_t& rng);

/// Same estimator with an explicit sample count.
norm_estimate estimate_norm_with(oversampled_source& source, std::size_t samples, rng_t& rng);

} // namespace sqcomm

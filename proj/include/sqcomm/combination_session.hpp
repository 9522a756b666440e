#pragma once

// Coordinator access to linear combinations b = sum_i mu_i b^(i) and
// A = sum_t lambda_t A^(t), where every player holds a full-size summand. The
// coordinator gets phi-oversampled access through the dominators
//   b~_j   = sqrt(k sum_i |mu_i b^(i)_j|^2)
//   A~_ij  = sqrt(k sum_t |lambda_t A^(t)_ij|^2)
// and turns it into SQ access by rejection sampling.

#include <cstddef>
#include <map>
#include <vector>

#include "sqcomm/channel.hpp"
#include "sqcomm/player.hpp"
#include "sqcomm/session.hpp"
#include "sqcomm/sq_access.hpp"

namespace sqcomm {

/// ||b|| (or ||A||_F, or a row norm) at or below which a combination counts as
/// cancelled.
inline constexpr double cancellation_tolerance = 1e-9;

class combination_session {
public:
    class vector_view;
    class matrix_view;
    class row_view;

    /// Throws dimension_mismatch unless every player holds b^(i) of one common
    /// length and A^(i) of one common shape (either part may be absent for all).
    explicit combination_session(const std::vector<player_part>& parts, encoding_spec enc = {},
                                 std::uint64_t seed = 0);

    std::size_t players() const { return link_.player_count(); }
    std::size_t rows() const noexcept { return m_; }
    std::size_t cols() const noexcept { return n_; }

    /// Each player sends ||b^(i)|| and m.
    void setup_b();
    /// Each player sends ||A^(t)||_F and m.
    void setup_a();

    /// SQ_phi(b) for the given weights. Throws dimension_mismatch on a weight
    /// count other than k, not_setup, or cancellation when ||b|| is negligible.
    vector_view b_view(std::vector<double> mu);
    matrix_view a_view(std::vector<double> lambda);

    const bit_meter& meter() const noexcept { return link_.meter(); }
    meter_summary meter_report() const { return link_.meter().summary(); }
    const encoding_spec& encoding() const noexcept { return link_.encoding(); }

private:
    friend class vector_view;
    friend class matrix_view;
    friend class row_view;

    std::vector<double> gather(message_kind kind, std::uint64_t index, std::uint64_t range);
    std::vector<double> peek_all(message_kind kind, std::uint64_t index, std::uint64_t range) const;
    const std::vector<double>& row_norms(std::size_t i);
    void check_weights(const std::vector<double>& w) const;

    coordinator_link link_;
    std::size_t m_ = 0;
    std::size_t n_ = 0;
    bool has_a_ = false;
    bool has_b_ = false;

    // Coordinator state, filled only from received messages.
    std::vector<double> b_norms_;
    std::vector<double> a_frobenius_;
    std::map<std::size_t, std::vector<double>> row_norm_cache_;

    // Harness-side ground truth, used only to report phi and to reject
    // cancelled combinations. Coordinator decisions never read it.
    std::vector<rvector> truth_b_;
    std::vector<rmatrix> truth_a_;
};

/// SQ_phi(b) with phi_b = k sum_i ||mu_i b^(i)||^2 / ||b||^2.
class combination_session::vector_view final : public oversampled_source {
public:
    std::size_t dimension() const override { return owner_->m_; }
    /// b_j and b~_j from one fan-out of k entry queries.
    oversampled_entry query(std::size_t j) override;
    /// Player i with probability ||mu_i b^(i)||^2 / sum, then j from b^(i).
    std::size_t sample_dominator(rng_t& rng) override;
    /// ||b~|| from the setup messages; free.
    double dominator_norm() override;
    double phi() const override { return phi_; }

    metered<double> query_value(std::size_t j);
    metered<std::size_t> dominator_sample(rng_t& rng);
    metered<rejection_outcome> sample(double delta, rng_t& rng);
    metered<norm_estimate> estimate_norm(double eps, double delta, rng_t& rng);

    /// Exact law of dominator_sample, by enumerating both stages.
    std::vector<double> dominator_law() const;
    /// Exact law of sample(), by enumerating every round up to max_rounds.
    rejection_law sample_law(std::size_t max_rounds) const;

    /// Exact combination and dominator (harness ground truth).
    rvector exact_target() const;
    rvector exact_dominator() const;

private:
    friend class combination_session;
    vector_view(combination_session& owner, std::vector<double> mu);

    combination_session* owner_;
    std::vector<double> mu_;
    double phi_ = 1.0;
};

/// SQ_phi(A) with phi_A = k sum_t ||lambda_t A^(t)||_F^2 / ||A||_F^2.
class combination_session::matrix_view {
public:
    double phi() const noexcept { return phi_; }

    /// A_ij and A~_ij from one fan-out of k entry queries.
    metered<oversampled_entry> entry(std::size_t i, std::size_t j);
    /// ||A~||_F from the setup messages; free.
    double dominator_frobenius() const;
    /// ||A~_i*||; fans out a row-norm query on first use of row i.
    metered<double> dominator_row_norm(std::size_t i);
    /// Column drawn from A~_i*: player s with probability
    /// ||lambda_s A^(s)_i*||^2 / sum, then a column from A^(s)_i*.
    metered<std::size_t> dominator_row_sample(std::size_t i, rng_t& rng);
    /// Row drawn from a~: player s with probability ||lambda_s A^(s)||_F^2 / sum,
    /// then a row from the row norms of A^(s).
    metered<std::size_t> dominator_row_norm_sample(rng_t& rng);

    /// SQ_phi(A_i*) for rejection sampling within row i.
    row_view row(std::size_t i);

    std::vector<double> dominator_row_law(std::size_t i) const;
    std::vector<double> dominator_row_norm_law() const;

    rmatrix exact_target() const;
    rmatrix exact_dominator() const;

private:
    friend class combination_session;
    friend class row_view;
    matrix_view(combination_session& owner, std::vector<double> lambda);
    std::vector<double> row_weights(const std::vector<double>& norms) const;

    combination_session* owner_;
    std::vector<double> lambda_;
    double phi_ = 1.0;
};

/// SQ_phi(A_i*) with phi = ||A~_i*||^2 / ||A_i*||^2.
class combination_session::row_view final : public oversampled_source {
public:
    std::size_t dimension() const override { return owner_->n_; }
    oversampled_entry query(std::size_t j) override;
    std::size_t sample_dominator(rng_t& rng) override;
    double dominator_norm() override;
    double phi() const override { return phi_; }

    metered<rejection_outcome> sample(double delta, rng_t& rng);
    rejection_law sample_law(std::size_t max_rounds) const;

private:
    friend class matrix_view;
    row_view(matrix_view parent, std::size_t row);

    matrix_view parent_;
    combination_session* owner_;
    std::size_t row_;
    double phi_ = 1.0;
};

} // namespace sqcomm

#pragma once

// Coordinator-model simulation of SQ access to a row-partitioned matrix A and
// vector b. Player i privately holds a block of rows A^(i) and a block b^(i);
// the coordinator talks to players only through a coordinator_link, and every
// exchange is charged to the bit meter.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "sqcomm/channel.hpp"
#include "sqcomm/encoding.hpp"
#include "sqcomm/player.hpp"
#include "sqcomm/sq_access.hpp"
#include "sqcomm/types.hpp"

namespace sqcomm {

/// A contiguous block of stacked rows, owned by a player (1..k) or public.
template <class Block>
struct segment {
    party_id owner = public_owner;
    Block data;
};

using matrix_segment = segment<rmatrix>;
using vector_segment = segment<rvector>;

/// Row layout of the stacked A and b: segments appear in stacking order. Each
/// player owns at most one segment of A and at most one of b; public segments
/// are known to the coordinator and cost nothing to access.
struct session_layout {
    std::size_t players = 0;
    std::vector<matrix_segment> a;
    std::vector<vector_segment> b;
};

template <class T>
struct metered {
    T value;
    std::uint64_t bits = 0;
};

namespace request {
struct row_norm_sample {};
struct row_sample {
    std::size_t row = 0;
};
struct entry_query {
    std::size_t row = 0;
    std::size_t col = 0;
};
struct frobenius_query {};
struct row_norm_query {
    std::size_t row = 0;
};
} // namespace request

/// One SQ(A) access of the kinds listed in the matrix definition.
using a_request = std::variant<request::row_norm_sample, request::row_sample, request::entry_query,
                               request::frobenius_query, request::row_norm_query>;

/// Sampled index or queried value.
using access_value = std::variant<std::size_t, double>;

enum class law_kind { b_sample, a_row_norm_sample, a_row_sample };

struct law_query {
    law_kind kind = law_kind::b_sample;
    std::size_t row = 0; // for a_row_sample
};

class session {
public:
    /// Throws dimension_mismatch on inconsistent shapes, a player owning more
    /// than one segment of A or of b, or an owner outside 1..players.
    session(session_layout layout, encoding_spec enc = {}, std::uint64_t seed = 0);

    /// Convenience for the plain setting: player i+1 holds parts[i], stacked in
    /// player order. Empty or absent parts are allowed.
    static session open(const std::vector<player_part>& parts, encoding_spec enc = {},
                        std::uint64_t seed = 0);

    std::size_t players() const { return link_.player_count(); }
    std::size_t rows() const noexcept { return m_; }
    std::size_t cols() const noexcept { return n_; }

    /// Each player sends ||b^(i)|| and m_i. Throws already_setup on repeat.
    void setup_b();
    bool b_ready() const noexcept { return b_ready_; }

    /// Two-stage sample: player from D_b locally, then a local index from it.
    metered<std::size_t> sample_b(rng_t& rng);
    metered<double> query_b(std::size_t j);
    /// ||b|| from the setup messages; free.
    double norm_b() const;
    /// Coordinator's D_b over the b segments.
    std::vector<double> segment_law_b() const;

    /// Each player sends ||A^(i)||_F and l_i. Throws already_setup on repeat.
    void setup_a();
    bool a_ready() const noexcept { return a_ready_; }

    metered<access_value> access_a(const a_request& req, rng_t& rng);

    /// Exact induced law of a sampling access, by expanding both random stages.
    /// No randomness, no charges.
    std::vector<double> protocol_distribution(const law_query& q) const;

    const bit_meter& meter() const noexcept { return link_.meter(); }
    meter_summary meter_report() const { return link_.meter().summary(); }
    const std::vector<exchange_record>& exchange_log() const noexcept { return link_.log(); }
    const encoding_spec& encoding() const noexcept { return link_.encoding(); }

    /// A coordinator with the same public knowledge whose channel replays this
    /// session's recorded responses. It holds no private player data.
    session replay() const;

private:
    struct b_block {
        party_id owner = public_owner;
        std::optional<sq_vector> public_data;
        std::size_t offset = 0;
        std::size_t length = 0;
        double norm = 0.0;
    };
    struct a_block {
        party_id owner = public_owner;
        std::optional<sq_matrix> public_data;
        std::size_t offset = 0;
        std::size_t length = 0;
        double frobenius = 0.0;
    };

    struct assembled {
        std::unique_ptr<channel> peer;
        std::size_t m = 0;
        std::size_t n = 0;
        std::vector<b_block> b;
        std::vector<a_block> a;
    };
    static assembled assemble(session_layout layout, std::uint64_t seed);
    session(assembled parts, encoding_spec enc);

    void require_b() const;
    void require_a() const;
    std::size_t b_block_of(std::size_t j) const;
    std::size_t a_block_of(std::size_t i) const;

    coordinator_link link_;
    std::size_t m_ = 0;
    std::size_t n_ = 0;
    std::vector<b_block> b_blocks_;
    std::vector<a_block> a_blocks_;
    bool b_ready_ = false;
    bool a_ready_ = false;
};

} // namespace sqcomm

#pragma once

#include <optional>
#include <vector>

#include "sqcomm/message.hpp"
#include "sqcomm/sq_access.hpp"
#include "sqcomm/types.hpp"

namespace sqcomm {

/// Private input of one player: a block of rows of A and/or a block of b.
/// Either part may be absent.
struct player_part {
    std::optional<rmatrix> a;
    std::optional<rvector> b;
};

/// A player holds SQ structures over its private data and answers coordinator
/// requests. It exposes nothing else; the coordinator only ever sees messages.
/// The public dimensions m (rows of the whole input) and n (columns) fix the
/// width of every index the player sends.
class player {
public:
    player(const player_part& part, std::size_t m, std::size_t n, rng_t rng);

    message respond(const message& request);

    /// Deterministic requests only (queries and setup reports); consumes no randomness.
    message answer(const message& request) const;

    /// Enumeration mode: exact law of the index returned for a sampling request.
    std::vector<double> response_law(const message& request) const;

private:
    const sq_vector& b_part() const;
    const sq_matrix& a_part() const;
    std::uint64_t local_row(const message& request) const;

    std::optional<sq_vector> b_;
    std::optional<sq_matrix> a_;
    std::size_t m_ = 1;
    std::size_t n_ = 1;
    std::size_t b_len_ = 0;
    std::size_t a_rows_ = 0;
    std::size_t a_cols_ = 0;
    double a_frobenius_ = 0.0;
    rng_t rng_;
};

} // namespace sqcomm

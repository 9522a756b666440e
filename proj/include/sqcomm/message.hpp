#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "sqcomm/encoding.hpp"

namespace sqcomm {

/// Party identifiers: the coordinator is 0, players are 1..k. Public blocks are
/// owned by nobody and held by the coordinator.
using party_id = int;
inline constexpr party_id coordinator_id = 0;
inline constexpr party_id public_owner = -1;

enum class message_kind : std::uint8_t {
    setup_b,          // -> ||b^(i)||, m_i
    sample_b,         // -> local index drawn from b^(i)
    query_b,          // local index -> b^(i)_j
    setup_a,          // -> ||A^(i)||_F, l_i
    sample_row_norm,  // -> local row drawn from a^(i)
    sample_row,       // local row -> column drawn from A^(i)_r*
    query_entry,      // (local row, column) -> A^(i)_rc
    query_row_norm,   // local row -> ||A^(i)_r*||
};

std::string_view to_string(message_kind kind) noexcept;

/// An index together with the size of the range it was drawn from; the range
/// determines its encoded width.
struct index_field {
    std::uint64_t value = 0;
    std::uint64_t range = 1;

    bool operator==(const index_field&) const = default;
};

struct message {
    message_kind kind{};
    std::vector<index_field> indices;
    std::vector<double> scalars;

    bool operator==(const message&) const = default;
};

/// Coordinator -> player: opcode plus index arguments.
std::uint64_t request_bits(const message& m, const encoding_spec& enc) noexcept;
/// Player -> coordinator: index and scalar payload only.
std::uint64_t response_bits(const message& m, const encoding_spec& enc) noexcept;

} // namespace sqcomm

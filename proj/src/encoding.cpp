#include "sqcomm/encoding.hpp"

#include <bit>

#include "sqcomm/errors.hpp"
#include "sqcomm/message.hpp"

namespace sqcomm {

unsigned encoding_spec::index_bits(std::uint64_t range) noexcept {
    if (range <= 1) return 0;
    return static_cast<unsigned>(std::bit_width(range - 1));
}

void encoding_spec::validate() const {
    if (scalar_bits < 8) throw invalid_argument("encoding_spec: scalar_bits must be >= 8");
}

std::string_view to_string(message_kind kind) noexcept {
    switch (kind) {
    case message_kind::setup_b: return "setup_b";
    case message_kind::sample_b: return "sample_b";
    case message_kind::query_b: return "query_b";
    case message_kind::setup_a: return "setup_a";
    case message_kind::sample_row_norm: return "sample_row_norm";
    case message_kind::sample_row: return "sample_row";
    case message_kind::query_entry: return "query_entry";
    case message_kind::query_row_norm: return "query_row_norm";
    }
    return "unknown";
}

namespace {

std::uint64_t index_payload(const message& m) noexcept {
    std::uint64_t bits = 0;
    for (const auto& f : m.indices) bits += encoding_spec::index_bits(f.range);
    return bits;
}

} // namespace

std::uint64_t request_bits(const message& m, const encoding_spec& enc) noexcept {
    return enc.opcode_bits + index_payload(m) + m.scalars.size() * enc.scalar_bits;
}

std::uint64_t response_bits(const message& m, const encoding_spec& enc) noexcept {
    return index_payload(m) + m.scalars.size() * enc.scalar_bits;
}

} // namespace sqcomm

#pragma once

#include <cstdint>

namespace sqcomm {

/// Fixed-width encoding of protocol messages. A transmitted scalar costs
/// scalar_bits (so entries live on a grid of q = 2^scalar_bits values), an index
/// into a range of size r costs ceil(log2 r) bits, and every coordinator request
/// carries an opcode.
struct encoding_spec {
    unsigned scalar_bits = 32;
    unsigned opcode_bits = 8;

    /// ceil(log2 range); zero for range <= 1.
    static unsigned index_bits(std::uint64_t range) noexcept;

    /// Throws invalid_argument if scalar_bits < 8.
    void validate() const;

    bool operator==(const encoding_spec&) const = default;
};

} // namespace sqcomm

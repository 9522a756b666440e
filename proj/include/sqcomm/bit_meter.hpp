#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sqcomm/message.hpp"

namespace sqcomm {

enum class protocol_phase : std::uint8_t { setup, access };

struct transcript_entry {
    std::uint64_t round = 0;
    party_id from = 0;
    party_id to = 0;
    message_kind kind{};
    std::uint64_t bits = 0;
    protocol_phase phase = protocol_phase::access;
};

struct kind_total {
    std::uint64_t messages = 0;
    std::uint64_t bits = 0;
};

struct meter_summary {
    std::uint64_t total_bits = 0;
    std::uint64_t setup_bits = 0;
    std::uint64_t access_bits = 0;
    std::uint64_t messages = 0;
    std::uint64_t rounds = 0;
    std::map<std::string, kind_total> by_kind;

    /// kind,messages,bits rows followed by the phase totals.
    void write_csv(std::ostream& out) const;
};

/// Ordered transcript of every message sent through the channels.
class bit_meter {
public:
    void record(transcript_entry entry);

    std::uint64_t total_bits() const noexcept { return total_bits_; }
    const std::vector<transcript_entry>& transcript() const noexcept { return transcript_; }

    meter_summary summary() const;

    /// One JSON object per line: {"round","from","to","kind","bits"}.
    void write_jsonl(std::ostream& out) const;

private:
    std::vector<transcript_entry> transcript_;
    std::uint64_t total_bits_ = 0;
};

} // namespace sqcomm

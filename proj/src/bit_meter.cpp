#include "sqcomm/bit_meter.hpp"

#include <ostream>
#include <set>

#include <json.hpp>

namespace sqcomm {

void bit_meter::record(transcript_entry entry) {
    total_bits_ += entry.bits;
    transcript_.push_back(entry);
}

meter_summary bit_meter::summary() const {
    meter_summary s;
    std::set<std::uint64_t> rounds;
    for (const auto& e : transcript_) {
        s.total_bits += e.bits;
        (e.phase == protocol_phase::setup ? s.setup_bits : s.access_bits) += e.bits;
        ++s.messages;
        rounds.insert(e.round);
        auto& k = s.by_kind[std::string(to_string(e.kind))];
        ++k.messages;
        k.bits += e.bits;
    }
    s.rounds = rounds.size();
    return s;
}

void bit_meter::write_jsonl(std::ostream& out) const {
    for (const auto& e : transcript_) {
        nlohmann::ordered_json line;
        line["round"] = e.round;
        line["from"] = e.from;
        line["to"] = e.to;
        line["kind"] = to_string(e.kind);
        line["bits"] = e.bits;
        out << line.dump() << '\n';
    }
}

void meter_summary::write_csv(std::ostream& out) const {
    out << "kind,messages,bits\n";
    for (const auto& [kind, t] : by_kind) out << kind << ',' << t.messages << ',' << t.bits << '\n';
    out << "phase:setup,," << setup_bits << '\n';
    out << "phase:access,," << access_bits << '\n';
    out << "total," << messages << ',' << total_bits << '\n';
}

} // namespace sqcomm

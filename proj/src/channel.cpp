#include "sqcomm/channel.hpp"

#include <string>

#include "sqcomm/errors.hpp"

namespace sqcomm {

live_channel::live_channel(const std::vector<player_part>& parts, std::size_t m, std::size_t n,
                           std::uint64_t seed) {
    players_.reserve(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i)
        players_.emplace_back(parts[i], m, n, derive_rng(seed, i + 1));
}

const player& live_channel::at(party_id to) const {
    if (to < 1 || static_cast<std::size_t>(to) > players_.size())
        throw invalid_argument("channel: no player " + std::to_string(to));
    return players_[static_cast<std::size_t>(to - 1)];
}

message live_channel::exchange(party_id to, const message& request) {
    at(to); // range check
    return players_[static_cast<std::size_t>(to - 1)].respond(request);
}

std::vector<double> live_channel::response_law(party_id to, const message& request) const {
    return at(to).response_law(request);
}

message live_channel::peek(party_id to, const message& request) const {
    return at(to).answer(request);
}

replay_channel::replay_channel(std::size_t players, std::vector<exchange_record> records)
    : players_(players), records_(std::move(records)) {}

message replay_channel::exchange(party_id to, const message& request) {
    if (next_ >= records_.size()) throw replay_divergence("replay: transcript exhausted");
    const auto& rec = records_[next_];
    if (rec.player != to || !(rec.request == request))
        throw replay_divergence("replay: request " + std::to_string(next_) +
                                " differs from the recorded one");
    ++next_;
    return rec.response;
}

std::vector<double> replay_channel::response_law(party_id, const message&) const {
    throw replay_divergence("replay: player laws are unavailable without player data");
}

message replay_channel::peek(party_id, const message&) const {
    throw replay_divergence("replay: player data is unavailable");
}

coordinator_link::coordinator_link(std::unique_ptr<channel> ch, encoding_spec enc)
    : channel_(std::move(ch)), encoding_(enc) {
    encoding_.validate();
}

message coordinator_link::exchange(party_id to, message request, protocol_phase phase) {
    ++round_;
    message response = channel_->exchange(to, request);
    meter_.record({round_, coordinator_id, to, request.kind, request_bits(request, encoding_), phase});
    meter_.record({round_, to, coordinator_id, request.kind, response_bits(response, encoding_), phase});
    log_.push_back({to, request, response});
    return response;
}

} // namespace sqcomm

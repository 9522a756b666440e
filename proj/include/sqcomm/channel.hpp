#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "sqcomm/bit_meter.hpp"
#include "sqcomm/message.hpp"
#include "sqcomm/player.hpp"

namespace sqcomm {

/// Two-way private channels between the coordinator and each player.
class channel {
public:
    virtual ~channel() = default;

    virtual std::size_t player_count() const = 0;
    virtual message exchange(party_id to, const message& request) = 0;

    /// Enumeration mode, never metered: law of a sampling response.
    virtual std::vector<double> response_law(party_id to, const message& request) const = 0;
    /// Enumeration mode, never metered: answer to a deterministic query.
    virtual message peek(party_id to, const message& request) const = 0;
};

/// Channel backed by in-process players.
class live_channel final : public channel {
public:
    /// Player i+1 gets parts[i] and a private random stream derived from seed;
    /// m and n are the public dimensions of the whole input.
    live_channel(const std::vector<player_part>& parts, std::size_t m, std::size_t n,
                 std::uint64_t seed);

    std::size_t player_count() const override { return players_.size(); }
    message exchange(party_id to, const message& request) override;
    std::vector<double> response_law(party_id to, const message& request) const override;
    message peek(party_id to, const message& request) const override;

private:
    const player& at(party_id to) const;
    std::vector<player> players_;
};

struct exchange_record {
    party_id player = 0;
    message request;
    message response;
};

/// Channel that replays recorded responses and holds no player data at all.
/// Throws replay_divergence if the coordinator sends a request other than the
/// recorded one.
class replay_channel final : public channel {
public:
    replay_channel(std::size_t players, std::vector<exchange_record> records);

    std::size_t player_count() const override { return players_; }
    message exchange(party_id to, const message& request) override;
    std::vector<double> response_law(party_id to, const message& request) const override;
    message peek(party_id to, const message& request) const override;

    bool exhausted() const noexcept { return next_ == records_.size(); }

private:
    std::size_t players_;
    std::vector<exchange_record> records_;
    std::size_t next_ = 0;
};

/// The coordinator's side of the channels: every exchange is one round, charged
/// to the meter and appended to the exchange log.
class coordinator_link {
public:
    coordinator_link(std::unique_ptr<channel> ch, encoding_spec enc);

    message exchange(party_id to, message request, protocol_phase phase);

    std::size_t player_count() const { return channel_->player_count(); }
    const encoding_spec& encoding() const noexcept { return encoding_; }
    const bit_meter& meter() const noexcept { return meter_; }
    const std::vector<exchange_record>& log() const noexcept { return log_; }
    const channel& peer() const noexcept { return *channel_; }

private:
    std::unique_ptr<channel> channel_;
    encoding_spec encoding_;
    bit_meter meter_;
    std::vector<exchange_record> log_;
    std::uint64_t round_ = 0;
};

} // namespace sqcomm

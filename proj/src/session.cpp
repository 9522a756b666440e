#include "sqcomm/session.hpp"

#include <cmath>
#include <string>

#include "sqcomm/errors.hpp"

namespace sqcomm {

namespace {

template <class Segment>
void check_owners(const std::vector<Segment>& segments, std::size_t players, const char* what) {
    std::vector<int> seen(players + 1, 0);
    for (const auto& s : segments) {
        if (s.owner == public_owner) continue;
        if (s.owner < 1 || static_cast<std::size_t>(s.owner) > players)
            throw dimension_mismatch(std::string("session: ") + what + " segment owner " +
                                     std::to_string(s.owner) + " is not a player");
        if (++seen[static_cast<std::size_t>(s.owner)] > 1)
            throw dimension_mismatch(std::string("session: player ") + std::to_string(s.owner) +
                                     " owns more than one segment of " + what);
    }
}

} // namespace

session::session(session_layout layout, encoding_spec enc, std::uint64_t seed)
    : session(assemble(std::move(layout), seed), enc) {}

session::assembled session::assemble(session_layout layout, std::uint64_t seed) {
    check_owners(layout.a, layout.players, "A");
    check_owners(layout.b, layout.players, "b");

    std::size_t a_rows = 0, b_rows = 0, n = 0;
    bool have_cols = false;
    for (const auto& s : layout.a) {
        if (s.data.rows() == 0) continue;
        if (have_cols && static_cast<std::size_t>(s.data.cols()) != n)
            throw dimension_mismatch("session: A segments disagree on the column count");
        n = static_cast<std::size_t>(s.data.cols());
        have_cols = true;
        a_rows += static_cast<std::size_t>(s.data.rows());
    }
    for (const auto& s : layout.b) b_rows += static_cast<std::size_t>(s.data.size());
    if (!layout.a.empty() && !layout.b.empty() && a_rows != b_rows)
        throw dimension_mismatch("session: A has " + std::to_string(a_rows) + " rows but b has " +
                                 std::to_string(b_rows));
    const std::size_t m = layout.a.empty() ? b_rows : a_rows;
    if (m == 0) throw dimension_mismatch("session: no data");

    std::vector<player_part> parts(layout.players);
    std::vector<b_block> b_blocks;
    std::vector<a_block> a_blocks;

    for (auto& s : layout.b) {
        b_block blk;
        blk.owner = s.owner;
        if (s.owner == public_owner) {
            blk.length = static_cast<std::size_t>(s.data.size());
            if (blk.length > 0) {
                blk.public_data = sq_vector::allow_zero({s.data.data(), s.data.data() + s.data.size()});
                blk.norm = blk.public_data->norm();
            }
        } else {
            parts[static_cast<std::size_t>(s.owner - 1)].b = s.data;
        }
        b_blocks.push_back(std::move(blk));
    }
    for (auto& s : layout.a) {
        a_block blk;
        blk.owner = s.owner;
        if (s.owner == public_owner) {
            blk.length = static_cast<std::size_t>(s.data.rows());
            if (blk.length > 0) {
                blk.public_data = sq_matrix::allow_zero(s.data);
                blk.frobenius = blk.public_data->frobenius_norm();
            }
        } else {
            parts[static_cast<std::size_t>(s.owner - 1)].a = s.data;
        }
        a_blocks.push_back(std::move(blk));
    }

    return {std::make_unique<live_channel>(parts, m, n, seed), m, n, std::move(b_blocks),
            std::move(a_blocks)};
}

session::session(assembled parts, encoding_spec enc)
    : link_(std::move(parts.peer), enc), m_(parts.m), n_(parts.n), b_blocks_(std::move(parts.b)),
      a_blocks_(std::move(parts.a)) {}

session session::open(const std::vector<player_part>& parts, encoding_spec enc, std::uint64_t seed) {
    session_layout layout;
    layout.players = parts.size();
    bool any_a = false, any_b = false;
    for (const auto& p : parts) {
        any_a = any_a || p.a.has_value();
        any_b = any_b || p.b.has_value();
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto owner = static_cast<party_id>(i + 1);
        if (any_a) layout.a.push_back({owner, parts[i].a.value_or(rmatrix())});
        if (any_b) layout.b.push_back({owner, parts[i].b.value_or(rvector())});
    }
    // Absent A parts still need a column count for consistency checks.
    if (any_a) {
        Eigen::Index n = 0;
        for (const auto& s : layout.a) n = std::max(n, s.data.cols());
        for (auto& s : layout.a)
            if (s.data.rows() == 0) s.data.resize(0, n);
    }
    return session(std::move(layout), enc, seed);
}

void session::setup_b() {
    if (b_ready_) throw already_setup("session: b setup already done");
    if (b_blocks_.empty()) throw dimension_mismatch("session: no b in this session");
    std::vector<std::size_t> reported(players() + 1, 0);
    std::vector<double> norms(players() + 1, 0.0);
    for (std::size_t p = 1; p <= players(); ++p) {
        const auto reply = link_.exchange(static_cast<party_id>(p), {message_kind::setup_b, {}, {}},
                                          protocol_phase::setup);
        norms[p] = reply.scalars.at(0);
        reported[p] = static_cast<std::size_t>(reply.indices.at(0).value);
    }
    std::size_t offset = 0;
    for (auto& blk : b_blocks_) {
        if (blk.owner != public_owner) {
            blk.length = reported[static_cast<std::size_t>(blk.owner)];
            blk.norm = norms[static_cast<std::size_t>(blk.owner)];
        }
        blk.offset = offset;
        offset += blk.length;
    }
    if (offset != m_) throw dimension_mismatch("session: reported b sizes do not sum to m");
    b_ready_ = true;
}

void session::require_b() const {
    if (!b_ready_) throw not_setup("session: b setup has not run");
}

void session::require_a() const {
    if (!a_ready_) throw not_setup("session: A setup has not run");
}

std::vector<double> session::segment_law_b() const {
    require_b();
    std::vector<double> w(b_blocks_.size());
    double total = 0.0;
    for (std::size_t s = 0; s < w.size(); ++s) total += (w[s] = b_blocks_[s].norm * b_blocks_[s].norm);
    if (total <= 0.0) throw all_zero("session: b is zero");
    for (double& x : w) x /= total;
    return w;
}

double session::norm_b() const {
    require_b();
    double sq = 0.0;
    for (const auto& blk : b_blocks_) sq += blk.norm * blk.norm;
    return std::sqrt(sq);
}

std::size_t session::b_block_of(std::size_t j) const {
    if (j >= m_) throw index_out_of_range("session: b index " + std::to_string(j) + " >= m");
    for (std::size_t s = 0; s < b_blocks_.size(); ++s)
        if (j < b_blocks_[s].offset + b_blocks_[s].length) return s;
    throw index_out_of_range("session: b index not covered");
}

std::size_t session::a_block_of(std::size_t i) const {
    if (i >= m_) throw index_out_of_range("session: row " + std::to_string(i) + " >= m");
    for (std::size_t s = 0; s < a_blocks_.size(); ++s)
        if (i < a_blocks_[s].offset + a_blocks_[s].length) return s;
    throw index_out_of_range("session: row not covered");
}

metered<std::size_t> session::sample_b(rng_t& rng) {
    require_b();
    std::vector<double> w(b_blocks_.size());
    for (std::size_t s = 0; s < w.size(); ++s) w[s] = b_blocks_[s].norm * b_blocks_[s].norm;
    const auto& blk = b_blocks_[sample_from_weights(w, rng)];
    if (blk.public_data) return {blk.offset + blk.public_data->sample(rng), 0};
    const auto before = meter().total_bits();
    const auto reply = link_.exchange(blk.owner, {message_kind::sample_b, {}, {}}, protocol_phase::access);
    return {blk.offset + static_cast<std::size_t>(reply.indices.at(0).value), meter().total_bits() - before};
}

metered<double> session::query_b(std::size_t j) {
    require_b();
    const auto& blk = b_blocks_[b_block_of(j)];
    const std::size_t local = j - blk.offset;
    if (blk.public_data) return {blk.public_data->query(local).real(), 0};
    const auto before = meter().total_bits();
    const auto reply =
        link_.exchange(blk.owner, {message_kind::query_b, {{local, m_}}, {}}, protocol_phase::access);
    return {reply.scalars.at(0), meter().total_bits() - before};
}

void session::setup_a() {
    if (a_ready_) throw already_setup("session: A setup already done");
    if (a_blocks_.empty()) throw dimension_mismatch("session: no A in this session");
    std::vector<std::size_t> reported(players() + 1, 0);
    std::vector<double> frob(players() + 1, 0.0);
    for (std::size_t p = 1; p <= players(); ++p) {
        const auto reply = link_.exchange(static_cast<party_id>(p), {message_kind::setup_a, {}, {}},
                                          protocol_phase::setup);
        frob[p] = reply.scalars.at(0);
        reported[p] = static_cast<std::size_t>(reply.indices.at(0).value);
    }
    std::size_t offset = 0;
    for (auto& blk : a_blocks_) {
        if (blk.owner != public_owner) {
            blk.length = reported[static_cast<std::size_t>(blk.owner)];
            blk.frobenius = frob[static_cast<std::size_t>(blk.owner)];
        }
        blk.offset = offset;
        offset += blk.length;
    }
    if (offset != m_) throw dimension_mismatch("session: reported A sizes do not sum to m");
    a_ready_ = true;
}

metered<access_value> session::access_a(const a_request& req, rng_t& rng) {
    require_a();
    const auto before = meter().total_bits();
    const auto spent = [&] { return meter().total_bits() - before; };

    if (std::holds_alternative<request::frobenius_query>(req)) {
        double sq = 0.0;
        for (const auto& blk : a_blocks_) sq += blk.frobenius * blk.frobenius;
        return {std::sqrt(sq), 0};
    }
    if (std::holds_alternative<request::row_norm_sample>(req)) {
        std::vector<double> w(a_blocks_.size());
        for (std::size_t s = 0; s < w.size(); ++s) w[s] = a_blocks_[s].frobenius * a_blocks_[s].frobenius;
        const auto& blk = a_blocks_[sample_from_weights(w, rng)];
        if (blk.public_data) return {blk.offset + blk.public_data->sample_row(rng), 0};
        const auto reply =
            link_.exchange(blk.owner, {message_kind::sample_row_norm, {}, {}}, protocol_phase::access);
        return {blk.offset + static_cast<std::size_t>(reply.indices.at(0).value), spent()};
    }
    if (const auto* r = std::get_if<request::row_sample>(&req)) {
        const auto& blk = a_blocks_[a_block_of(r->row)];
        const std::size_t local = r->row - blk.offset;
        if (blk.public_data) return {blk.public_data->sample_in_row(local, rng), 0};
        const auto reply = link_.exchange(blk.owner, {message_kind::sample_row, {{local, m_}}, {}},
                                          protocol_phase::access);
        return {static_cast<std::size_t>(reply.indices.at(0).value), spent()};
    }
    if (const auto* q = std::get_if<request::entry_query>(&req)) {
        if (q->col >= n_) throw index_out_of_range("session: column out of range");
        const auto& blk = a_blocks_[a_block_of(q->row)];
        const std::size_t local = q->row - blk.offset;
        if (blk.public_data) return {blk.public_data->query(local, q->col).real(), 0};
        const std::uint64_t joint = static_cast<std::uint64_t>(local) * n_ + q->col;
        const auto reply = link_.exchange(
            blk.owner, {message_kind::query_entry, {{joint, static_cast<std::uint64_t>(m_) * n_}}, {}},
            protocol_phase::access);
        return {reply.scalars.at(0), spent()};
    }
    const auto& rn = std::get<request::row_norm_query>(req);
    const auto& blk = a_blocks_[a_block_of(rn.row)];
    const std::size_t local = rn.row - blk.offset;
    if (blk.public_data) return {blk.public_data->row(local).norm(), 0};
    const auto reply = link_.exchange(blk.owner, {message_kind::query_row_norm, {{local, m_}}, {}},
                                      protocol_phase::access);
    return {reply.scalars.at(0), spent()};
}

std::vector<double> session::protocol_distribution(const law_query& q) const {
    std::vector<double> law(q.kind == law_kind::a_row_sample ? n_ : m_, 0.0);

    if (q.kind == law_kind::b_sample) {
        const auto stage1 = segment_law_b();
        for (std::size_t s = 0; s < b_blocks_.size(); ++s) {
            const auto& blk = b_blocks_[s];
            if (stage1[s] == 0.0) continue;
            const auto stage2 = blk.public_data
                                    ? blk.public_data->exact_distribution()
                                    : link_.peer().response_law(blk.owner, {message_kind::sample_b, {}, {}});
            for (std::size_t j = 0; j < stage2.size(); ++j) law[blk.offset + j] += stage1[s] * stage2[j];
        }
        return law;
    }

    require_a();
    if (q.kind == law_kind::a_row_norm_sample) {
        double total = 0.0;
        for (const auto& blk : a_blocks_) total += blk.frobenius * blk.frobenius;
        if (total <= 0.0) throw all_zero("session: A is zero");
        for (const auto& blk : a_blocks_) {
            const double p = blk.frobenius * blk.frobenius / total;
            if (p == 0.0) continue;
            const auto stage2 =
                blk.public_data ? blk.public_data->row_norms().exact_distribution()
                                : link_.peer().response_law(blk.owner, {message_kind::sample_row_norm, {}, {}});
            for (std::size_t i = 0; i < stage2.size(); ++i) law[blk.offset + i] += p * stage2[i];
        }
        return law;
    }

    const auto& blk = a_blocks_[a_block_of(q.row)];
    const std::size_t local = q.row - blk.offset;
    if (blk.public_data) return blk.public_data->row(local).exact_distribution();
    return link_.peer().response_law(blk.owner, {message_kind::sample_row, {{local, m_}}, {}});
}

session session::replay() const {
    std::vector<b_block> b;
    for (const auto& blk : b_blocks_) {
        b_block copy;
        copy.owner = blk.owner;
        if (blk.owner == public_owner) {
            copy.public_data = blk.public_data;
            copy.length = blk.length;
            copy.norm = blk.norm;
        }
        b.push_back(std::move(copy));
    }
    std::vector<a_block> a;
    for (const auto& blk : a_blocks_) {
        a_block copy;
        copy.owner = blk.owner;
        if (blk.owner == public_owner) {
            copy.public_data = blk.public_data;
            copy.length = blk.length;
            copy.frobenius = blk.frobenius;
        }
        a.push_back(std::move(copy));
    }
    return session({std::make_unique<replay_channel>(players(), link_.log()), m_, n_, std::move(b),
                    std::move(a)},
                   encoding());
}

} // namespace sqcomm

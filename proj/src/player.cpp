#include "sqcomm/player.hpp"

#include <algorithm>
#include <string>

#include "sqcomm/errors.hpp"

namespace sqcomm {

player::player(const player_part& part, std::size_t m, std::size_t n, rng_t rng)
    : m_(std::max<std::size_t>(m, 1)), n_(std::max<std::size_t>(n, 1)), rng_(std::move(rng)) {
    if (part.b && part.b->size() > 0) {
        std::vector<scalar> values(part.b->data(), part.b->data() + part.b->size());
        b_ = sq_vector::allow_zero(std::move(values));
        b_len_ = b_->size();
    }
    if (part.a && part.a->rows() > 0 && part.a->cols() > 0) {
        a_ = sq_matrix::allow_zero(*part.a);
        a_rows_ = a_->rows();
        a_cols_ = a_->cols();
        a_frobenius_ = a_->frobenius_norm();
    }
}

const sq_vector& player::b_part() const {
    if (!b_) throw index_out_of_range("player: holds no part of b");
    return *b_;
}

const sq_matrix& player::a_part() const {
    if (!a_) throw index_out_of_range("player: holds no rows of A");
    return *a_;
}

std::uint64_t player::local_row(const message& request) const {
    if (request.indices.empty()) throw invalid_argument("player: request carries no index");
    return request.indices.front().value;
}

message player::respond(const message& request) {
    message reply{request.kind, {}, {}};
    switch (request.kind) {
    case message_kind::sample_b:
        reply.indices = {{b_part().sample(rng_), m_}};
        return reply;
    case message_kind::sample_row_norm:
        reply.indices = {{a_part().sample_row(rng_), m_}};
        return reply;
    case message_kind::sample_row:
        reply.indices = {{a_part().sample_in_row(local_row(request), rng_), n_}};
        return reply;
    default:
        return answer(request);
    }
}

message player::answer(const message& request) const {
    message reply{request.kind, {}, {}};
    switch (request.kind) {
    case message_kind::setup_b:
        reply.scalars = {b_ ? b_->norm() : 0.0};
        reply.indices = {{b_len_, m_}};
        return reply;
    case message_kind::setup_a:
        reply.scalars = {a_frobenius_};
        reply.indices = {{a_rows_, m_}};
        return reply;
    case message_kind::query_b:
        reply.scalars = {b_part().query(local_row(request)).real()};
        return reply;
    case message_kind::query_entry: {
        const auto joint = local_row(request);
        const auto& a = a_part();
        reply.scalars = {a.query(joint / a_cols_, joint % a_cols_).real()};
        return reply;
    }
    case message_kind::query_row_norm:
        reply.scalars = {a_part().row(local_row(request)).norm()};
        return reply;
    default:
        throw invalid_argument("player: request '" + std::string(to_string(request.kind)) +
                               "' is randomized and has no deterministic answer");
    }
}

std::vector<double> player::response_law(const message& request) const {
    switch (request.kind) {
    case message_kind::sample_b: return b_part().exact_distribution();
    case message_kind::sample_row_norm: return a_part().row_norms().exact_distribution();
    case message_kind::sample_row: return a_part().row(local_row(request)).exact_distribution();
    default:
        throw invalid_argument("player: request '" + std::string(to_string(request.kind)) +
                               "' is not a sampling request");
    }
}

} // namespace sqcomm

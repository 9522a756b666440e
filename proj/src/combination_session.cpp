#include "sqcomm/combination_session.hpp"

#include <cmath>
#include <string>

#include "sqcomm/errors.hpp"

namespace sqcomm {

namespace {

struct shape {
    std::size_t m = 0;
    std::size_t n = 0;
    bool has_a = false;
    bool has_b = false;
};

shape check_parts(const std::vector<player_part>& parts) {
    if (parts.empty()) throw dimension_mismatch("combination_session: no players");
    shape s;
    s.has_b = parts.front().b.has_value();
    s.has_a = parts.front().a.has_value();
    for (const auto& p : parts) {
        if (p.b.has_value() != s.has_b || p.a.has_value() != s.has_a)
            throw dimension_mismatch("combination_session: every player must hold the same parts");
    }
    if (!s.has_a && !s.has_b) throw dimension_mismatch("combination_session: no data");
    if (s.has_b) s.m = static_cast<std::size_t>(parts.front().b->size());
    if (s.has_a) {
        if (s.has_b && static_cast<std::size_t>(parts.front().a->rows()) != s.m)
            throw dimension_mismatch("combination_session: A and b disagree on m");
        s.m = static_cast<std::size_t>(parts.front().a->rows());
        s.n = static_cast<std::size_t>(parts.front().a->cols());
    }
    for (const auto& p : parts) {
        if (s.has_b && static_cast<std::size_t>(p.b->size()) != s.m)
            throw dimension_mismatch("combination_session: b^(i) differ in length");
        if (s.has_a && (static_cast<std::size_t>(p.a->rows()) != s.m ||
                        static_cast<std::size_t>(p.a->cols()) != s.n))
            throw dimension_mismatch("combination_session: A^(i) differ in shape");
    }
    if (s.m == 0 || (s.has_a && s.n == 0)) throw dimension_mismatch("combination_session: empty parts");
    return s;
}

template <class Part>
std::vector<Part> collect(const std::vector<player_part>& parts, bool present,
                          std::optional<Part> player_part::*member) {
    std::vector<Part> out;
    if (!present) return out;
    for (const auto& p : parts) out.push_back(*(p.*member));
    return out;
}

shape shape_of(const std::vector<player_part>& parts) { return check_parts(parts); }

std::unique_ptr<channel> make_channel(const std::vector<player_part>& parts, std::uint64_t seed) {
    const shape s = check_parts(parts);
    return std::make_unique<live_channel>(parts, s.m, std::max<std::size_t>(s.n, 1), seed);
}

std::vector<double> weighted(const std::vector<double>& coeff, const std::vector<double>& norms) {
    std::vector<double> w(coeff.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = coeff[i] * coeff[i] * norms[i] * norms[i];
    return w;
}

double total(const std::vector<double>& w) {
    double t = 0.0;
    for (double x : w) t += x;
    return t;
}

oversampled_entry combine(const std::vector<double>& coeff, const std::vector<double>& entries) {
    double value = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < coeff.size(); ++i) {
        const double term = coeff[i] * entries[i];
        value += term;
        sq += term * term;
    }
    return {value, std::sqrt(static_cast<double>(coeff.size()) * sq)};
}

double acceptance(const oversampled_entry& e) {
    const double d = std::norm(e.dominator);
    return d == 0.0 ? 0.0 : std::min(1.0, std::norm(e.target) / d);
}

} // namespace

combination_session::combination_session(const std::vector<player_part>& parts, encoding_spec enc,
                                         std::uint64_t seed)
    : link_(make_channel(parts, seed), enc) {
    const shape s = shape_of(parts);
    m_ = s.m;
    n_ = s.n;
    has_a_ = s.has_a;
    has_b_ = s.has_b;
    truth_b_ = collect<rvector>(parts, has_b_, &player_part::b);
    truth_a_ = collect<rmatrix>(parts, has_a_, &player_part::a);
}

void combination_session::setup_b() {
    if (!has_b_) throw dimension_mismatch("combination_session: no b in this session");
    if (!b_norms_.empty()) throw already_setup("combination_session: b setup already done");
    std::vector<double> norms;
    for (std::size_t p = 1; p <= players(); ++p) {
        const auto reply = link_.exchange(static_cast<party_id>(p), {message_kind::setup_b, {}, {}},
                                          protocol_phase::setup);
        if (reply.indices.at(0).value != m_)
            throw dimension_mismatch("combination_session: player reported a different m");
        norms.push_back(reply.scalars.at(0));
    }
    b_norms_ = std::move(norms);
}

void combination_session::setup_a() {
    if (!has_a_) throw dimension_mismatch("combination_session: no A in this session");
    if (!a_frobenius_.empty()) throw already_setup("combination_session: A setup already done");
    std::vector<double> frob;
    for (std::size_t p = 1; p <= players(); ++p) {
        const auto reply = link_.exchange(static_cast<party_id>(p), {message_kind::setup_a, {}, {}},
                                          protocol_phase::setup);
        if (reply.indices.at(0).value != m_)
            throw dimension_mismatch("combination_session: player reported a different m");
        frob.push_back(reply.scalars.at(0));
    }
    a_frobenius_ = std::move(frob);
}

void combination_session::check_weights(const std::vector<double>& w) const {
    if (w.size() != players())
        throw dimension_mismatch("combination_session: expected " + std::to_string(players()) +
                                 " weights, got " + std::to_string(w.size()));
}

std::vector<double> combination_session::gather(message_kind kind, std::uint64_t index,
                                                 std::uint64_t range) {
    std::vector<double> out;
    out.reserve(players());
    for (std::size_t p = 1; p <= players(); ++p)
        out.push_back(link_.exchange(static_cast<party_id>(p), {kind, {{index, range}}, {}},
                                     protocol_phase::access)
                          .scalars.at(0));
    return out;
}

std::vector<double> combination_session::peek_all(message_kind kind, std::uint64_t index,
                                                  std::uint64_t range) const {
    std::vector<double> out;
    out.reserve(players());
    for (std::size_t p = 1; p <= players(); ++p)
        out.push_back(link_.peer().peek(static_cast<party_id>(p), {kind, {{index, range}}, {}}).scalars.at(0));
    return out;
}

const std::vector<double>& combination_session::row_norms(std::size_t i) {
    if (i >= m_) throw index_out_of_range("combination_session: row out of range");
    auto it = row_norm_cache_.find(i);
    if (it == row_norm_cache_.end())
        it = row_norm_cache_.emplace(i, gather(message_kind::query_row_norm, i, m_)).first;
    return it->second;
}

combination_session::vector_view combination_session::b_view(std::vector<double> mu) {
    return vector_view(*this, std::move(mu));
}

combination_session::matrix_view combination_session::a_view(std::vector<double> lambda) {
    return matrix_view(*this, std::move(lambda));
}

// ---------------------------------------------------------------------------
// vector_view

combination_session::vector_view::vector_view(combination_session& owner, std::vector<double> mu)
    : owner_(&owner), mu_(std::move(mu)) {
    owner_->check_weights(mu_);
    if (owner_->b_norms_.empty()) throw not_setup("combination_session: b setup has not run");
    const double target_sq = exact_target().squaredNorm();
    if (std::sqrt(target_sq) <= cancellation_tolerance)
        throw cancellation("combination_session: sum_i mu_i b^(i) cancels to zero");
    phi_ = exact_dominator().squaredNorm() / target_sq;
}

rvector combination_session::vector_view::exact_target() const {
    rvector b = rvector::Zero(static_cast<Eigen::Index>(owner_->m_));
    for (std::size_t i = 0; i < mu_.size(); ++i) b += mu_[i] * owner_->truth_b_[i];
    return b;
}

rvector combination_session::vector_view::exact_dominator() const {
    rvector sq = rvector::Zero(static_cast<Eigen::Index>(owner_->m_));
    for (std::size_t i = 0; i < mu_.size(); ++i)
        sq += (mu_[i] * owner_->truth_b_[i]).array().square().matrix();
    return (static_cast<double>(mu_.size()) * sq).array().sqrt().matrix();
}

oversampled_entry combination_session::vector_view::query(std::size_t j) {
    if (j >= owner_->m_) throw index_out_of_range("combination_session: b index out of range");
    return combine(mu_, owner_->gather(message_kind::query_b, j, owner_->m_));
}

std::size_t combination_session::vector_view::sample_dominator(rng_t& rng) {
    const auto w = weighted(mu_, owner_->b_norms_);
    const std::size_t i = sample_from_weights(w, rng);
    const auto reply = owner_->link_.exchange(static_cast<party_id>(i + 1),
                                              {message_kind::sample_b, {}, {}}, protocol_phase::access);
    return static_cast<std::size_t>(reply.indices.at(0).value);
}

double combination_session::vector_view::dominator_norm() {
    return std::sqrt(static_cast<double>(mu_.size()) * total(weighted(mu_, owner_->b_norms_)));
}

metered<double> combination_session::vector_view::query_value(std::size_t j) {
    const auto before = owner_->meter().total_bits();
    const auto e = query(j);
    return {e.target.real(), owner_->meter().total_bits() - before};
}

metered<std::size_t> combination_session::vector_view::dominator_sample(rng_t& rng) {
    const auto before = owner_->meter().total_bits();
    const auto j = sample_dominator(rng);
    return {j, owner_->meter().total_bits() - before};
}

metered<rejection_outcome> combination_session::vector_view::sample(double delta, rng_t& rng) {
    const auto before = owner_->meter().total_bits();
    const auto out = rejection_sample(*this, delta, rng);
    return {out, owner_->meter().total_bits() - before};
}

metered<norm_estimate> combination_session::vector_view::estimate_norm(double eps, double delta,
                                                                       rng_t& rng) {
    const auto before = owner_->meter().total_bits();
    const auto out = sqcomm::estimate_norm(*this, eps, delta, rng);
    return {out, owner_->meter().total_bits() - before};
}

std::vector<double> combination_session::vector_view::dominator_law() const {
    const auto w = weighted(mu_, owner_->b_norms_);
    const double t = total(w);
    std::vector<double> law(owner_->m_, 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 0.0) continue;
        const auto local = owner_->link_.peer().response_law(static_cast<party_id>(i + 1),
                                                             {message_kind::sample_b, {}, {}});
        for (std::size_t j = 0; j < local.size(); ++j) law[j] += (w[i] / t) * local[j];
    }
    return law;
}

rejection_law combination_session::vector_view::sample_law(std::size_t max_rounds) const {
    std::vector<double> accept(owner_->m_);
    for (std::size_t j = 0; j < accept.size(); ++j)
        accept[j] = acceptance(combine(mu_, owner_->peek_all(message_kind::query_b, j, owner_->m_)));
    return enumerate_rejection(dominator_law(), accept, max_rounds);
}

// ---------------------------------------------------------------------------
// matrix_view

combination_session::matrix_view::matrix_view(combination_session& owner, std::vector<double> lambda)
    : owner_(&owner), lambda_(std::move(lambda)) {
    owner_->check_weights(lambda_);
    if (owner_->a_frobenius_.empty()) throw not_setup("combination_session: A setup has not run");
    const double target_sq = exact_target().squaredNorm();
    if (std::sqrt(target_sq) <= cancellation_tolerance)
        throw cancellation("combination_session: sum_t lambda_t A^(t) cancels to zero");
    phi_ = exact_dominator().squaredNorm() / target_sq;
}

rmatrix combination_session::matrix_view::exact_target() const {
    rmatrix a = rmatrix::Zero(static_cast<Eigen::Index>(owner_->m_), static_cast<Eigen::Index>(owner_->n_));
    for (std::size_t t = 0; t < lambda_.size(); ++t) a += lambda_[t] * owner_->truth_a_[t];
    return a;
}

rmatrix combination_session::matrix_view::exact_dominator() const {
    rmatrix sq = rmatrix::Zero(static_cast<Eigen::Index>(owner_->m_), static_cast<Eigen::Index>(owner_->n_));
    for (std::size_t t = 0; t < lambda_.size(); ++t)
        sq += (lambda_[t] * owner_->truth_a_[t]).array().square().matrix();
    return (static_cast<double>(lambda_.size()) * sq).array().sqrt().matrix();
}

std::vector<double> combination_session::matrix_view::row_weights(const std::vector<double>& norms) const {
    return weighted(lambda_, norms);
}

metered<oversampled_entry> combination_session::matrix_view::entry(std::size_t i, std::size_t j) {
    if (i >= owner_->m_ || j >= owner_->n_)
        throw index_out_of_range("combination_session: entry out of range");
    const auto before = owner_->meter().total_bits();
    const std::uint64_t joint = static_cast<std::uint64_t>(i) * owner_->n_ + j;
    const std::uint64_t range = static_cast<std::uint64_t>(owner_->m_) * owner_->n_;
    const auto e = combine(lambda_, owner_->gather(message_kind::query_entry, joint, range));
    return {e, owner_->meter().total_bits() - before};
}

double combination_session::matrix_view::dominator_frobenius() const {
    return std::sqrt(static_cast<double>(lambda_.size()) * total(weighted(lambda_, owner_->a_frobenius_)));
}

metered<double> combination_session::matrix_view::dominator_row_norm(std::size_t i) {
    const auto before = owner_->meter().total_bits();
    const auto& norms = owner_->row_norms(i);
    const double value = std::sqrt(static_cast<double>(lambda_.size()) * total(row_weights(norms)));
    return {value, owner_->meter().total_bits() - before};
}

metered<std::size_t> combination_session::matrix_view::dominator_row_sample(std::size_t i, rng_t& rng) {
    const auto before = owner_->meter().total_bits();
    const auto w = row_weights(owner_->row_norms(i));
    const std::size_t s = sample_from_weights(w, rng);
    const auto reply = owner_->link_.exchange(static_cast<party_id>(s + 1),
                                              {message_kind::sample_row, {{i, owner_->m_}}, {}},
                                              protocol_phase::access);
    return {static_cast<std::size_t>(reply.indices.at(0).value), owner_->meter().total_bits() - before};
}

metered<std::size_t> combination_session::matrix_view::dominator_row_norm_sample(rng_t& rng) {
    const auto before = owner_->meter().total_bits();
    const std::size_t s = sample_from_weights(weighted(lambda_, owner_->a_frobenius_), rng);
    const auto reply = owner_->link_.exchange(static_cast<party_id>(s + 1),
                                              {message_kind::sample_row_norm, {}, {}}, protocol_phase::access);
    return {static_cast<std::size_t>(reply.indices.at(0).value), owner_->meter().total_bits() - before};
}

std::vector<double> combination_session::matrix_view::dominator_row_law(std::size_t i) const {
    if (i >= owner_->m_) throw index_out_of_range("combination_session: row out of range");
    const auto w = row_weights(owner_->peek_all(message_kind::query_row_norm, i, owner_->m_));
    const double t = total(w);
    if (t == 0.0) throw all_zero("combination_session: dominator row is zero");
    std::vector<double> law(owner_->n_, 0.0);
    for (std::size_t s = 0; s < w.size(); ++s) {
        if (w[s] == 0.0) continue;
        const auto local = owner_->link_.peer().response_law(
            static_cast<party_id>(s + 1), {message_kind::sample_row, {{i, owner_->m_}}, {}});
        for (std::size_t j = 0; j < local.size(); ++j) law[j] += (w[s] / t) * local[j];
    }
    return law;
}

std::vector<double> combination_session::matrix_view::dominator_row_norm_law() const {
    const auto w = weighted(lambda_, owner_->a_frobenius_);
    const double t = total(w);
    std::vector<double> law(owner_->m_, 0.0);
    for (std::size_t s = 0; s < w.size(); ++s) {
        if (w[s] == 0.0) continue;
        const auto local = owner_->link_.peer().response_law(static_cast<party_id>(s + 1),
                                                             {message_kind::sample_row_norm, {}, {}});
        for (std::size_t i = 0; i < local.size(); ++i) law[i] += (w[s] / t) * local[i];
    }
    return law;
}

combination_session::row_view combination_session::matrix_view::row(std::size_t i) {
    return row_view(*this, i);
}

// ---------------------------------------------------------------------------
// row_view

combination_session::row_view::row_view(matrix_view parent, std::size_t row)
    : parent_(std::move(parent)), owner_(parent_.owner_), row_(row) {
    if (row_ >= owner_->m_) throw index_out_of_range("combination_session: row out of range");
    const double target_sq = parent_.exact_target().row(static_cast<Eigen::Index>(row_)).squaredNorm();
    if (std::sqrt(target_sq) <= cancellation_tolerance)
        throw cancellation("combination_session: row " + std::to_string(row_) + " cancels to zero");
    phi_ = parent_.exact_dominator().row(static_cast<Eigen::Index>(row_)).squaredNorm() / target_sq;
}

oversampled_entry combination_session::row_view::query(std::size_t j) { return parent_.entry(row_, j).value; }

std::size_t combination_session::row_view::sample_dominator(rng_t& rng) {
    return parent_.dominator_row_sample(row_, rng).value;
}

double combination_session::row_view::dominator_norm() { return parent_.dominator_row_norm(row_).value; }

metered<rejection_outcome> combination_session::row_view::sample(double delta, rng_t& rng) {
    const auto before = owner_->meter().total_bits();
    const auto out = rejection_sample(*this, delta, rng);
    return {out, owner_->meter().total_bits() - before};
}

rejection_law combination_session::row_view::sample_law(std::size_t max_rounds) const {
    std::vector<double> accept(owner_->n_);
    const std::uint64_t range = static_cast<std::uint64_t>(owner_->m_) * owner_->n_;
    for (std::size_t j = 0; j < accept.size(); ++j) {
        const std::uint64_t joint = static_cast<std::uint64_t>(row_) * owner_->n_ + j;
        accept[j] = acceptance(combine(parent_.lambda_, owner_->peek_all(message_kind::query_entry, joint, range)));
    }
    return enumerate_rejection(parent_.dominator_row_law(row_), accept, max_rounds);
}

} // namespace sqcomm

#include "sqcomm/sq_access.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sqcomm/errors.hpp"

namespace sqcomm {

namespace {

std::vector<scalar> to_values(const cvector& v) { return {v.data(), v.data() + v.size()}; }

std::vector<scalar> to_values(const rvector& v) {
    std::vector<scalar> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v[i];
    return out;
}

// |ratio| capped at 1; dominated entries may exceed it by rounding only.
double acceptance_ratio(const oversampled_entry& e) {
    const double d = std::norm(e.dominator);
    if (d == 0.0) return 0.0;
    return std::min(1.0, std::norm(e.target) / d);
}

} // namespace

std::size_t sample_from_weights(std::span<const double> weights, rng_t& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw all_zero("sample_from_weights: every weight is zero");
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t s = 0; s < weights.size(); ++s) {
        if (weights[s] <= 0.0) continue;
        acc += weights[s];
        last = s;
        if (u < acc) return s;
    }
    return last;
}

sq_vector::sq_vector(std::vector<scalar> values, unchecked) : values_(std::move(values)) {
    if (values_.empty()) throw invalid_argument("sq_vector: empty vector");
    cumulative_.resize(values_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        acc += std::norm(values_[i]);
        cumulative_[i] = acc;
    }
    norm_sq_ = acc;
    norm_ = std::sqrt(acc);
}

sq_vector::sq_vector(std::vector<scalar> values) : sq_vector(std::move(values), unchecked{}) {
    if (is_zero()) throw all_zero("sq_vector: every entry is zero");
}

sq_vector::sq_vector(const cvector& values) : sq_vector(to_values(values)) {}
sq_vector::sq_vector(const rvector& values) : sq_vector(to_values(values)) {}

sq_vector sq_vector::allow_zero(std::vector<scalar> values) {
    return sq_vector(std::move(values), unchecked{});
}

scalar sq_vector::query(std::size_t i) const {
    if (i >= values_.size())
        throw index_out_of_range("sq_vector: index " + std::to_string(i) + " >= " +
                                 std::to_string(values_.size()));
    return values_[i];
}

double sq_vector::bucket_mass(std::size_t i) const {
    if (i >= values_.size()) throw index_out_of_range("sq_vector: bucket out of range");
    return std::norm(values_[i]);
}

std::size_t sq_vector::sample(rng_t& rng) const {
    if (is_zero()) throw all_zero("sq_vector: cannot sample the zero vector");
    const double u = uniform01(rng) * norm_sq_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) {
        // u rounded up to the total; fall back to the last bucket with mass.
        it = std::lower_bound(cumulative_.begin(), cumulative_.end(), norm_sq_);
    }
    return static_cast<std::size_t>(it - cumulative_.begin());
}

std::vector<double> sq_vector::exact_distribution() const {
    if (is_zero()) throw all_zero("sq_vector: distribution of the zero vector is undefined");
    std::vector<double> p(values_.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(values_[i]) / norm_sq_;
    return p;
}

namespace {

std::vector<sq_vector> build_rows(const cmatrix& m) {
    if (m.rows() == 0 || m.cols() == 0) throw invalid_argument("sq_matrix: empty matrix");
    std::vector<sq_vector> rows;
    rows.reserve(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<scalar> r(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
        rows.push_back(sq_vector::allow_zero(std::move(r)));
    }
    return rows;
}

sq_vector build_row_norms(const std::vector<sq_vector>& rows) {
    std::vector<scalar> a(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) a[i] = rows[i].norm();
    return sq_vector::allow_zero(std::move(a));
}

} // namespace

sq_matrix::sq_matrix(const cmatrix& m, unchecked)
    : rows_(build_rows(m)), row_norms_(build_row_norms(rows_)),
      cols_(static_cast<std::size_t>(m.cols())) {}

sq_matrix::sq_matrix(const cmatrix& m) : sq_matrix(m, unchecked{}) {
    if (row_norms_.is_zero()) throw all_zero("sq_matrix: every entry is zero");
}

sq_matrix sq_matrix::allow_zero(const rmatrix& m) { return sq_matrix(cmatrix(m.cast<scalar>()), unchecked{}); }

sq_matrix::sq_matrix(const rmatrix& m) : sq_matrix(cmatrix(m.cast<scalar>())) {}

const sq_vector& sq_matrix::row(std::size_t i) const {
    if (i >= rows_.size()) throw index_out_of_range("sq_matrix: row out of range");
    return rows_[i];
}

scalar sq_matrix::query(std::size_t i, std::size_t j) const { return row(i).query(j); }

oversample_access::oversample_access(std::vector<scalar> target, sq_vector dominator)
    : target_(std::move(target)), dominator_(std::move(dominator)) {
    if (target_.size() != dominator_.size())
        throw dimension_mismatch("oversample_access: target and dominator differ in length");
    double sq = 0.0;
    for (std::size_t j = 0; j < target_.size(); ++j) {
        const double t = std::norm(target_[j]);
        const double d = dominator_.bucket_mass(j);
        if (d < t * (1.0 - 1e-12))
            throw not_dominated("oversample_access: |v~_" + std::to_string(j) + "| < |v_" +
                                std::to_string(j) + "|");
        sq += t;
    }
    if (sq == 0.0) throw all_zero("oversample_access: zero target");
    target_norm_ = std::sqrt(sq);
    phi_ = dominator_.norm_squared() / sq;
}

oversampled_entry oversample_access::query(std::size_t j) {
    if (j >= target_.size()) throw index_out_of_range("oversample_access: index out of range");
    return {target_[j], dominator_.query(j)};
}

std::size_t rejection_round_cap(double phi, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw invalid_argument("rejection: delta must lie in (0, 1]");
    if (!(phi >= 1.0 - 1e-9)) throw invalid_argument("rejection: phi must be >= 1");
    return static_cast<std::size_t>(std::ceil(phi * std::log(1.0 / delta))) + 1;
}

rejection_outcome rejection_sample(oversampled_source& source, double delta, rng_t& rng) {
    const std::size_t cap = rejection_round_cap(source.phi(), delta);
    rejection_outcome out;
    for (std::size_t round = 1; round <= cap; ++round) {
        const std::size_t j = source.sample_dominator(rng);
        ++out.dominator_samples;
        const oversampled_entry e = source.query(j);
        ++out.target_queries;
        out.rounds = round;
        if (uniform01(rng) < acceptance_ratio(e)) {
            out.index = j;
            return out;
        }
    }
    throw timeout("rejection_sample: all " + std::to_string(cap) + " rounds rejected");
}

rejection_law enumerate_rejection(std::span<const double> dominator_law,
                                  std::span<const double> acceptance, std::size_t max_rounds) {
    if (dominator_law.size() != acceptance.size())
        throw dimension_mismatch("enumerate_rejection: length mismatch");
    const std::size_t n = dominator_law.size();

    // Mass of accepting index j within a single round.
    std::vector<double> per_round(n);
    double accept_once = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        per_round[j] = dominator_law[j] * acceptance[j];
        accept_once += per_round[j];
    }
    const double reject_once = 1.0 - accept_once;

    rejection_law law;
    law.accepted.assign(n, 0.0);
    double alive = 1.0; // probability that the first (round - 1) rounds all rejected
    for (std::size_t round = 1; round <= max_rounds; ++round) {
        law.expected_rounds += alive;
        for (std::size_t j = 0; j < n; ++j) law.accepted[j] += alive * per_round[j];
        alive *= reject_once;
    }
    law.timeout_probability = alive;
    law.acceptance_probability = 0.0;
    for (double p : law.accepted) law.acceptance_probability += p;
    if (law.acceptance_probability > 0.0)
        for (double& p : law.accepted) p /= law.acceptance_probability;
    return law;
}

rejection_law enumerate_rejection(const oversample_access& access, std::size_t max_rounds) {
    const auto dominator_law = access.dominator().exact_distribution();
    std::vector<double> acceptance(access.dimension());
    for (std::size_t j = 0; j < acceptance.size(); ++j)
        acceptance[j] = acceptance_ratio({access.target()[j], access.dominator().query(j)});
    return enumerate_rejection(dominator_law, acceptance, max_rounds);
}

std::size_t norm_estimate_samples(double phi, double eps, double delta) {
    if (!(eps > 0.0 && eps <= 1.0)) throw invalid_argument("estimate_norm: eps must lie in (0, 1]");
    if (!(delta > 0.0 && delta <= 1.0)) throw invalid_argument("estimate_norm: delta must lie in (0, 1]");
    return static_cast<std::size_t>(std::ceil(3.0 * phi * std::log(2.0 / delta) / (eps * eps)));
}

norm_estimate estimate_norm(oversampled_source& source, double eps, double delta, rng_t& rng) {
    return estimate_norm_with(source, norm_estimate_samples(source.phi(), eps, delta), rng);
}

norm_estimate estimate_norm_with(oversampled_source& source, std::size_t samples, rng_t& rng) {
    if (samples == 0) throw invalid_argument("estimate_norm: need at least one sample");
    double sum = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t j = source.sample_dominator(rng);
        sum += acceptance_ratio(source.query(j));
    }
    return {source.dominator_norm() * std::sqrt(sum / static_cast<double>(samples)), samples};
}

} // namespace sqcomm

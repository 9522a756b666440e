#include "sqcomm/constructions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sqcomm/errors.hpp"
#include "sqcomm/linalg_oracle.hpp"
#include "sqcomm/sq_access.hpp"

namespace sqcomm {

namespace {

rvector unit_indicator(const bit_string& s) {
    rvector t(static_cast<Eigen::Index>(s.size()));
    for (std::size_t l = 0; l < s.size(); ++l) t[static_cast<Eigen::Index>(l)] = s[l];
    const double norm = t.norm();
    if (norm == 0.0) throw zero_vector("indicator of an empty set");
    return t / norm;
}

rvector signs(std::span<const int> f) {
    rvector d(static_cast<Eigen::Index>(f.size()));
    for (std::size_t x = 0; x < f.size(); ++x) d[static_cast<Eigen::Index>(x)] = f[x];
    return d;
}

std::vector<double> l2_law(const cvector& v) {
    std::vector<scalar> values(v.data(), v.data() + v.size());
    return sq_vector(std::move(values)).exact_distribution();
}

} // namespace

// ---------------------------------------------------------------------------
// Row-sparse regression

sparse_regression build_regression_sparse(const disjointness_instance& inst, double beta_a, double beta_b) {
    if (!(beta_a > 0.0 && beta_b > 0.0)) throw invalid_argument("build_regression_sparse: betas must be positive");
    verify(inst);
    const auto k = static_cast<Eigen::Index>(inst.k);
    const auto n = static_cast<Eigen::Index>(inst.n);

    std::vector<rvector> t;
    for (const auto& s : inst.sets) t.push_back(unit_indicator(s));

    sparse_regression r;
    r.a = rmatrix::Zero(k * n, k);
    r.b = rvector::Zero(k * n);
    r.a(0, 0) = beta_a;
    r.b[0] = beta_b;
    for (Eigen::Index j = 1; j < k; ++j) {
        r.a.block(j * n, j, n, 1) = t[static_cast<std::size_t>(j)];
        r.b.segment(j * n, n) = static_cast<double>(n) * t[0];
    }

    r.layout.players = inst.k;
    r.layout.a.push_back({public_owner, r.a.topRows(n)});
    for (Eigen::Index j = 1; j < k; ++j)
        r.layout.a.push_back({static_cast<party_id>(j + 1), r.a.middleRows(j * n, n)});
    r.layout.b.push_back({public_owner, r.b.head(n)});
    r.layout.b.push_back({1, r.b.tail((k - 1) * n)});

    r.closed_form_x = rvector::Zero(k);
    r.closed_form_x[0] = beta_b / beta_a;
    for (Eigen::Index j = 1; j < k; ++j)
        r.closed_form_x[j] = static_cast<double>(n) * t[0].dot(t[static_cast<std::size_t>(j)]);
    return r;
}

disjointness_decision decide_disjointness(session& s, const rvector& solution, std::size_t num_samples,
                                          rng_t& rng) {
    const auto before = s.meter().total_bits();
    if (!s.a_ready()) s.setup_a();
    if (!s.b_ready()) s.setup_b();

    // Stand-in for the algorithm's output SQ(x*): the exact solution.
    const sq_vector x(solution);
    disjointness_decision out;
    for (std::size_t i = 0; i < num_samples; ++i) {
        const std::size_t j = x.sample(rng);
        out.draws.push_back(j);
        out.intersect = out.intersect || j != 0;
    }
    out.bits = s.meter().total_bits() - before;
    return out;
}

// ---------------------------------------------------------------------------
// Dense regression

dense_regression build_regression_dense(const function_pair& pair) {
    verify(pair);
    if (pair.n == 0 || pair.n > 10) throw bad_dimension("build_regression_dense: need 1 <= n <= 10");
    dense_regression r;
    r.n = pair.n;
    r.a = signs(pair.f).asDiagonal() * hadamard_matrix(pair.n);
    r.b = signs(pair.g) / std::sqrt(static_cast<double>(pair.g.size()));
    r.layout.players = 2;
    r.layout.a.push_back({1, r.a});
    r.layout.b.push_back({2, r.b});
    r.target = dsp_distribution(pair.f, pair.g);
    return r;
}

std::vector<double> solution_law(const dense_regression& r) {
    return l2_law(pinv_solve(r.a, r.b).cast<scalar>());
}

// ---------------------------------------------------------------------------
// Supervised clustering

clustering_construction build_clustering(const gap_hamming_instance& inst, std::optional<double> alpha) {
    verify(inst);
    const double d = static_cast<double>(inst.d);
    const double k = static_cast<double>(inst.k);
    clustering_construction c;
    c.alpha = alpha.value_or(std::pow(d, -0.25));
    if (!(c.alpha > 0.0)) throw invalid_argument("build_clustering: alpha must be positive");

    const auto dim = static_cast<Eigen::Index>(inst.d);
    const auto rows = static_cast<Eigen::Index>(inst.k + 1);
    c.a.resize(rows, dim);
    c.b.resize(rows);
    c.p = c.alpha * signs(inst.strings[inst.k]);
    c.q = rvector::Zero(dim);

    const double p_norm = c.p.norm();
    if (p_norm == 0.0) throw zero_vector("build_clustering: p is zero");
    c.a.row(0) = -c.p.transpose() / p_norm;
    c.b[0] = p_norm;
    c.layout.players = inst.k + 1;
    c.layout.a.push_back({static_cast<party_id>(inst.k + 1), c.a.topRows(1)});
    c.layout.b.push_back({static_cast<party_id>(inst.k + 1), c.b.head(1)});

    for (std::size_t i = 0; i < inst.k; ++i) {
        const rvector qi = c.alpha * signs(inst.strings[i]);
        const double qi_norm = qi.norm();
        if (qi_norm == 0.0) throw zero_vector("build_clustering: q_" + std::to_string(i) + " is zero");
        const auto row = static_cast<Eigen::Index>(i + 1);
        c.a.row(row) = qi.transpose() / (qi_norm * std::sqrt(k));
        c.b[row] = qi_norm / std::sqrt(k);
        c.q += qi / k;
        c.layout.a.push_back({static_cast<party_id>(i + 1), c.a.middleRows(row, 1)});
        c.layout.b.push_back({static_cast<party_id>(i + 1), c.b.segment(row, 1)});
    }

    c.distance_sq = (c.p - c.q).squaredNorm();
    c.bta_norm_sq = (c.b.transpose() * c.a).squaredNorm();
    c.threshold = c.alpha * c.alpha * d * (1.0 + 1.0 / (k * k));
    c.epsilon = c.alpha * c.alpha * std::sqrt(d) / k;
    return c;
}

gap_sign decide_clustering(const clustering_construction& c, double estimate) {
    return estimate < c.threshold ? gap_sign::positive : gap_sign::negative;
}

bool clustering_separates(const clustering_construction& c, gap_sign truth) {
    return decide_clustering(c, c.distance_sq - c.epsilon) == truth &&
           decide_clustering(c, c.distance_sq + c.epsilon) == truth;
}

// ---------------------------------------------------------------------------
// PCA and recommendation systems

pca_construction build_pca(const bit_string& a_bits, const bit_string& b_bits) {
    if (a_bits.size() != b_bits.size() || a_bits.empty())
        throw dimension_mismatch("build_pca: bit strings must share a positive length");
    const auto n = static_cast<Eigen::Index>(a_bits.size());
    pca_construction c;
    c.a_bits = a_bits;
    c.b_bits = b_bits;
    c.a = rmatrix::Zero(2 * n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (a_bits[u] > 1 || b_bits[u] > 1) throw invalid_argument("build_pca: entries must be 0 or 1");
        c.a(i, i) = a_bits[u];
        c.a(n + i, i) = b_bits[u];
        if (a_bits[u] == 1 && b_bits[u] == 1) {
            if (c.intersection) throw promise_violation("build_pca: more than one intersection");
            c.intersection = u;
        }
    }
    if (c.a.cwiseAbs().maxCoeff() == 0.0) throw zero_matrix("build_pca: both strings are zero");
    c.layout.players = 2;
    c.layout.a.push_back({1, c.a.topRows(n)});
    c.layout.a.push_back({2, c.a.bottomRows(n)});
    return c;
}

pca_decision decide_pca(const pca_construction& c, rng_t& rng) {
    const top_singular_result top = top_singular(c.a);
    pca_decision out;
    out.sigma = top.sigma;
    out.degenerate = top.degenerate;
    out.intersect_by_sigma = top.sigma >= std::numbers::sqrt2 - pca_sigma_margin;

    out.sampled = sq_vector(top.v).sample(rng);
    const bool a = c.a_bits[out.sampled] == 1, b = c.b_bits[out.sampled] == 1;
    out.intersect_by_sample = a && b;
    out.sample_consistent = c.intersection ? out.sampled == *c.intersection : a != b;
    return out;
}

recsys_construction build_recsys(const bit_string& a_bits, const bit_string& b_bits, double delta) {
    if (!(delta > 1.0 && delta < std::numbers::sqrt2))
        throw invalid_argument("build_recsys: delta must lie in (1, sqrt 2)");
    recsys_construction r;
    r.base = build_pca(a_bits, b_bits);
    r.delta = delta;
    r.thresholded = threshold_svd(r.base.a, delta);
    const svd_factors f = svd(r.base.a);
    r.rank = static_cast<std::size_t>((f.sigma.array() >= delta).count());
    return r;
}

recsys_decision decide_recsys(const recsys_construction& r, rng_t& rng) {
    recsys_decision out;
    try {
        const sq_matrix m(r.thresholded);
        out.row = m.sample_row(rng);
        out.column = m.sample_in_row(*out.row, rng);
        out.intersect = true;
    } catch (const all_zero&) {
        out.intersect = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hamiltonian simulation

rmatrix hamiltonian_matrix(std::span<const int> f) {
    const std::size_t n = log2_exact(f.size());
    if (n == 0) throw bad_dimension("hamiltonian_matrix: need at least one qubit");
    const std::size_t size = f.size();
    const double r = 1.0 / std::numbers::sqrt2;

    // sum_j (I - H) on qubit j: diagonal 1 -+ 1/sqrt2 by bit value, -1/sqrt2
    // between strings differing in one bit.
    rmatrix m = rmatrix::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
    for (std::size_t x = 0; x < size; ++x) {
        const auto ix = static_cast<Eigen::Index>(x);
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t bit = std::size_t{1} << j;
            m(ix, ix) += (x & bit) ? 1.0 + r : 1.0 - r;
            m(ix, static_cast<Eigen::Index>(x ^ bit)) -= r;
        }
    }
    const rvector d = signs(f);
    return d.asDiagonal() * (m / (2.0 * static_cast<double>(n))) * d.asDiagonal();
}

rmatrix conjugated_hadamard(std::span<const int> f) {
    const rvector d = signs(f);
    return d.asDiagonal() * hadamard_matrix(log2_exact(f.size())) * d.asDiagonal();
}

hamiltonian_construction build_hamiltonian(const function_pair& pair) {
    verify(pair);
    if (pair.n == 0 || pair.n > 8) throw bad_dimension("build_hamiltonian: need 1 <= n <= 8");
    hamiltonian_construction h;
    h.n = pair.n;
    h.f = pair.f;
    h.g = pair.g;
    h.a = hamiltonian_matrix(pair.f);
    h.t = static_cast<double>(pair.n) * std::numbers::pi;
    // H^{(x)n}|0...0> is the uniform vector.
    h.v = signs(pair.g) / std::sqrt(static_cast<double>(pair.g.size()));
    h.layout.players = 2;
    h.layout.a.push_back({1, h.a});
    h.layout.b.push_back({2, h.v});
    return h;
}

double identity_error(const hamiltonian_construction& h) {
    const cmatrix u = expm(h.a.cast<scalar>(), h.t);
    return (u - conjugated_hadamard(h.f).cast<scalar>()).norm();
}

std::vector<double> evolved_law(const hamiltonian_construction& h) {
    return l2_law(expm_apply(h.a.cast<scalar>(), h.t, h.v.cast<scalar>()));
}

double hamiltonian_frobenius_sq(std::size_t n) {
    return std::ldexp(static_cast<double>(n + 1) / static_cast<double>(n), static_cast<int>(n) - 2);
}

} // namespace sqcomm

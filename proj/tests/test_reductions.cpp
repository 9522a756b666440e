#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "sqcomm/constructions.hpp"
#include "sqcomm/errors.hpp"
#include "sqcomm/instances.hpp"
#include "sqcomm/linalg_oracle.hpp"
#include "sqcomm/stats.hpp"

using namespace sqcomm;

namespace {

std::size_t weight(const bit_string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), 1)); }

bit_string bits(std::initializer_list<int> v) { return {v.begin(), v.end()}; }

// Instance with the given strings; truth found by scanning.
disjointness_instance make_instance(std::vector<bit_string> sets) {
    disjointness_instance inst;
    inst.k = sets.size();
    inst.n = sets.front().size();
    inst.sets = std::move(sets);
    for (std::size_t j = 1; j < inst.k; ++j)
        for (std::size_t l = 0; l < inst.n; ++l)
            if (inst.sets[0][l] && inst.sets[j][l]) inst.truth = intersection{j, l};
    return inst;
}

std::vector<double> l2_law(const rvector& v) {
    std::vector<double> p(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) p[static_cast<std::size_t>(i)] = v[i] * v[i] / v.squaredNorm();
    return p;
}

} // namespace

// ---------------------------------------------------------------------------
// Set-Disjointness instances

TEST_CASE("gen_disjointness respects the promise") {
    rng_t rng(1);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t k = 2 + uniform_below(rng, 7);
        const std::size_t n = 8 + uniform_below(rng, 120);
        const bool want = t % 2 == 0;
        const auto inst = gen_disjointness(k, n, want, rng);
        CHECK(inst.sets.size() == k);
        const auto found = find_intersections(inst);
        CHECK(found.size() == (want ? 1u : 0u));
        CHECK(inst.truth.has_value() == want);
        if (want) CHECK(found.front() == *inst.truth);
        for (const auto& s : inst.sets) {
            CHECK(s.size() == n);
            CHECK(4 * weight(s) >= n);
            CHECK(4 * weight(s) <= 3 * n);
        }
    }
}

TEST_CASE("planted intersections cover every player") {
    rng_t rng(2);
    std::vector<int> hits(5, 0);
    for (int t = 0; t < 2000; ++t) ++hits[gen_disjointness(5, 16, true, rng).truth->player];
    CHECK(hits[0] == 0);
    for (std::size_t j = 1; j < 5; ++j) CHECK(hits[j] == doctest::Approx(500).epsilon(0.15));
}

TEST_CASE("disjointness argument and promise errors") {
    rng_t rng(3);
    CHECK_THROWS_AS(gen_disjointness(1, 16, false, rng), invalid_argument);
    CHECK_THROWS_AS(gen_disjointness(3, 7, false, rng), invalid_argument);
    auto inst = make_instance({bits({1, 1, 0, 0, 1, 0, 0, 0}), bits({1, 1, 0, 0, 0, 0, 1, 0})});
    CHECK_THROWS_AS(verify(inst), promise_violation); // two intersections
    inst = make_instance({bits({1, 0, 0, 0, 0, 0, 0, 0}), bits({0, 1, 1, 0, 0, 0, 0, 0})});
    CHECK_THROWS_AS(verify(inst), promise_violation); // weight 1 < n/4
    inst = make_instance({bits({1, 1, 0, 0, 0, 0, 0, 0}), bits({0, 1, 1, 0, 0, 0, 0, 0})});
    CHECK_NOTHROW(verify(inst));
    inst.truth.reset();
    CHECK_THROWS_AS(verify(inst), promise_violation); // truth disagrees with the strings
}

// ---------------------------------------------------------------------------
// Sparse regression

TEST_CASE("sparse regression: k = 3, n = 4 example gives x* = (1, 2, 0)") {
    const auto inst = make_instance({bits({1, 1, 0, 0}), bits({0, 1, 0, 1}), bits({0, 0, 1, 0})});
    const auto r = build_regression_sparse(inst);
    CHECK(r.a.rows() == 12);
    CHECK(r.a.cols() == 3);
    const rvector x = pinv_solve(r.a, r.b);
    CHECK(std::abs(x[0] - 1.0) <= 1e-12);
    CHECK(std::abs(x[1] - 2.0) <= 1e-12);
    CHECK(std::abs(x[2]) <= 1e-12);
    CHECK((r.closed_form_x - x).cwiseAbs().maxCoeff() <= 1e-12);
    for (Eigen::Index i = 0; i < r.a.rows(); ++i) CHECK((r.a.row(i).array() != 0.0).count() <= 1);
}

TEST_CASE("sparse regression: no intersection gives (beta_b / beta_a) e_0") {
    rng_t rng(4);
    const auto inst = gen_disjointness(6, 32, false, rng);
    const auto r = build_regression_sparse(inst, 2.0, 3.0);
    const rvector x = pinv_solve(r.a, r.b);
    CHECK(x[0] == doctest::Approx(1.5));
    CHECK(x.tail(5).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(sq_vector(x).exact_distribution()[0] == doctest::Approx(1.0));
}

TEST_CASE("sparse regression: half-weight intersection samples player j with probability 4/5") {
    const auto inst = make_instance({bits({1, 1, 1, 1, 0, 0, 0, 0}), bits({0, 0, 0, 1, 1, 1, 1, 0})});
    const auto r = build_regression_sparse(inst);
    const rvector x = pinv_solve(r.a, r.b);
    // x_1 = n / (alpha_0 alpha_1) with alpha^2 = n / 2.
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sq_vector(x).exact_distribution()[1] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("sparse regression: closed form matches pinv_solve on 100 instances") {
    rng_t rng(5);
    for (int t = 0; t < 100; ++t) {
        const auto inst = gen_disjointness(2 + uniform_below(rng, 7), 8 + uniform_below(rng, 60), t % 2 == 0, rng);
        const double beta_a = 0.5 + uniform01(rng), beta_b = 0.5 + uniform01(rng);
        const auto r = build_regression_sparse(inst, beta_a, beta_b);
        CHECK((pinv_solve(r.a, r.b) - r.closed_form_x).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("sparse regression: kappa = 1 and kappa_F^2 = k at beta_A = 1") {
    rng_t rng(6);
    for (std::size_t k : {2, 5, 8}) {
        const auto r = build_regression_sparse(gen_disjointness(k, 64, true, rng));
        const auto p = params(r.a, r.b);
        CHECK(p.kappa == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(p.kappa_f * p.kappa_f == doctest::Approx(static_cast<double>(k)).epsilon(1e-12));
        CHECK(p.sparsity == 1);
    }
}

TEST_CASE("sparse regression: ownership layout") {
    rng_t rng(7);
    const auto inst = gen_disjointness(4, 16, false, rng);
    const auto r = build_regression_sparse(inst);
    REQUIRE(r.layout.a.size() == 4);
    CHECK(r.layout.a[0].owner == public_owner);
    for (int j = 1; j < 4; ++j) CHECK(r.layout.a[static_cast<std::size_t>(j)].owner == j + 1);
    REQUIRE(r.layout.b.size() == 2);
    CHECK(r.layout.b[0].owner == public_owner);
    CHECK(r.layout.b[0].data.size() == 16);
    CHECK(r.layout.b[1].owner == 1);
    CHECK(r.layout.b[1].data.size() == 48);
    CHECK_THROWS_AS(build_regression_sparse(inst, 0.0, 1.0), invalid_argument);
}

TEST_CASE("decide_disjointness") {
    rng_t rng(8);
    SUBCASE("no-instances are always disjoint") {
        for (int t = 0; t < 50; ++t) {
            const auto r = build_regression_sparse(gen_disjointness(5, 32, false, rng));
            session s(r.layout);
            const auto d = decide_disjointness(s, pinv_solve(r.a, r.b), 10, rng);
            CHECK(!d.intersect);
            CHECK(d.draws.size() == 10);
            CHECK(d.bits == s.meter().total_bits());
        }
    }
    SUBCASE("yes-instance with x_j = 2 and 5 samples errs with probability (1/5)^5") {
        const auto inst = make_instance({bits({1, 1, 1, 1, 0, 0, 0, 0}), bits({0, 0, 0, 1, 1, 1, 1, 0})});
        const auto r = build_regression_sparse(inst);
        const rvector x = pinv_solve(r.a, r.b);
        CHECK(std::pow(sq_vector(x).exact_distribution()[0], 5) == doctest::Approx(0.00032).epsilon(1e-10));
        int errors = 0;
        for (int t = 0; t < 5000; ++t) {
            session s(r.layout);
            errors += decide_disjointness(s, x, 5, rng).intersect ? 0 : 1;
        }
        CHECK(errors <= 8); // mean 1.6
    }
    SUBCASE("k = 8, n = 64, 10 samples: at least 99% accuracy") {
        int correct = 0;
        for (int t = 0; t < 200; ++t) {
            const auto inst = gen_disjointness(8, 64, t % 2 == 0, rng);
            const auto r = build_regression_sparse(inst);
            session s(r.layout);
            correct += decide_disjointness(s, pinv_solve(r.a, r.b), 10, rng).intersect == inst.truth.has_value();
        }
        CHECK(correct >= 198);
    }
}

// ---------------------------------------------------------------------------
// Dense regression

TEST_CASE("dense regression") {
    SUBCASE("f = g = ones: point mass at index 0") {
        const function_pair pair{3, sign_vector(8, 1), sign_vector(8, 1)};
        const auto law = solution_law(build_regression_dense(pair));
        CHECK(law[0] == doctest::Approx(1.0));
    }
    SUBCASE("n = 1, f = (1,-1), g = (1,1): law (0, 1)") {
        const function_pair pair{1, {1, -1}, {1, 1}};
        const auto law = solution_law(build_regression_dense(pair));
        CHECK(std::abs(law[0]) <= 1e-15);
        CHECK(law[1] == doctest::Approx(1.0));
    }
    SUBCASE("law equals dsp_distribution, A = D_f H, kappa_F^2 = 2^n") {
        rng_t rng(9);
        for (std::size_t n = 1; n <= 8; ++n) {
            const auto pair = gen_function_pair(n, rng);
            const auto r = build_regression_dense(pair);
            CHECK(max_abs_deviation(solution_law(r), dsp_distribution(pair.f, pair.g)) <= 1e-9);
            rmatrix expected = hadamard_matrix(n);
            for (std::size_t i = 0; i < pair.f.size(); ++i) expected.row(static_cast<Eigen::Index>(i)) *= pair.f[i];
            CHECK((r.a - expected).cwiseAbs().maxCoeff() <= 1e-14);
            CHECK(r.b.norm() == doctest::Approx(1.0));
            const auto p = params(r.a, r.b);
            CHECK(p.kappa_f * p.kappa_f == doctest::Approx(std::ldexp(1.0, static_cast<int>(n))));
            CHECK(r.layout.a.front().owner == 1);
            CHECK(r.layout.b.front().owner == 2);
        }
    }
    SUBCASE("size limit") {
        rng_t rng(1);
        CHECK_THROWS_AS(build_regression_dense(gen_function_pair(11, rng)), bad_dimension);
    }
}

// ---------------------------------------------------------------------------
// Gap-Hamming and clustering

TEST_CASE("gen_gap_hamming") {
    rng_t rng(10);
    SUBCASE("k = 1, d = 16, positive: x.y >= 4") {
        for (int t = 0; t < 100; ++t) {
            const auto inst = gen_gap_hamming(1, 16, gap_sign::positive, rng);
            CHECK(inst.inner_product() >= 4);
            CHECK(inst.inner_product() <= 8);
        }
    }
    SUBCASE("1000 draws satisfy the promise and the split") {
        for (int t = 0; t < 1000; ++t) {
            const std::size_t k = 1 + 2 * uniform_below(rng, 4);
            const std::size_t d = 1 + uniform_below(rng, 300);
            const auto sign = t % 2 ? gap_sign::positive : gap_sign::negative;
            const auto inst = gen_gap_hamming(k, d, sign, rng);
            CHECK_NOTHROW(verify(inst));
            const auto total = inst.combined();
            for (std::size_t c = 0; c < d; ++c) {
                int s = 0;
                for (std::size_t i = 0; i < k; ++i) s += inst.strings[i][c];
                CHECK(s == total[c]);
                CHECK(std::abs(s) == 1);
            }
            const double ip = static_cast<double>(inst.inner_product());
            const double root = std::sqrt(static_cast<double>(d));
            CHECK(std::abs(ip) >= root - 1e-12);
            CHECK(std::abs(ip) <= 2.0 * root + 1e-12);
            CHECK((ip > 0) == (sign == gap_sign::positive));
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(gen_gap_hamming(2, 16, gap_sign::positive, rng), invalid_argument);
        CHECK_THROWS_AS(gen_gap_hamming(3, 16, gap_sign::positive, rng, 2.0, 1.0), invalid_argument);
        // d = 4: inner products are even, the band [2.2, 2.4] holds none.
        CHECK_THROWS_AS(gen_gap_hamming(1, 4, gap_sign::positive, rng, 1.1, 1.2), infeasible_promise);
    }
}

TEST_CASE("clustering construction") {
    rng_t rng(11);
    for (int t = 0; t < 300; ++t) {
        const std::size_t k = 1 + 2 * uniform_below(rng, 3);
        const std::size_t d = t % 2 ? 64 : 256;
        const auto sign = t % 3 ? gap_sign::positive : gap_sign::negative;
        const auto inst = gen_gap_hamming(k, d, sign, rng);
        const auto c = build_clustering(inst);
        const double kd = static_cast<double>(k), dd = static_cast<double>(d);
        CHECK(c.alpha * c.alpha * std::sqrt(dd) == doctest::Approx(1.0));
        CHECK(std::abs(c.a.squaredNorm() - 2.0) <= 1e-12);
        CHECK(c.b.squaredNorm() == doctest::Approx(2.0 * c.alpha * c.alpha * dd).epsilon(1e-12));
        // ||p - q||^2 with p = alpha x and q = alpha T / k, expanded by hand.
        const double dist = c.alpha * c.alpha *
                            (dd + dd / (kd * kd) - 2.0 * static_cast<double>(inst.inner_product()) / kd);
        CHECK(std::abs(c.distance_sq - dist) <= 1e-10);
        CHECK(std::abs(c.bta_norm_sq - dist) <= 1e-10);
        CHECK(clustering_separates(c, sign));
        CHECK(decide_clustering(c, c.distance_sq) == sign);
        CHECK(c.layout.players == k + 1);
    }
}

TEST_CASE("clustering: x equal to every y gives zero distance") {
    gap_hamming_instance inst;
    inst.k = 1;
    inst.d = 16;
    sign_vector x(16, 1);
    x[3] = -1;
    inst.strings = {x, x};
    inst.sign = gap_sign::positive;
    const auto c = build_clustering(inst);
    CHECK(c.distance_sq <= 1e-15);
    CHECK(c.bta_norm_sq <= 1e-15);
}

// ---------------------------------------------------------------------------
// PCA and recommendation systems

TEST_CASE("PCA construction") {
    rng_t rng(12);
    SUBCASE("intersection: sigma = sqrt 2, v = e_i") {
        const auto c = build_pca(bits({1, 0, 1, 0}), bits({0, 1, 1, 0}));
        CHECK(c.intersection == std::optional<std::size_t>(2));
        CHECK((c.a.transpose() * c.a).isApprox(rmatrix(rvector(Eigen::Vector4d(1, 1, 2, 0)).asDiagonal())));
        const auto d = decide_pca(c, rng);
        CHECK(d.sigma == doctest::Approx(std::numbers::sqrt2).epsilon(1e-12));
        CHECK(d.intersect_by_sigma);
        CHECK(d.sampled == 2);
        CHECK(d.intersect_by_sample);
        CHECK(d.sample_consistent);
    }
    SUBCASE("no intersection: sigma = 1 and samples land on the symmetric difference") {
        for (int t = 0; t < 50; ++t) {
            const auto inst = gen_disjointness(2, 32, false, rng);
            const auto c = build_pca(inst.sets[0], inst.sets[1]);
            const auto d = decide_pca(c, rng);
            CHECK(d.sigma == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(d.degenerate);
            CHECK(!d.intersect_by_sigma);
            CHECK((inst.sets[0][d.sampled] ^ inst.sets[1][d.sampled]) == 1);
            CHECK(d.sample_consistent);
            CHECK(c.a.squaredNorm() == static_cast<double>(weight(inst.sets[0]) + weight(inst.sets[1])));
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(build_pca(bits({0, 0}), bits({0, 0})), zero_matrix);
        CHECK_THROWS_AS(build_pca(bits({1, 0}), bits({1})), dimension_mismatch);
        CHECK_THROWS_AS(build_pca(bits({1, 1}), bits({1, 1})), promise_violation);
    }
}

TEST_CASE("recommendation construction") {
    rng_t rng(13);
    int correct = 0;
    for (int t = 0; t < 200; ++t) {
        const auto inst = gen_disjointness(2, 64, t % 2 == 0, rng);
        const auto r = build_recsys(inst.sets[0], inst.sets[1]);
        const auto d = decide_recsys(r, rng);
        if (inst.truth) {
            const auto i = static_cast<Eigen::Index>(inst.truth->coordinate);
            // A_{>=delta} = e_i e_i^T + e_{n+i} e_i^T.
            rmatrix expected = rmatrix::Zero(128, 64);
            expected(i, i) = 1.0;
            expected(64 + i, i) = 1.0;
            CHECK((r.thresholded - expected).cwiseAbs().maxCoeff() <= 1e-12);
            CHECK(r.rank == 1);
            CHECK(d.column == std::optional<std::size_t>(inst.truth->coordinate));
        } else {
            CHECK(r.thresholded.norm() <= 1e-12);
            CHECK(r.rank == 0);
            CHECK(!d.row);
        }
        correct += d.intersect == inst.truth.has_value();
    }
    CHECK(correct == 200);
    CHECK_THROWS_AS(build_recsys(bits({1, 0}), bits({0, 1}), 1.0), invalid_argument);
    CHECK_THROWS_AS(build_recsys(bits({1, 0}), bits({0, 1}), 1.5), invalid_argument);
}

// ---------------------------------------------------------------------------
// Hamiltonian simulation

TEST_CASE("Hamiltonian: n = 1, f = (1,1) evolves to H at t = pi") {
    const sign_vector f{1, 1};
    const cmatrix u = expm(hamiltonian_matrix(f).cast<scalar>(), std::numbers::pi);
    CHECK((u - hadamard_matrix(1).cast<scalar>()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Hamiltonian: spectrum, Frobenius norm and evolved law") {
    rng_t rng(14);
    for (std::size_t n = 1; n <= 8; ++n) {
        const auto pair = gen_function_pair(n, rng);
        const auto h = build_hamiltonian(pair);
        CHECK(h.t == doctest::Approx(static_cast<double>(n) * std::numbers::pi));
        CHECK(identity_error(h) <= 1e-8);

        const Eigen::SelfAdjointEigenSolver<rmatrix> eig(h.a);
        CHECK(std::abs(eig.eigenvalues().cwiseAbs().maxCoeff() - 1.0) <= 1e-9);

        // Eigenvalues of (1/2n) sum_j (I - H)_j are c/n with multiplicity C(n, c).
        double frob = 0.0, binom = 1.0;
        for (std::size_t c = 0; c <= n; ++c) {
            frob += binom * std::pow(static_cast<double>(c) / static_cast<double>(n), 2);
            binom = binom * static_cast<double>(n - c) / static_cast<double>(c + 1);
        }
        CHECK(std::abs(h.a.squaredNorm() - frob) <= 1e-9);
        CHECK(hamiltonian_frobenius_sq(n) == doctest::Approx(frob).epsilon(1e-14));

        // v = D_g H |0...0> = g / sqrt(2^n).
        for (std::size_t x = 0; x < pair.g.size(); ++x)
            CHECK(h.v[static_cast<Eigen::Index>(x)] ==
                  doctest::Approx(pair.g[x] / std::sqrt(static_cast<double>(pair.g.size()))));
        CHECK(max_abs_deviation(evolved_law(h), dsp_distribution(pair.f, pair.g)) <= 1e-9);
        CHECK((conjugated_hadamard(pair.f) * h.v).squaredNorm() == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(build_hamiltonian(function_pair{0, {1}, {1}}), bad_dimension);
    CHECK_THROWS_AS(build_hamiltonian(gen_function_pair(9, rng)), bad_dimension);
}

// ---------------------------------------------------------------------------
// Serialization

TEST_CASE("bit strings encode as base64 of MSB-first bytes") {
    CHECK(encode_bits(bits({1, 0, 1, 0, 0, 0, 0, 0})) == "oA==");
    CHECK(encode_bits(bits({1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 1})) == "/wE=");
    CHECK(encode_bits(bits({1})) == "gA==");
    CHECK(decode_bits("oA==", 8) == bits({1, 0, 1, 0, 0, 0, 0, 0}));
    rng_t rng(15);
    for (std::size_t n : {1, 7, 8, 9, 23, 64, 1000}) {
        bit_string b(n);
        for (auto& x : b) x = static_cast<std::uint8_t>(uniform_below(rng, 2));
        CHECK(decode_bits(encode_bits(b), n) == b);
    }
}

TEST_CASE("instances round-trip through JSON") {
    rng_t rng(16);
    const auto dj = gen_disjointness(4, 40, true, rng);
    const auto dj2 = disjointness_from_json(to_json(dj));
    CHECK(dj2.sets == dj.sets);
    CHECK(dj2.truth == dj.truth);

    const auto gh = gen_gap_hamming(3, 49, gap_sign::negative, rng);
    const auto text = to_json(gh);
    const auto parsed = nlohmann::json::parse(text);
    CHECK(parsed["strings"][0][0].is_number_integer());
    const auto gh2 = gap_hamming_from_json(text);
    CHECK(gh2.strings == gh.strings);
    CHECK(gh2.sign == gh.sign);

    const auto fp = gen_function_pair(5, rng);
    const auto fp2 = function_pair_from_json(to_json(fp));
    CHECK(fp2.f == fp.f);
    CHECK(fp2.g == fp.g);
}

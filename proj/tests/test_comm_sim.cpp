#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "sqcomm/combination_session.hpp"
#include "sqcomm/errors.hpp"
#include "sqcomm/session.hpp"
#include "sqcomm/stats.hpp"

using namespace sqcomm;

namespace {

rvector vec(std::initializer_list<double> v) {
    rvector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

// Reference laws straight from the stacked data.
std::vector<double> l2_law(const rvector& v) {
    std::vector<double> p(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) p[static_cast<std::size_t>(i)] = v[i] * v[i] / v.squaredNorm();
    return p;
}

rmatrix random_matrix(Eigen::Index m, Eigen::Index n, rng_t& rng) {
    rmatrix a(m, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = uniform01(rng) < 0.3 ? 0.0 : uniform01(rng) - 0.5;
    return a;
}

unsigned idx(std::uint64_t r) { return encoding_spec::index_bits(r); }

} // namespace

TEST_CASE("index widths") {
    CHECK(idx(0) == 0);
    CHECK(idx(1) == 0);
    CHECK(idx(2) == 1);
    CHECK(idx(4) == 2);
    CHECK(idx(5) == 3);
    CHECK(idx(512 * 512) == 18);
    encoding_spec bad;
    bad.scalar_bits = 7;
    CHECK_THROWS_AS(bad.validate(), invalid_argument);
}

TEST_CASE("opening sessions") {
    SUBCASE("one player holds everything") {
        auto s = session::open({{rmatrix(rmatrix::Identity(3, 3)), vec({1, 2, 3})}});
        CHECK(s.players() == 1);
        CHECK(s.rows() == 3);
        CHECK(s.meter().total_bits() == 0);
    }
    SUBCASE("equal split of a length-4 vector") {
        auto s = session::open({{std::nullopt, vec({1, 2})}, {std::nullopt, vec({3, 4})}});
        CHECK(s.players() == 2);
        CHECK(s.rows() == 4);
    }
    SUBCASE("row counts of A and b disagree") {
        CHECK_THROWS_AS(session::open({{rmatrix(rmatrix::Identity(3, 3)), vec({1, 2, 3, 4})}}), dimension_mismatch);
    }
    SUBCASE("column counts disagree") {
        CHECK_THROWS_AS(session::open({{rmatrix(rmatrix::Ones(2, 3)), std::nullopt},
                                       {rmatrix(rmatrix::Ones(2, 2)), std::nullopt}}),
                        dimension_mismatch);
    }
    SUBCASE("owner outside 1..k and duplicate ownership") {
        session_layout l;
        l.players = 2;
        l.b = {{3, vec({1})}};
        CHECK_THROWS_AS(session{l}, dimension_mismatch);
        l.b = {{1, vec({1})}, {1, vec({2})}};
        CHECK_THROWS_AS(session{l}, dimension_mismatch);
    }
}

TEST_CASE("b setup: D_b and its cost") {
    auto s = session::open({{std::nullopt, vec({3, 0})}, {std::nullopt, vec({0, 4})}});
    CHECK_THROWS_AS(s.query_b(0), not_setup);
    s.setup_b();
    const auto law = s.segment_law_b();
    CHECK(law[0] == doctest::Approx(9.0 / 25.0).epsilon(1e-15));
    CHECK(law[1] == doctest::Approx(16.0 / 25.0).epsilon(1e-15));
    CHECK(s.norm_b() == doctest::Approx(5.0));
    // k (opcode + scalar + ceil(log2 m)) with k = 2, m = 4.
    CHECK(s.meter().total_bits() == 2 * (8 + 32 + 2));
    CHECK(s.meter_report().setup_bits == s.meter().total_bits());
    CHECK_THROWS_AS(s.setup_b(), already_setup);
}

TEST_CASE("b setup with an empty part") {
    auto s = session::open({{std::nullopt, vec({1, 2})}, {std::nullopt, rvector(0)}});
    s.setup_b();
    CHECK(s.segment_law_b() == std::vector<double>{1.0, 0.0});
    rng_t rng(1);
    for (int i = 0; i < 20; ++i) CHECK(s.sample_b(rng).value < 2);
}

TEST_CASE("b sampling composes the two stages exactly") {
    auto s = session::open({{std::nullopt, vec({3, 0})}, {std::nullopt, vec({0, 4})}});
    s.setup_b();
    const auto law = s.protocol_distribution({law_kind::b_sample});
    CHECK(max_abs_deviation(law, std::vector<double>{9.0 / 25, 0, 0, 16.0 / 25}) <= 1e-15);

    rng_t rng(4);
    const auto before = s.meter().total_bits();
    const auto draw = s.sample_b(rng);
    CHECK((draw.value == 0 || draw.value == 3));
    CHECK(draw.bits == 8 + 2);
    CHECK(s.meter().total_bits() - before == 10);
}

TEST_CASE("all mass at player 2: every sample goes to player 2") {
    auto s = session::open({{std::nullopt, vec({0, 0})}, {std::nullopt, vec({1, 2})}});
    s.setup_b();
    rng_t rng(2);
    for (int i = 0; i < 50; ++i) s.sample_b(rng);
    for (const auto& r : s.exchange_log())
        if (r.request.kind == message_kind::sample_b) CHECK(r.player == 2);
}

TEST_CASE("b queries route to the owner, cost independent of k") {
    auto s = session::open({{std::nullopt, vec({1, 2, 3})}, {std::nullopt, vec({4, 5})}});
    s.setup_b();
    CHECK(s.query_b(2).value == 3.0);
    const auto boundary = s.query_b(3);
    CHECK(boundary.value == 4.0);
    CHECK(s.exchange_log().back().player == 2);
    CHECK(boundary.bits == 8 + 3 + 32);
    CHECK_THROWS_AS(s.query_b(5), index_out_of_range);

    std::vector<player_part> five;
    for (int i = 0; i < 5; ++i) five.push_back({std::nullopt, vec({1.0 + i})});
    auto wide = session::open(five);
    wide.setup_b();
    CHECK(wide.query_b(4).bits == boundary.bits);
}

TEST_CASE("A access with a single owner is one round trip each") {
    rmatrix a(2, 3);
    a << 1, 0, 2, 0, 3, 0;
    auto s = session::open({{a, std::nullopt}});
    s.setup_a();
    CHECK(s.meter().total_bits() == 8 + 32 + 1);
    rng_t rng(9);
    const std::vector<a_request> reqs = {request::row_norm_sample{}, request::row_sample{0}, request::entry_query{1, 1},
                                         request::row_norm_query{0}};
    for (const auto& r : reqs) {
        const auto before = s.meter().transcript().size();
        s.access_a(r, rng);
        CHECK(s.meter().transcript().size() == before + 2); // request and response
    }
    CHECK(std::get<double>(s.access_a(request::entry_query{1, 1}, rng).value) == 3.0);
    CHECK(std::get<double>(s.access_a(request::row_norm_query{0}, rng).value) == doctest::Approx(std::sqrt(5.0)));
    const auto frob = s.access_a(request::frobenius_query{}, rng);
    CHECK(frob.bits == 0);
    CHECK(std::get<double>(frob.value) == doctest::Approx(std::sqrt(14.0)));
}

TEST_CASE("A = I2 split by rows: uniform row-norm sampling") {
    auto s = session::open({{rmatrix(rmatrix::Identity(1, 2)), std::nullopt},
                            {rmatrix(rmatrix{{0.0, 1.0}}), std::nullopt}});
    s.setup_a();
    const auto law = s.protocol_distribution({law_kind::a_row_norm_sample});
    CHECK(law == std::vector<double>{0.5, 0.5});
    CHECK(s.protocol_distribution({law_kind::a_row_sample, 1}) == std::vector<double>{0.0, 1.0});
}

TEST_CASE("per-access costs follow the encoding") {
    rng_t data(3);
    const rmatrix a = random_matrix(6, 5, data);
    auto s = session::open({{a.topRows(2), a.col(0).head(2)}, {a.bottomRows(4), a.col(0).tail(4)}});
    s.setup_a();
    s.setup_b();
    const std::uint64_t m = 6, n = 5;
    const auto setup = s.meter().total_bits();
    CHECK(setup == 2 * 2 * (8 + 32 + idx(m)));
    rng_t rng(1);
    CHECK(s.access_a(request::entry_query{4, 2}, rng).bits == 8 + idx(m * n) + 32);
    CHECK(s.access_a(request::row_norm_query{4}, rng).bits == 8 + idx(m) + 32);
    CHECK(s.access_a(request::row_norm_sample{}, rng).bits == 8 + idx(m));
    std::size_t row = 0;
    while (a.row(static_cast<Eigen::Index>(row)).squaredNorm() == 0.0) ++row;
    CHECK(s.access_a(request::row_sample{row}, rng).bits == 8 + idx(m) + idx(n));
    CHECK(s.sample_b(rng).bits == 8 + idx(m));
}

TEST_CASE("T accesses stay under T (opcode + index(mn) + scalar) + setup") {
    rng_t data(5);
    const rmatrix a = random_matrix(40, 30, data) + rmatrix::Identity(40, 30);
    auto s = session::open({{a.topRows(10), std::nullopt}, {a.middleRows(10, 25), std::nullopt},
                            {a.bottomRows(5), std::nullopt}});
    s.setup_a();
    const auto setup = s.meter().total_bits();
    rng_t rng(6);
    const std::uint64_t per = 8 + idx(40 * 30) + 32;
    for (std::size_t t = 1; t <= 300; ++t) {
        switch (t % 5) {
        case 0: s.access_a(request::row_norm_sample{}, rng); break;
        case 1: s.access_a(request::row_sample{t % 40}, rng); break;
        case 2: s.access_a(request::entry_query{t % 40, t % 30}, rng); break;
        case 3: s.access_a(request::row_norm_query{t % 40}, rng); break;
        default: s.access_a(request::frobenius_query{}, rng); break;
        }
        CHECK(s.meter().total_bits() <= t * per + setup);
    }
}

TEST_CASE("protocol laws equal centralized laws on random partitions") {
    rng_t rng(77);
    for (int t = 0; t < 30; ++t) {
        const auto k = 1 + uniform_below(rng, 5);
        std::vector<player_part> parts;
        std::vector<rmatrix> blocks;
        rmatrix stacked(0, 6);
        rvector b(0);
        for (std::size_t i = 0; i < k; ++i) {
            const auto rows = static_cast<Eigen::Index>(uniform_below(rng, 5));
            rmatrix blk = random_matrix(rows, 6, rng);
            rvector bb = random_matrix(rows, 1, rng).col(0);
            rmatrix grown(stacked.rows() + rows, 6);
            grown << stacked, blk;
            stacked = grown;
            rvector bgrown(b.size() + rows);
            bgrown << b, bb;
            b = bgrown;
            parts.push_back({blk, bb});
        }
        if (stacked.squaredNorm() == 0.0 || b.squaredNorm() == 0.0) continue;
        auto s = session::open(parts);
        s.setup_a();
        s.setup_b();
        CHECK(max_abs_deviation(s.protocol_distribution({law_kind::b_sample}), l2_law(b)) <= 1e-12);
        rvector row_norms = stacked.rowwise().norm();
        CHECK(max_abs_deviation(s.protocol_distribution({law_kind::a_row_norm_sample}), l2_law(row_norms)) <=
              1e-12);
        for (Eigen::Index i = 0; i < stacked.rows(); ++i) {
            if (stacked.row(i).squaredNorm() == 0.0) continue;
            CHECK(max_abs_deviation(s.protocol_distribution({law_kind::a_row_sample, static_cast<std::size_t>(i)}),
                                    l2_law(stacked.row(i).transpose())) <= 1e-12);
        }
    }
}

TEST_CASE("protocol sampling matches its enumerated law empirically") {
    auto s = session::open({{std::nullopt, vec({1, 2})}, {std::nullopt, vec({0, 3, 1})}});
    s.setup_b();
    rng_t rng(12);
    std::vector<std::uint64_t> counts(5, 0);
    for (int i = 0; i < 100000; ++i) ++counts[s.sample_b(rng).value];
    CHECK(chi_square(counts, s.protocol_distribution({law_kind::b_sample})).pass);
}

TEST_CASE("public blocks are free and still exact") {
    session_layout l;
    l.players = 1;
    l.b = {{public_owner, vec({3})}, {1, vec({4})}};
    l.a = {{public_owner, rmatrix{{1.0, 1.0}}}, {1, rmatrix{{0.0, 2.0}}}};
    session s(l);
    s.setup_b();
    s.setup_a();
    CHECK(s.meter().total_bits() == 2 * (8 + 32 + 1)); // only player 1 reports
    CHECK(s.query_b(0).bits == 0);
    CHECK(s.query_b(1).bits == 8 + 1 + 32);
    CHECK(max_abs_deviation(s.protocol_distribution({law_kind::b_sample}), std::vector<double>{0.36, 0.64}) <= 1e-15);
    CHECK(max_abs_deviation(s.protocol_distribution({law_kind::a_row_norm_sample}),
                            std::vector<double>{2.0 / 6.0, 4.0 / 6.0}) <= 1e-15);
    rng_t rng(1);
    CHECK(s.access_a(request::entry_query{0, 1}, rng).bits == 0);
}

TEST_CASE("meter report") {
    auto s = session::open({{std::nullopt, vec({1, 2, 3, 4, 5})}, {std::nullopt, vec({6, 7, 8})}});
    CHECK(s.meter_report().total_bits == 0);
    s.setup_b();
    const std::uint64_t setup = 2 * (8 + 32 + 3);
    CHECK(s.meter_report().total_bits == setup);
    rng_t rng(3);
    for (int i = 0; i < 100; ++i) s.sample_b(rng);
    const auto r = s.meter_report();
    CHECK(r.total_bits == setup + 100 * (8 + 3));
    CHECK(r.setup_bits == setup);
    CHECK(r.access_bits == 100 * (8 + 3));
    CHECK(r.by_kind.at("sample_b").bits == 100 * (8 + 3));
    CHECK(r.rounds == 102);

    std::uint64_t sum = 0;
    for (const auto& e : s.meter().transcript()) sum += e.bits;
    CHECK(sum == r.total_bits);

    std::ostringstream lines;
    s.meter().write_jsonl(lines);
    std::istringstream in(lines.str());
    std::string line;
    std::size_t count = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        for (const char* key : {"round", "from", "to", "kind", "bits"}) CHECK(j.contains(key));
        ++count;
    }
    CHECK(count == s.meter().transcript().size());
}

TEST_CASE("replaying the transcript reproduces every coordinator decision") {
    rng_t data(21);
    const rmatrix a = random_matrix(12, 7, data) + rmatrix::Identity(12, 7);
    const rvector b = random_matrix(12, 1, data).col(0) + rvector::Ones(12);
    auto s = session::open({{a.topRows(5), b.head(5)}, {a.bottomRows(7), b.tail(7)}}, {}, 99);
    s.setup_a();
    s.setup_b();

    const auto script = [](session& x, rng_t& rng) {
        std::vector<double> out;
        for (int t = 0; t < 60; ++t) {
            out.push_back(static_cast<double>(x.sample_b(rng).value));
            out.push_back(x.query_b(static_cast<std::size_t>(t) % 12).value);
            const auto row = std::get<std::size_t>(x.access_a(request::row_norm_sample{}, rng).value);
            out.push_back(static_cast<double>(std::get<std::size_t>(x.access_a(request::row_sample{row}, rng).value)));
            out.push_back(std::get<double>(x.access_a(request::entry_query{row, 3}, rng).value));
        }
        return out;
    };
    rng_t c1(5);
    const auto live = script(s, c1);

    session again = s.replay();
    again.setup_a();
    again.setup_b();
    rng_t c2(5);
    CHECK(script(again, c2) == live);
    CHECK(again.meter().total_bits() == s.meter().total_bits());

    // The replayed coordinator has no private data to fall back on.
    CHECK_THROWS_AS(again.query_b(0), replay_divergence);
}

TEST_CASE("combination of b: phi and dominator") {
    SUBCASE("k = 2, mu = (1,1), b1 = e0, b2 = e1 gives phi 2") {
        combination_session cs({{std::nullopt, vec({1, 0})}, {std::nullopt, vec({0, 1})}});
        cs.setup_b();
        auto view = cs.b_view({1, 1});
        CHECK(view.phi() == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(view.dominator_norm() == doctest::Approx(2.0)); // sqrt(2 * (1 + 1))
        const auto e = view.query(0);
        CHECK(e.target.real() == 1.0);
        CHECK(e.dominator.real() == doctest::Approx(std::sqrt(2.0)));
    }
    SUBCASE("k = 1 reduces to plain SQ(b)") {
        combination_session cs({{std::nullopt, vec({3, 4})}});
        cs.setup_b();
        auto view = cs.b_view({-2.5});
        CHECK(view.phi() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(max_abs_deviation(view.dominator_law(), std::vector<double>{0.36, 0.64}) <= 1e-15);
    }
    SUBCASE("total cancellation") {
        combination_session cs({{std::nullopt, vec({1, 2})}, {std::nullopt, vec({-1, -2})}});
        cs.setup_b();
        CHECK_THROWS_AS(cs.b_view({1, 1}), cancellation);
    }
    SUBCASE("argument errors") {
        CHECK_THROWS_AS(combination_session({{std::nullopt, vec({1, 2})}, {std::nullopt, vec({1})}}),
                        dimension_mismatch);
        combination_session cs({{std::nullopt, vec({1, 2})}, {std::nullopt, vec({1, 0})}});
        CHECK_THROWS_AS(cs.b_view({1, 1}), not_setup);
        cs.setup_b();
        CHECK_THROWS_AS(cs.b_view({1}), dimension_mismatch);
        CHECK_THROWS_AS(cs.setup_b(), already_setup);
    }
}

TEST_CASE("combination of b: random weights satisfy the dominator identities") {
    rng_t rng(8);
    for (int t = 0; t < 200; ++t) {
        const auto k = 1 + uniform_below(rng, 6);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(uniform_below(rng, 10));
        std::vector<player_part> parts;
        std::vector<double> mu;
        rvector target = rvector::Zero(m), dom_sq = rvector::Zero(m);
        for (std::size_t i = 0; i < k; ++i) {
            rvector bi = random_matrix(m, 1, rng).col(0);
            mu.push_back(4.0 * uniform01(rng) - 2.0);
            target += mu.back() * bi;
            dom_sq += static_cast<double>(k) * (mu.back() * bi).cwiseAbs2();
            parts.push_back({std::nullopt, bi});
        }
        if (target.norm() <= cancellation_tolerance) continue;
        combination_session cs(parts);
        cs.setup_b();
        auto view = cs.b_view(mu);
        const double phi = dom_sq.sum() / target.squaredNorm();
        CHECK(view.phi() == doctest::Approx(phi).epsilon(1e-12));
        const double dn = view.dominator_norm();
        CHECK(std::abs(dn * dn - phi * target.squaredNorm()) <= 1e-9 * phi * target.squaredNorm());

        const auto law = view.sample_law(60);
        CHECK(max_abs_deviation(law.accepted, l2_law(target)) <= 1e-12);
        std::vector<double> dom_law(static_cast<std::size_t>(m));
        for (Eigen::Index j = 0; j < m; ++j) dom_law[static_cast<std::size_t>(j)] = dom_sq[j] / dom_sq.sum();
        CHECK(max_abs_deviation(view.dominator_law(), dom_law) <= 1e-12);
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto e = view.query(static_cast<std::size_t>(j));
            CHECK(std::abs(e.target) <= std::abs(e.dominator) + 1e-9);
            CHECK(e.target.real() == doctest::Approx(target[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("combination queries fan out to every player") {
    std::vector<player_part> parts;
    for (int i = 0; i < 4; ++i) parts.push_back({std::nullopt, vec({1.0 + i, 0.0, 2.0, 1.0, 0.5})});
    combination_session cs(parts);
    cs.setup_b();
    const auto setup = cs.meter().total_bits();
    CHECK(setup == 4 * (8 + 32 + 3));
    auto view = cs.b_view({1, 0, 0, -1});
    const auto q = view.query_value(2);
    CHECK(q.bits == 4 * (8 + 3 + 32));
    CHECK(q.value == doctest::Approx(0.0).epsilon(1e-15).scale(1.0));
    rng_t rng(1);
    const auto s = view.dominator_sample(rng);
    CHECK(s.bits == 8 + 3);
    const auto r = view.sample(1e-6, rng);
    CHECK(r.bits == r.value.rounds * ((8 + 3) + 4 * (8 + 3 + 32)));
}

TEST_CASE("combination sampling: Monte Carlo rounds match phi") {
    combination_session cs({{std::nullopt, vec({1, 0, 2})}, {std::nullopt, vec({0, 1, 1})}});
    cs.setup_b();
    auto view = cs.b_view({1, 1});
    rng_t rng(13);
    double rounds = 0.0;
    std::vector<std::uint64_t> counts(3, 0);
    for (int i = 0; i < 40000; ++i) {
        const auto out = view.sample(1e-9, rng).value;
        rounds += static_cast<double>(out.rounds);
        ++counts[out.index];
    }
    CHECK(rounds / 40000.0 == doctest::Approx(view.phi()).epsilon(0.03));
    CHECK(chi_square(counts, l2_law(vec({1, 1, 3}))).pass);
    const auto est = view.estimate_norm(0.05, 0.01, rng).value;
    CHECK(est.value == doctest::Approx(std::sqrt(11.0)).epsilon(0.05));
}

TEST_CASE("combination of A") {
    SUBCASE("diag(1,0) + diag(0,1): phi_A = 2") {
        combination_session cs({{rmatrix{{1.0, 0.0}, {0.0, 0.0}}, std::nullopt},
                                {rmatrix{{0.0, 0.0}, {0.0, 1.0}}, std::nullopt}});
        cs.setup_a();
        auto view = cs.a_view({1, 1});
        CHECK(view.phi() == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(view.dominator_frobenius() == doctest::Approx(2.0));
        CHECK(view.exact_target().isApprox(rmatrix::Identity(2, 2)));
        const auto e = view.entry(1, 1);
        CHECK(e.value.target.real() == 1.0);
        CHECK(e.value.dominator.real() == doctest::Approx(std::sqrt(2.0)));
    }
    SUBCASE("k = 1 gives phi 1") {
        combination_session cs({{rmatrix{{1.0, 2.0}, {3.0, 4.0}}, std::nullopt}});
        cs.setup_a();
        CHECK(cs.a_view({0.5}).phi() == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("cancellation") {
        combination_session cs({{rmatrix{{1.0, 2.0}}, std::nullopt}, {rmatrix{{2.0, 4.0}}, std::nullopt}});
        cs.setup_a();
        CHECK_THROWS_AS(cs.a_view({2, -1}), cancellation);
    }
    SUBCASE("row laws match the displayed dominator probabilities") {
        rng_t rng(3);
        std::vector<player_part> parts;
        std::vector<rmatrix> mats;
        const std::vector<double> lambda = {0.7, -1.3, 2.0};
        for (int t = 0; t < 3; ++t) {
            mats.push_back(random_matrix(4, 5, rng));
            parts.push_back({mats.back(), std::nullopt});
        }
        combination_session cs(parts);
        cs.setup_a();
        auto view = cs.a_view(lambda);
        rmatrix dom_sq = rmatrix::Zero(4, 5), target = rmatrix::Zero(4, 5);
        for (int t = 0; t < 3; ++t) {
            dom_sq += 3.0 * (lambda[t] * mats[t]).cwiseAbs2();
            target += lambda[t] * mats[t];
        }
        CHECK(view.exact_dominator().cwiseAbs2().isApprox(dom_sq, 1e-12));
        CHECK(view.phi() == doctest::Approx(dom_sq.sum() / target.squaredNorm()).epsilon(1e-12));
        // ||A~||_F^2 = k sum_t ||lambda_t A^(t)||_F^2.
        CHECK(std::pow(view.dominator_frobenius(), 2) == doctest::Approx(dom_sq.sum()).epsilon(1e-12));
        for (Eigen::Index i = 0; i < 4; ++i) {
            if (dom_sq.row(i).sum() == 0.0) continue;
            std::vector<double> expected(5);
            for (Eigen::Index j = 0; j < 5; ++j) expected[static_cast<std::size_t>(j)] = dom_sq(i, j) / dom_sq.row(i).sum();
            CHECK(max_abs_deviation(view.dominator_row_law(static_cast<std::size_t>(i)), expected) <= 1e-12);
            CHECK(view.dominator_row_norm(static_cast<std::size_t>(i)).value ==
                  doctest::Approx(std::sqrt(dom_sq.row(i).sum())).epsilon(1e-12));
            if (target.row(i).norm() > cancellation_tolerance) {
                auto row = view.row(static_cast<std::size_t>(i));
                CHECK(max_abs_deviation(row.sample_law(200).accepted, l2_law(target.row(i).transpose())) <= 1e-12);
            }
        }
        std::vector<double> row_law(4);
        for (Eigen::Index i = 0; i < 4; ++i) row_law[static_cast<std::size_t>(i)] = dom_sq.row(i).sum() / dom_sq.sum();
        CHECK(max_abs_deviation(view.dominator_row_norm_law(), row_law) <= 1e-12);
    }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqcomm/errors.hpp"
#include "sqcomm/experiment.hpp"
#include "sqcomm/stats.hpp"
#include "sqcomm/types.hpp"

using namespace sqcomm;

namespace {

std::string config_field(const std::string& text) {
    try {
        parse_config(text);
    } catch (const config_error& e) {
        return e.field();
    }
    return "<accepted>";
}

// Exact multinomial draw by binomial chaining.
std::vector<std::uint64_t> multinomial(std::uint64_t n, const std::vector<double>& p, rng_t& rng) {
    std::vector<std::uint64_t> out(p.size(), 0);
    double rest = 1.0;
    for (std::size_t i = 0; i + 1 < p.size() && n > 0; ++i) {
        const double q = std::clamp(p[i] / rest, 0.0, 1.0);
        out[i] = std::binomial_distribution<std::uint64_t>(n, q)(rng);
        n -= out[i];
        rest -= p[i];
    }
    out.back() += n;
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Statistics

TEST_CASE("tv_distance") {
    const std::vector<double> a{0.5, 0.5}, b{0.4, 0.6}, c{1.0, 0.0}, d{0.0, 1.0};
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(tv_distance(c, d) == doctest::Approx(1.0));
    CHECK(tv_distance(a, b) == doctest::Approx(0.1));
    CHECK(max_abs_deviation(a, b) == doctest::Approx(0.1));
    const std::vector<double> short_law{1.0}, bad{0.5, 0.6};
    CHECK_THROWS_AS(tv_distance(a, short_law), dimension_mismatch);
    CHECK_THROWS_AS(tv_distance(a, bad), invalid_argument);
    CHECK_THROWS_AS(max_abs_deviation(a, short_law), dimension_mismatch);
}

TEST_CASE("empirical_law") {
    const std::vector<std::uint64_t> counts{1, 3, 0};
    const auto law = empirical_law(counts);
    CHECK(law == std::vector<double>{0.25, 0.75, 0.0});
}

TEST_CASE("chi_square critical values at significance 0.001") {
    const std::vector<std::uint64_t> two{50, 50};
    const std::vector<double> half{0.5, 0.5};
    const auto r1 = chi_square(two, half);
    CHECK(r1.degrees_of_freedom == 1);
    CHECK(r1.critical_value == doctest::Approx(10.828).epsilon(1e-4));
    CHECK(r1.statistic == 0.0);

    std::vector<std::uint64_t> eleven(11, 100);
    std::vector<double> uniform(11, 1.0 / 11.0);
    const auto r10 = chi_square(eleven, uniform);
    CHECK(r10.degrees_of_freedom == 10);
    CHECK(r10.critical_value == doctest::Approx(29.588).epsilon(1e-4));
}

TEST_CASE("chi_square edge cases") {
    const std::vector<std::uint64_t> one{100};
    const std::vector<double> point{1.0};
    CHECK(chi_square(one, point).pass);

    const std::vector<std::uint64_t> few{2, 2};
    const std::vector<double> half{0.5, 0.5};
    CHECK_THROWS_AS(chi_square(few, half), too_few_samples);

    const std::vector<std::uint64_t> forbidden{999, 1};
    const std::vector<double> certain{1.0, 0.0};
    CHECK(!chi_square(forbidden, certain).pass);

    const std::vector<double> three{0.2, 0.3, 0.5};
    CHECK_THROWS_AS(chi_square(one, three), dimension_mismatch);
}

TEST_CASE("chi_square pools small buckets") {
    // Expected counts 1000 * (0.995, 0.001 x 5): five tiny buckets pool into one of 5.
    std::vector<double> p{0.995, 0.001, 0.001, 0.001, 0.001, 0.001};
    std::vector<std::uint64_t> counts{995, 1, 1, 1, 1, 1};
    const auto r = chi_square(counts, p);
    CHECK(r.retained_buckets == 2);
    CHECK(r.degrees_of_freedom == 1);
    CHECK(r.pass);
}

TEST_CASE("chi_square calibration: false rejections near the significance level") {
    rng_t rng(21);
    const std::vector<double> p{0.1, 0.2, 0.3, 0.15, 0.25};
    int rejected = 0;
    for (int t = 0; t < 10000; ++t) rejected += chi_square(multinomial(10000, p, rng), p).pass ? 0 : 1;
    CHECK(rejected <= 20); // mean 10 at 0.001
}

TEST_CASE("chi_square detects a law shifted by TV 0.1") {
    rng_t rng(22);
    const std::vector<double> p{0.25, 0.25, 0.25, 0.25}, q{0.35, 0.15, 0.25, 0.25};
    for (int t = 0; t < 100; ++t) CHECK(!chi_square(multinomial(10000, q, rng), p).pass);
}

TEST_CASE("linear_fit") {
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    const auto f = linear_fit(x, y);
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.r_squared == doctest::Approx(1.0));

    const std::vector<double> noisy{3, 6, 6, 9};
    const auto g = linear_fit(x, noisy);
    CHECK(g.slope == doctest::Approx(1.8));
    CHECK(g.intercept == doctest::Approx(1.5));
    CHECK(g.r_squared < 1.0);

    const std::vector<double> same{2, 2}, two{1, 2};
    CHECK_THROWS(linear_fit(same, two));
}

// ---------------------------------------------------------------------------
// Configuration

TEST_CASE("config parsing reports the offending field") {
    CHECK(config_field(R"({"reduction":"sparse_regression","seed":1})") == "<accepted>");
    CHECK(config_field(R"({"reduction":"sparse_regression","seed":1,"bogus":3})") == "/bogus");
    CHECK(config_field(R"({"reduction":"sparse_regression"})") == "/seed");
    CHECK(config_field(R"({"reduction":"sparse_regression","seed":1,"trials":"many"})") == "/trials");
    CHECK(config_field(R"({"reduction":"sparse_regression","seed":1,"delta":1.2})") == "/delta");
    CHECK(config_field(R"({"reduction":"teleportation","seed":1})") == "/reduction");
    CHECK(config_field(R"({"reduction":"sparse_regression","seed":1,"encoding":{"scalar_bits":0}})") ==
          "/encoding/scalar_bits");
    CHECK(config_field(R"({"reduction":"bit_cost","seed":1,"t_sweep":{"from":10,"to":100,"step":0}})") ==
          "/t_sweep/step");
    CHECK(config_field(R"({"reduction":"sparse_regression","seed":1,"k":64,"n":128})") == "/n");
    CHECK(config_field(R"({"reduction":"sparse_regression","seed":1,"k":128})") == "/k");
    CHECK(config_field(R"({"reduction":"clustering","seed":1,"k_values":[2]})") == "/k_values/0");
    CHECK(config_field(R"({"reduction":"pca_recsys","seed":1,"delta":1.5})") == "/delta");
    CHECK(config_field("not json").empty()); // root pointer
}

TEST_CASE("every known reduction has a valid default config") {
    for (const auto& name : known_reductions()) {
        const auto c = default_config(name, 7);
        CHECK(c.reduction == name);
        CHECK(c.seed == 7);
        CHECK_NOTHROW(parse_config(nlohmann::json{{"reduction", name}, {"seed", 7}}.dump()));
    }
    CHECK_THROWS_AS(default_config("nope", 1), config_error);
}

// ---------------------------------------------------------------------------
// Reports

TEST_CASE("reports are deterministic and carry no wall-clock time") {
    auto c = default_config("sparse_regression", 5);
    c.trials = 20;
    c.closed_form_checks = 10;
    const auto a = run(c), b = run(c);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.to_json().find("seconds") == std::string::npos);
    CHECK(a.to_csv().find("seconds") == std::string::npos);

    c.seed = 6;
    CHECK(run(c).to_json() != a.to_json());

    const auto csv = a.to_csv();
    CHECK(csv.rfind("key,value\nschema_version,1\n", 0) == 0);

    const auto j = nlohmann::json::parse(a.to_json());
    CHECK(j["schema_version"] == report_schema_version);
    CHECK(j["reduction"] == "sparse_regression");
    CHECK(j["trials"].size() == 20);
    CHECK(j["passed"] == a.passed());
}

TEST_CASE("sparse regression run at k = 8, n = 64") {
    auto c = default_config("sparse_regression", 11);
    c.k = 8;
    c.n = 64;
    c.trials = 200;
    const auto r = run(c);
    CHECK(r.passed());
    CHECK(r.accuracy >= 0.99);
    CHECK(r.metric("closed_form_max_deviation") <= 1e-9);
    CHECK(r.bits_max > 0);
}

TEST_CASE("dense regression run up to n = 8") {
    auto c = default_config("dense_regression", 12);
    c.n_max = 8;
    c.params_n_max = 8;
    c.random_count = 2;
    c.chi_square_draws = 20000;
    const auto r = run(c);
    CHECK(r.passed());
    CHECK(r.metric("law_max_tv") <= 1e-9);
    CHECK(r.chi_square.has_value());
}

TEST_CASE("fit_bits is linear for every workload") {
    for (const std::string w : {"random", "sparse_regression", "dense_regression", "clustering", "pca", "hamiltonian"}) {
        CAPTURE(w);
        const auto r = fit_bits(w, t_sweep{10, 1000, 10}, 3);
        REQUIRE(r.fit.has_value());
        CHECK(r.fit->r_squared > 0.999);
        CHECK(r.passed());
    }
    CHECK_THROWS(fit_bits("nope", t_sweep{}, 1));
}

TEST_CASE("write_report writes csv and json") {
    auto c = default_config("clustering", 4);
    c.trials = 10;
    c.name = "cluster_small";
    const auto r = run(c);
    const auto dir = std::filesystem::temp_directory_path() / "sqcomm_harness_test";
    std::filesystem::remove_all(dir);
    const auto paths = write_report(r, dir);
    REQUIRE(paths.size() == 2);
    CHECK(std::filesystem::exists(dir / "cluster_small.csv"));
    CHECK(std::filesystem::exists(dir / "cluster_small.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("verify suites") {
    for (const auto& c : verify_suite("oracle", 1)) {
        CAPTURE(c.name);
        CHECK(c.pass);
    }
    CHECK_THROWS(verify_suite("everything", 1));
}

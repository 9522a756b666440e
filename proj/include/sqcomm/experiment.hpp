#pragma once

// Configuration-driven experiments. Every acceptance experiment is one JSON
// config; run() is a pure function of the config (and its seed) apart from
// wall-clock time, which is never written to report files.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqcomm/bit_meter.hpp"
#include "sqcomm/encoding.hpp"
#include "sqcomm/stats.hpp"

namespace sqcomm {

inline constexpr int report_schema_version = 1;

struct t_sweep {
    std::size_t from = 10;
    std::size_t to = 1000;
    std::size_t step = 10;
};

/// Fields not used by a reduction keep their defaults; parse_config rejects
/// them if present.
struct experiment_config {
    std::string name;      // output file stem; defaults to the reduction
    std::string reduction; // see known_reductions()
    std::uint64_t seed = 0;
    std::size_t trials = 0; // 0 picks the reduction's default
    encoding_spec encoding;
    std::optional<std::filesystem::path> output_dir;

    // sizes
    std::size_t k = 8;
    std::size_t n = 64;
    std::size_t d = 64;
    std::size_t max_players = 8;
    std::size_t max_rows = 512;
    std::size_t max_cols = 512;
    std::vector<std::size_t> k_values{1, 3, 5};
    std::vector<std::size_t> d_values{64, 256};
    std::vector<std::size_t> random_sizes{6, 8};

    // budgets
    std::size_t samples = 10;
    std::size_t accesses = 200;
    std::size_t exhaustive_max = 3;
    std::size_t n_max = 8;
    std::size_t random_count = 20;
    std::size_t params_n_max = 10;
    std::size_t chi_square_draws = 100000;
    std::size_t closed_form_checks = 100;
    std::size_t runs_per_trial = 20;

    // construction parameters
    double beta_a = 1.0;
    double beta_b = 1.0;
    double delta = 1.2;
    double c1 = 1.0;
    double c2 = 2.0;
    double rejection_delta = 1e-6;
    double phi_limit = 8.0;

    // bit-cost fit
    std::string workload = "random";
    t_sweep sweep;
};

const std::vector<std::string>& known_reductions();

/// Throws config_error naming the offending field as a JSON pointer.
experiment_config parse_config(const std::string& text);
experiment_config load_config(const std::filesystem::path& path);
/// Defaults for a reduction with the given seed.
experiment_config default_config(const std::string& reduction, std::uint64_t seed);

struct trial_record {
    std::size_t index = 0;
    std::string truth;
    std::string decision;
    bool correct = true;
    std::uint64_t bits = 0;
    std::string detail;
};

struct check_result {
    std::string name;
    double value = 0.0;
    std::string relation; // "<=", ">=", "=="
    double bound = 0.0;
    bool pass = false;
};

struct report {
    experiment_config config;
    std::vector<trial_record> trials;
    double accuracy = 0.0;
    double bits_mean = 0.0;
    std::uint64_t bits_max = 0;
    std::map<std::string, double> metrics;
    std::optional<chi_square_result> chi_square;
    std::optional<linear_fit_result> fit;
    meter_summary transcript; // summed over every session of the run
    std::vector<check_result> checks;
    double wall_seconds = 0.0; // in memory only

    bool passed() const;
    double metric(const std::string& key) const;
    std::string to_json() const;
    std::string to_csv() const;
};

report run(const experiment_config& config);

/// Writes <dir>/<name>.csv and <dir>/<name>.json; returns the two paths.
std::vector<std::filesystem::path> write_report(const report& r, const std::filesystem::path& dir);

/// Named check bundles for the CLI: "protocols", "reductions", "oracle".
std::vector<check_result> verify_suite(const std::string& suite, std::uint64_t seed);

/// Bit-cost sweep over T on the session layout of a reduction.
report fit_bits(const std::string& workload, const t_sweep& sweep, std::uint64_t seed,
                const encoding_spec& enc = {});

} // namespace sqcomm

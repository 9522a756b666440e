// sqcomm: run experiment configs, verification suites and bit-cost fits.
//
//   sqcomm run --config configs/sparse_regression.json [--seed N] [--out DIR]
//   sqcomm verify --suite protocols|reductions|oracle [--seed N]
//   sqcomm fit-bits --reduction random --t-sweep 10:1000:10 [--seed N]
//
// Exit status: 0 when every check passed, 1 when a check failed, 2 on usage,
// config or runtime errors.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sqcomm/errors.hpp"
#include "sqcomm/experiment.hpp"

namespace {

void print_checks(const std::vector<sqcomm::check_result>& checks) {
    for (const auto& c : checks)
        std::printf("%s  %s: %.6g %s %.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.relation.c_str(),
                    c.bound);
}

bool all_pass(const std::vector<sqcomm::check_result>& checks) {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

sqcomm::t_sweep parse_sweep(const std::string& text) {
    sqcomm::t_sweep s;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%zu:%zu:%zu%c", &s.from, &s.to, &s.step, &tail) != 3 || s.step == 0 ||
        s.from == 0 || s.from >= s.to)
        throw sqcomm::invalid_argument("--t-sweep: expected FROM:TO:STEP with 0 < FROM < TO and STEP > 0");
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulated SQ access protocols and communication reductions"};
    app.require_subcommand(1);

    std::string config_path, out_dir, suite, workload, sweep_text = "10:1000:10";
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "Run one experiment config and write CSV and JSON reports");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    auto* run_seed = run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out_dir, "Output directory (default: config output.dir or results)");

    auto* verify = app.add_subcommand("verify", "Run a built-in check suite");
    verify->add_option("--suite", suite, "Suite name")
        ->required()
        ->check(CLI::IsMember({"protocols", "reductions", "oracle"}));
    verify->add_option("--seed", seed, "Seed")->default_val(1);

    auto* fit = app.add_subcommand("fit-bits", "Fit total bits against the number of accesses T");
    fit->add_option("--reduction", workload, "Workload layout")
        ->required()
        ->check(CLI::IsMember({"random", "sparse_regression", "dense_regression", "clustering", "pca", "hamiltonian"}));
    fit->add_option("--t-sweep", sweep_text, "FROM:TO:STEP");
    fit->add_option("--seed", seed, "Seed")->default_val(1);
    fit->add_option("--out", out_dir, "Also write CSV and JSON reports here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            auto config = sqcomm::load_config(config_path);
            if (*run_seed) config.seed = seed;
            const auto r = sqcomm::run(config);
            std::filesystem::path dir = "results";
            if (!out_dir.empty()) dir = out_dir;
            else if (config.output_dir) dir = *config.output_dir;
            const auto files = sqcomm::write_report(r, dir);
            std::printf("%s: %zu trials, accuracy %.6g, mean bits %.6g, %.2fs\n", config.name.c_str(),
                        r.trials.size(), r.accuracy, r.bits_mean, r.wall_seconds);
            print_checks(r.checks);
            for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
            return r.passed() ? 0 : 1;
        }
        if (*verify) {
            const auto checks = sqcomm::verify_suite(suite, seed);
            print_checks(checks);
            return all_pass(checks) ? 0 : 1;
        }
        const auto r = sqcomm::fit_bits(workload, parse_sweep(sweep_text), seed);
        std::printf("bits = %.6g + %.6g T  (R^2 = %.9f)\n", r.fit->intercept, r.fit->slope, r.fit->r_squared);
        std::printf("k = %g, word = %g bits, c0 = %.4g, c1 = %.4g\n", r.metric("players"), r.metric("word_bits"),
                    r.metric("c0"), r.metric("c1"));
        print_checks(r.checks);
        if (!out_dir.empty()) sqcomm::write_report(r, out_dir);
        return r.passed() ? 0 : 1;
    } catch (const sqcomm::config_error& e) {
        std::string what = e.what();
        if (what.starts_with(e.field() + ": ")) what.erase(0, e.field().size() + 2);
        std::cerr << "config error at " << (e.field().empty() ? "/" : e.field()) << ": " << what << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

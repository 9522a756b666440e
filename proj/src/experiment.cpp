#include "sqcomm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "sqcomm/combination_session.hpp"
#include "sqcomm/constructions.hpp"
#include "sqcomm/errors.hpp"
#include "sqcomm/instances.hpp"
#include "sqcomm/linalg_oracle.hpp"
#include "sqcomm/session.hpp"
#include "sqcomm/sq_access.hpp"

namespace sqcomm {

namespace {

using json = nlohmann::ordered_json;

// Stream labels for derive_rng. Each experiment draws its randomness from
// (seed, label + trial) so trials are independent of one another.
constexpr std::uint64_t stream_instance = 0;
constexpr std::uint64_t stream_players = 1ULL << 32;
constexpr std::uint64_t stream_coordinator = 2ULL << 32;
constexpr std::uint64_t stream_workload = 3ULL << 32;

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string fmt_exact(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// Configuration fields

struct field {
    const char* name;
    std::vector<std::string> reductions; // empty: every reduction
    std::function<void(const json&, experiment_config&, const std::string&)> read;
    std::function<json(const experiment_config&)> write;
};

std::size_t read_size(const json& v, const std::string& path, std::size_t lo = 0,
                      std::size_t hi = std::numeric_limits<std::size_t>::max()) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        throw config_error(path, "must be a non-negative integer");
    const auto x = v.get<std::uint64_t>();
    if (x < lo || x > hi)
        throw config_error(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<std::size_t>(x);
}

double read_double(const json& v, const std::string& path) {
    if (!v.is_number()) throw config_error(path, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw config_error(path, "must be finite");
    return x;
}

std::vector<std::size_t> read_sizes(const json& v, const std::string& path, std::size_t lo, std::size_t hi) {
    if (!v.is_array() || v.empty()) throw config_error(path, "must be a non-empty array");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_size(v[i], path + "/" + std::to_string(i), lo, hi));
    return out;
}

#define SIZE_FIELD(member, lo, hi, ...)                                                                   \
    field {                                                                                                \
        #member, {__VA_ARGS__},                                                                            \
            [](const json& v, experiment_config& c, const std::string& p) { c.member = read_size(v, p, lo, hi); }, \
            [](const experiment_config& c) { return json(c.member); }                                      \
    }

#define DOUBLE_FIELD(member, ...)                                                                           \
    field {                                                                                                 \
        #member, {__VA_ARGS__},                                                                             \
            [](const json& v, experiment_config& c, const std::string& p) { c.member = read_double(v, p); }, \
            [](const experiment_config& c) { return json(c.member); }                                       \
    }

const std::vector<field>& fields() {
    static const std::vector<field> table = {
        field{"name", {},
              [](const json& v, experiment_config& c, const std::string& p) {
                  if (!v.is_string() || v.get<std::string>().empty()) throw config_error(p, "must be a non-empty string");
                  const auto s = v.get<std::string>();
                  if (s.find_first_of("/\\") != std::string::npos) throw config_error(p, "must not contain path separators");
                  c.name = s;
              },
              [](const experiment_config& c) { return json(c.name); }},
        field{"seed", {},
              [](const json& v, experiment_config& c, const std::string& p) {
                  if (!v.is_number_unsigned()) throw config_error(p, "must be a non-negative integer");
                  c.seed = v.get<std::uint64_t>();
              },
              [](const experiment_config& c) { return json(c.seed); }},
        SIZE_FIELD(trials, 1, 100000, "protocol_exactness", "oversampling", "sparse_regression", "clustering",
                   "pca_recsys"),
        field{"encoding", {},
              [](const json& v, experiment_config& c, const std::string& p) {
                  if (!v.is_object()) throw config_error(p, "must be an object");
                  for (const auto& [key, val] : v.items()) {
                      if (key == "scalar_bits")
                          c.encoding.scalar_bits = static_cast<unsigned>(read_size(val, p + "/scalar_bits", 8, 64));
                      else if (key == "opcode_bits")
                          c.encoding.opcode_bits = static_cast<unsigned>(read_size(val, p + "/opcode_bits", 0, 64));
                      else
                          throw config_error(p + "/" + key, "unknown field");
                  }
              },
              [](const experiment_config& c) {
                  return json{{"scalar_bits", c.encoding.scalar_bits}, {"opcode_bits", c.encoding.opcode_bits}};
              }},
        field{"output", {},
              [](const json& v, experiment_config& c, const std::string& p) {
                  if (!v.is_object()) throw config_error(p, "must be an object");
                  for (const auto& [key, val] : v.items()) {
                      if (key != "dir") throw config_error(p + "/" + key, "unknown field");
                      if (!val.is_string()) throw config_error(p + "/dir", "must be a string");
                      c.output_dir = val.get<std::string>();
                  }
              },
              nullptr},
        SIZE_FIELD(k, 1, 64, "sparse_regression", "bit_cost"),
        SIZE_FIELD(n, 1, 4096, "sparse_regression", "pca_recsys", "bit_cost"),
        SIZE_FIELD(max_players, 1, 64, "protocol_exactness", "oversampling", "bit_cost"),
        SIZE_FIELD(max_rows, 1, max_dense_dimension, "protocol_exactness", "oversampling", "bit_cost"),
        SIZE_FIELD(max_cols, 1, max_dense_dimension, "protocol_exactness", "bit_cost"),
        field{"k_values", {"clustering"},
              [](const json& v, experiment_config& c, const std::string& p) {
                  c.k_values = read_sizes(v, p, 1, 63);
                  for (std::size_t i = 0; i < c.k_values.size(); ++i)
                      if (c.k_values[i] % 2 == 0) throw config_error(p + "/" + std::to_string(i), "must be odd");
              },
              [](const experiment_config& c) { return json(c.k_values); }},
        field{"d_values", {"clustering"},
              [](const json& v, experiment_config& c, const std::string& p) {
                  c.d_values = read_sizes(v, p, 1, max_dense_dimension);
              },
              [](const experiment_config& c) { return json(c.d_values); }},
        field{"random_sizes", {"hamiltonian"},
              [](const json& v, experiment_config& c, const std::string& p) { c.random_sizes = read_sizes(v, p, 1, 8); },
              [](const experiment_config& c) { return json(c.random_sizes); }},
        SIZE_FIELD(samples, 1, 1000000, "sparse_regression"),
        SIZE_FIELD(accesses, 0, 1000000, "protocol_exactness"),
        SIZE_FIELD(exhaustive_max, 0, 4, "dense_regression", "hamiltonian"),
        SIZE_FIELD(n_max, 1, 10, "dense_regression"),
        SIZE_FIELD(random_count, 0, 100000, "dense_regression", "hamiltonian"),
        SIZE_FIELD(params_n_max, 0, 10, "dense_regression"),
        SIZE_FIELD(chi_square_draws, 0, 100000000, "dense_regression"),
        SIZE_FIELD(closed_form_checks, 0, 100000, "sparse_regression"),
        SIZE_FIELD(runs_per_trial, 0, 100000, "oversampling"),
        DOUBLE_FIELD(beta_a, "sparse_regression"),
        DOUBLE_FIELD(beta_b, "sparse_regression"),
        DOUBLE_FIELD(delta, "pca_recsys"),
        DOUBLE_FIELD(c1, "clustering"),
        DOUBLE_FIELD(c2, "clustering"),
        DOUBLE_FIELD(rejection_delta, "oversampling"),
        DOUBLE_FIELD(phi_limit, "oversampling"),
        field{"workload", {"bit_cost"},
              [](const json& v, experiment_config& c, const std::string& p) {
                  if (!v.is_string()) throw config_error(p, "must be a string");
                  c.workload = v.get<std::string>();
              },
              [](const experiment_config& c) { return json(c.workload); }},
        field{"t_sweep", {"bit_cost"},
              [](const json& v, experiment_config& c, const std::string& p) {
                  if (!v.is_object()) throw config_error(p, "must be an object");
                  for (const auto& [key, val] : v.items()) {
                      if (key == "from")
                          c.sweep.from = read_size(val, p + "/from", 1, 1000000);
                      else if (key == "to")
                          c.sweep.to = read_size(val, p + "/to", 1, 1000000);
                      else if (key == "step")
                          c.sweep.step = read_size(val, p + "/step", 1, 1000000);
                      else
                          throw config_error(p + "/" + key, "unknown field");
                  }
              },
              [](const experiment_config& c) {
                  return json{{"from", c.sweep.from}, {"to", c.sweep.to}, {"step", c.sweep.step}};
              }},
    };
    return table;
}

#undef SIZE_FIELD
#undef DOUBLE_FIELD

bool field_applies(const field& f, const std::string& reduction) {
    return f.reductions.empty() ||
           std::find(f.reductions.begin(), f.reductions.end(), reduction) != f.reductions.end();
}

const std::vector<std::string> workloads = {"random", "sparse_regression", "dense_regression",
                                            "clustering", "pca", "hamiltonian"};

void validate(const experiment_config& c) {
    if (c.reduction == "sparse_regression") {
        if (c.k < 2) throw config_error("/k", "must be at least 2");
        if (c.n < 8) throw config_error("/n", "must be at least 8");
        if (c.k * c.n > max_dense_dimension) throw config_error("/n", "k * n exceeds 4096");
        if (!(c.beta_a > 0.0)) throw config_error("/beta_a", "must be positive");
        if (!(c.beta_b > 0.0)) throw config_error("/beta_b", "must be positive");
    }
    if (c.reduction == "pca_recsys") {
        if (c.n < 8 || 2 * c.n > max_dense_dimension) throw config_error("/n", "must lie in [8, 2048]");
        if (!(c.delta > 1.0 && c.delta < std::numbers::sqrt2)) throw config_error("/delta", "must lie in (1, sqrt 2)");
    }
    if (c.reduction == "clustering" && !(c.c1 > 0.0 && c.c1 <= c.c2))
        throw config_error("/c1", "need 0 < c1 <= c2");
    if (c.reduction == "oversampling") {
        if (!(c.rejection_delta > 0.0 && c.rejection_delta < 1.0))
            throw config_error("/rejection_delta", "must lie in (0, 1)");
        if (!(c.phi_limit >= 1.0)) throw config_error("/phi_limit", "must be at least 1");
    }
    if (c.reduction == "dense_regression" && c.exhaustive_max > c.n_max)
        throw config_error("/exhaustive_max", "must not exceed n_max");
    if (c.reduction == "bit_cost") {
        if (std::find(workloads.begin(), workloads.end(), c.workload) == workloads.end())
            throw config_error("/workload", "unknown workload '" + c.workload + "'");
        if (c.sweep.from >= c.sweep.to) throw config_error("/t_sweep/to", "must exceed from");
        if ((c.sweep.to - c.sweep.from) / c.sweep.step < 1)
            throw config_error("/t_sweep/step", "sweep needs at least two points");
        if (c.workload == "sparse_regression" && (c.k < 2 || c.n < 8 || c.k * c.n > max_dense_dimension))
            throw config_error("/n", "sparse_regression workload needs k >= 2, n >= 8, k n <= 4096");
        if (c.workload == "clustering" && c.k % 2 == 0) throw config_error("/k", "clustering workload needs odd k");
        if (c.workload == "pca" && (c.n < 8 || 2 * c.n > max_dense_dimension))
            throw config_error("/n", "pca workload needs n in [8, 2048]");
        if (c.workload == "dense_regression" && c.n > 10) throw config_error("/n", "dense workload needs n <= 10");
        if (c.workload == "hamiltonian" && c.n > 8) throw config_error("/n", "hamiltonian workload needs n <= 8");
    }
}

json config_to_json(const experiment_config& c) {
    json j;
    j["reduction"] = c.reduction;
    for (const auto& f : fields())
        if (f.write && field_applies(f, c.reduction)) j[f.name] = f.write(c);
    return j;
}

// ---------------------------------------------------------------------------
// Report assembly

void add_check(report& r, const std::string& name, double value, const std::string& relation, double bound) {
    bool pass = false;
    if (relation == "<=") pass = value <= bound;
    else if (relation == ">=") pass = value >= bound;
    else if (relation == "<") pass = value < bound;
    else if (relation == ">") pass = value > bound;
    else pass = value == bound;
    r.checks.push_back({name, value, relation, bound, pass});
}

void merge(meter_summary& into, const meter_summary& s) {
    into.total_bits += s.total_bits;
    into.setup_bits += s.setup_bits;
    into.access_bits += s.access_bits;
    into.messages += s.messages;
    into.rounds += s.rounds;
    for (const auto& [kind, t] : s.by_kind) {
        into.by_kind[kind].messages += t.messages;
        into.by_kind[kind].bits += t.bits;
    }
}

void finish(report& r) {
    if (r.trials.empty()) return;
    std::size_t correct = 0;
    double bits = 0.0;
    for (const auto& t : r.trials) {
        correct += t.correct ? 1 : 0;
        bits += static_cast<double>(t.bits);
        r.bits_max = std::max(r.bits_max, t.bits);
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.trials.size());
    r.bits_mean = bits / static_cast<double>(r.trials.size());
}

// ---------------------------------------------------------------------------
// Access workloads shared by the protocol experiments

enum class access_kind { b_sample, b_query, row_norm_sample, row_sample, entry, row_norm_query, frobenius };

struct planned_access {
    access_kind kind;
    std::size_t row = 0;
    std::size_t col = 0;
};

struct workload_shape {
    bool has_a = false;
    bool has_b = false;
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<std::size_t> nonzero_rows;
};

workload_shape shape_of(const session_layout& layout) {
    workload_shape s;
    std::size_t rows = 0;
    for (const auto& seg : layout.a) {
        for (Eigen::Index i = 0; i < seg.data.rows(); ++i)
            if (seg.data.row(i).squaredNorm() > 0.0) s.nonzero_rows.push_back(rows + static_cast<std::size_t>(i));
        rows += static_cast<std::size_t>(seg.data.rows());
        if (seg.data.rows() > 0) s.n = static_cast<std::size_t>(seg.data.cols());
    }
    std::size_t b_rows = 0;
    for (const auto& seg : layout.b) b_rows += static_cast<std::size_t>(seg.data.size());
    s.has_a = !layout.a.empty() && rows > 0;
    s.has_b = !layout.b.empty() && b_rows > 0;
    s.m = s.has_a ? rows : b_rows;
    return s;
}

// Round-robin over the available kinds, random indices.
double van_der_corput(std::size_t i, unsigned base) {
    double x = 0.0, scale = 1.0 / base;
    for (; i > 0; i /= base, scale /= base) x += static_cast<double>(i % base) * scale;
    return x;
}

// Round-robin over the available kinds. Random plans draw each target
// uniformly; spread plans walk a shifted van der Corput sequence, so every
// prefix visits each contiguous range of rows (and so the public pieces) in
// near-exact proportion. The bit-cost sweep uses spread plans.
std::vector<planned_access> plan_accesses(std::size_t count, const workload_shape& s, rng_t& rng,
                                          bool spread = false) {
    std::vector<access_kind> kinds;
    if (s.has_b) kinds.insert(kinds.end(), {access_kind::b_sample, access_kind::b_query});
    if (s.has_a)
        kinds.insert(kinds.end(), {access_kind::row_norm_sample, access_kind::row_sample, access_kind::entry,
                                   access_kind::row_norm_query, access_kind::frobenius});
    const double row_shift = uniform01(rng), col_shift = uniform01(rng);
    std::map<access_kind, std::size_t> seen;
    auto pick = [&](std::size_t used, std::size_t range, unsigned base, double shift) {
        if (!spread) return uniform_below(rng, range);
        const double u = van_der_corput(used, base) + shift;
        return std::min(range - 1, static_cast<std::size_t>((u - std::floor(u)) * static_cast<double>(range)));
    };

    std::vector<planned_access> plan;
    plan.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        planned_access a{kinds[t % kinds.size()]};
        const std::size_t used = seen[a.kind]++;
        switch (a.kind) {
        case access_kind::b_query: a.row = pick(used, s.m, 2, row_shift); break;
        case access_kind::row_sample:
            a.row = s.nonzero_rows[pick(used, s.nonzero_rows.size(), 2, row_shift)];
            break;
        case access_kind::entry:
            a.row = pick(used, s.m, 2, row_shift);
            a.col = pick(used, s.n, 3, col_shift);
            break;
        case access_kind::row_norm_query: a.row = pick(used, s.m, 2, row_shift); break;
        default: break;
        }
        plan.push_back(a);
    }
    return plan;
}

double as_number(const access_value& v) {
    return std::holds_alternative<double>(v) ? std::get<double>(v) : static_cast<double>(std::get<std::size_t>(v));
}

std::vector<double> execute(session& s, const std::vector<planned_access>& plan, rng_t& coordinator) {
    std::vector<double> trace;
    trace.reserve(plan.size());
    for (const auto& a : plan) {
        switch (a.kind) {
        case access_kind::b_sample: trace.push_back(static_cast<double>(s.sample_b(coordinator).value)); break;
        case access_kind::b_query: trace.push_back(s.query_b(a.row).value); break;
        case access_kind::row_norm_sample:
            trace.push_back(as_number(s.access_a(request::row_norm_sample{}, coordinator).value));
            break;
        case access_kind::row_sample:
            trace.push_back(as_number(s.access_a(request::row_sample{a.row}, coordinator).value));
            break;
        case access_kind::entry:
            trace.push_back(as_number(s.access_a(request::entry_query{a.row, a.col}, coordinator).value));
            break;
        case access_kind::row_norm_query:
            trace.push_back(as_number(s.access_a(request::row_norm_query{a.row}, coordinator).value));
            break;
        case access_kind::frobenius:
            trace.push_back(as_number(s.access_a(request::frobenius_query{}, coordinator).value));
            break;
        }
    }
    return trace;
}

void setup_all(session& s, const workload_shape& shape) {
    if (shape.has_a) s.setup_a();
    if (shape.has_b) s.setup_b();
}

// Random entries, about 30% zeros and the occasional zero row.
rmatrix random_block(std::size_t rows, std::size_t cols, rng_t& rng) {
    std::normal_distribution<double> gauss;
    rmatrix a = rmatrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (uniform01(rng) < 0.05) continue;
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (uniform01(rng) < 0.7) a(i, j) = gauss(rng);
    }
    return a;
}

// Cuts [0, total) into `pieces` contiguous, possibly empty, ranges.
std::vector<std::size_t> cut_points(std::size_t total, std::size_t pieces, rng_t& rng) {
    std::vector<std::size_t> cuts(pieces - 1);
    for (auto& c : cuts) c = uniform_below(rng, total + 1);
    std::sort(cuts.begin(), cuts.end());
    cuts.insert(cuts.begin(), 0);
    cuts.push_back(total);
    return cuts;
}

struct random_partition {
    session_layout layout;
    rmatrix a;
    rvector b;
};

// Row partition of a random m x n matrix A and m-vector b among k players,
// with an optional public block; A and b are cut independently.
random_partition make_partition(std::size_t k, std::size_t m, std::size_t n, rng_t& rng) {
    random_partition p;
    p.a = random_block(m, n, rng);
    p.b = random_block(m, 1, rng).col(0);
    if (p.a.cwiseAbs().maxCoeff() == 0.0) p.a(0, 0) = 1.0;
    if (p.b.cwiseAbs().maxCoeff() == 0.0) p.b[0] = 1.0;
    p.layout.players = k;

    const auto owners = [&](std::size_t pieces, bool with_public) {
        std::vector<party_id> o;
        for (std::size_t i = 1; i <= k; ++i) o.push_back(static_cast<party_id>(i));
        for (std::size_t i = o.size(); i > 1; --i) std::swap(o[i - 1], o[uniform_below(rng, i)]);
        if (with_public) o.insert(o.begin() + static_cast<std::ptrdiff_t>(uniform_below(rng, pieces)), public_owner);
        return o;
    };

    for (int part = 0; part < 2; ++part) {
        const bool with_public = uniform_below(rng, 2) == 1;
        const std::size_t pieces = k + (with_public ? 1 : 0);
        const auto cuts = cut_points(m, pieces, rng);
        const auto who = owners(pieces, with_public);
        for (std::size_t s = 0; s < pieces; ++s) {
            const auto lo = static_cast<Eigen::Index>(cuts[s]);
            const auto len = static_cast<Eigen::Index>(cuts[s + 1] - cuts[s]);
            if (part == 0)
                p.layout.a.push_back({who[s], p.a.middleRows(lo, len)});
            else
                p.layout.b.push_back({who[s], p.b.segment(lo, len)});
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Experiments

void run_protocol_exactness(const experiment_config& c, report& r) {
    double worst = 0.0;
    std::size_t replay_mismatches = 0;
    for (std::size_t t = 0; t < c.trials; ++t) {
        rng_t rng = derive_rng(c.seed, stream_instance + t);
        const std::size_t k = 1 + uniform_below(rng, c.max_players);
        const std::size_t m = 1 + uniform_below(rng, c.max_rows);
        const std::size_t n = 1 + uniform_below(rng, c.max_cols);
        const random_partition part = make_partition(k, m, n, rng);

        session s(part.layout, c.encoding, c.seed + stream_players + t);
        const workload_shape shape = shape_of(part.layout);
        setup_all(s, shape);

        double dev = 0.0;
        const sq_vector b(part.b);
        dev = std::max(dev, max_abs_deviation(s.protocol_distribution({law_kind::b_sample}), b.exact_distribution()));
        const sq_matrix a(part.a);
        dev = std::max(dev, max_abs_deviation(s.protocol_distribution({law_kind::a_row_norm_sample}),
                                              a.row_norms().exact_distribution()));
        for (std::size_t i : shape.nonzero_rows)
            dev = std::max(dev, max_abs_deviation(s.protocol_distribution({law_kind::a_row_sample, i}),
                                                  a.row(i).exact_distribution()));
        worst = std::max(worst, dev);

        // Isolation: a coordinator fed only the transcript repeats every decision.
        rng_t plan_rng = derive_rng(c.seed, stream_workload + t);
        const auto plan = plan_accesses(c.accesses, shape, plan_rng);
        rng_t coordinator = derive_rng(c.seed, stream_coordinator + t);
        const auto live = execute(s, plan, coordinator);
        bool replay_ok = true;
        try {
            session again = s.replay();
            setup_all(again, shape);
            rng_t coordinator_again = derive_rng(c.seed, stream_coordinator + t);
            replay_ok = execute(again, plan, coordinator_again) == live;
        } catch (const replay_divergence&) {
            replay_ok = false;
        }
        replay_mismatches += replay_ok ? 0 : 1;

        const auto summary = s.meter_report();
        merge(r.transcript, summary);
        const bool ok = dev <= 1e-12 && replay_ok;
        r.trials.push_back({t, "centralized law", ok ? "exact" : (replay_ok ? "deviates" : "replay diverged"), ok,
                            summary.total_bits,
                            "k=" + std::to_string(k) + " m=" + std::to_string(m) + " n=" + std::to_string(n) +
                                " dev=" + fmt(dev)});
    }
    r.metrics["max_abs_deviation"] = worst;
    r.metrics["replay_mismatches"] = static_cast<double>(replay_mismatches);
    add_check(r, "protocol law equals centralized law", worst, "<=", 1e-12);
    add_check(r, "replayed coordinator repeats every decision", static_cast<double>(replay_mismatches), "==", 0.0);
}

struct workload_data {
    session_layout layout;
};

workload_data make_workload(const experiment_config& c, rng_t& rng) {
    if (c.workload == "random")
        return {make_partition(c.max_players, c.max_rows, c.max_cols, rng).layout};
    if (c.workload == "sparse_regression")
        return {build_regression_sparse(gen_disjointness(c.k, c.n, true, rng)).layout};
    if (c.workload == "dense_regression") return {build_regression_dense(gen_function_pair(c.n, rng)).layout};
    if (c.workload == "clustering")
        return {build_clustering(gen_gap_hamming(c.k, c.n, gap_sign::positive, rng)).layout};
    if (c.workload == "pca") {
        const auto inst = gen_disjointness(2, c.n, true, rng);
        return {build_pca(inst.sets[0], inst.sets[1]).layout};
    }
    return {build_hamiltonian(gen_function_pair(c.n, rng)).layout};
}

void run_bit_cost(const experiment_config& c, report& r) {
    rng_t rng = derive_rng(c.seed, stream_instance);
    const workload_data w = make_workload(c, rng);
    const workload_shape shape = shape_of(w.layout);

    std::vector<double> ts, bits;
    std::size_t index = 0;
    for (std::size_t t = c.sweep.from; t <= c.sweep.to; t += c.sweep.step, ++index) {
        session s(w.layout, c.encoding, c.seed + stream_players + index);
        setup_all(s, shape);
        rng_t plan_rng = derive_rng(c.seed, stream_workload + index);
        rng_t coordinator = derive_rng(c.seed, stream_coordinator + index);
        execute(s, plan_accesses(t, shape, plan_rng, true), coordinator);
        const auto summary = s.meter_report();
        merge(r.transcript, summary);
        ts.push_back(static_cast<double>(t));
        bits.push_back(static_cast<double>(summary.total_bits));
        r.trials.push_back({index, "", "", true, summary.total_bits, "T=" + std::to_string(t)});
    }

    const auto fit = linear_fit(ts, bits);
    r.fit = fit;
    const double k = static_cast<double>(w.layout.players);
    const double width = c.encoding.scalar_bits + encoding_spec::index_bits(static_cast<std::uint64_t>(shape.m) *
                                                                            std::max<std::size_t>(shape.n, 1));
    r.metrics["players"] = k;
    r.metrics["rows"] = static_cast<double>(shape.m);
    r.metrics["cols"] = static_cast<double>(shape.n);
    r.metrics["word_bits"] = width;
    r.metrics["c0"] = fit.intercept / (k * width);
    r.metrics["c1"] = fit.slope / width;
    r.metrics["r_squared"] = fit.r_squared;
    add_check(r, "c0 (setup words per player)", r.metrics["c0"], "<=", 4.0);
    add_check(r, "c1 (words per access)", r.metrics["c1"], "<=", 4.0);
    add_check(r, "linear fit R^2", fit.r_squared, ">", 0.999);
}

void run_oversampling(const experiment_config& c, report& r) {
    std::normal_distribution<double> gauss;
    double identity_err = 0.0, domination_gap = 0.0, law_dev = 0.0, rounds_err = 0.0, query_err = 0.0;
    double rounds_sum = 0.0, phi_sum = 0.0;
    std::size_t checked_rounds = 0, timeouts = 0, phi_one_violations = 0;

    for (std::size_t t = 0; t < c.trials; ++t) {
        rng_t rng = derive_rng(c.seed, stream_instance + t);
        const std::size_t k = 1 + uniform_below(rng, c.max_players);
        const std::size_t m = 1 + uniform_below(rng, c.max_rows);
        std::vector<player_part> parts;
        std::vector<double> mu;
        rvector target;
        // Redraw on total cancellation (probability zero for continuous draws).
        do {
            parts.clear();
            mu.clear();
            target = rvector::Zero(static_cast<Eigen::Index>(m));
            for (std::size_t i = 0; i < k; ++i) {
                rvector b = random_block(m, 1, rng).col(0);
                mu.push_back(gauss(rng));
                target += mu.back() * b;
                parts.push_back({std::nullopt, std::move(b)});
            }
        } while (target.norm() <= cancellation_tolerance);

        combination_session cs(parts, c.encoding, c.seed + stream_players + t);
        cs.setup_b();
        auto view = cs.b_view(mu);
        const double phi = view.phi();
        if (k == 1 && std::abs(phi - 1.0) > 1e-12) ++phi_one_violations;

        const double b_sq = target.squaredNorm();
        const double dom = view.dominator_norm();
        const double err = std::abs(dom * dom - phi * b_sq) / (phi * b_sq);
        identity_err = std::max(identity_err, err);
        for (std::size_t j = 0; j < m; ++j) {
            const auto e = view.query(j);
            domination_gap = std::max(domination_gap, std::abs(e.target) - std::abs(e.dominator));
            query_err = std::max(query_err, std::abs(e.target.real() - target[static_cast<Eigen::Index>(j)]));
        }

        const std::size_t cap = rejection_round_cap(phi, c.rejection_delta);
        const auto law = view.sample_law(cap);
        const auto exact = sq_vector(target).exact_distribution();
        const double dev = max_abs_deviation(law.accepted, exact);
        law_dev = std::max(law_dev, dev);

        if (phi <= c.phi_limit) {
            rounds_err = std::max(rounds_err, std::abs(law.expected_rounds / phi - 1.0));
            ++checked_rounds;
            rng_t coordinator = derive_rng(c.seed, stream_coordinator + t);
            for (std::size_t run = 0; run < c.runs_per_trial; ++run) {
                try {
                    rounds_sum += static_cast<double>(view.sample(c.rejection_delta, coordinator).value.rounds);
                } catch (const timeout&) {
                    rounds_sum += static_cast<double>(cap);
                    ++timeouts;
                }
                phi_sum += phi;
            }
        }

        const auto summary = cs.meter_report();
        merge(r.transcript, summary);
        const bool ok = err <= 1e-9 && dev <= 1e-12;
        r.trials.push_back({t, "D_b", ok ? "exact" : "deviates", ok, summary.total_bits,
                            "k=" + std::to_string(k) + " m=" + std::to_string(m) + " phi=" + fmt(phi)});
    }

    r.metrics["dominator_identity_max_rel_error"] = identity_err;
    r.metrics["domination_max_gap"] = domination_gap;
    r.metrics["query_max_error"] = query_err;
    r.metrics["rejection_law_max_deviation"] = law_dev;
    r.metrics["expected_rounds_max_rel_error"] = rounds_err;
    r.metrics["trials_with_phi_at_most_limit"] = static_cast<double>(checked_rounds);
    r.metrics["empirical_rounds_over_phi"] = phi_sum > 0.0 ? rounds_sum / phi_sum : 1.0;
    r.metrics["rejection_timeouts"] = static_cast<double>(timeouts);
    r.metrics["phi_not_one_for_k1"] = static_cast<double>(phi_one_violations);
    add_check(r, "||b~||^2 = phi ||b||^2 (relative)", identity_err, "<=", 1e-9);
    add_check(r, "|b~_j| >= |b_j|", domination_gap, "<=", 1e-9);
    add_check(r, "queried b_j equals sum mu_i b_j^(i)", query_err, "<=", 1e-12);
    add_check(r, "enumerated rejection law equals D_b", law_dev, "<=", 1e-12);
    add_check(r, "expected rounds within 10% of phi", rounds_err, "<=", 0.1);
    add_check(r, "empirical rounds / phi >= 0.9", r.metrics["empirical_rounds_over_phi"], ">=", 0.9);
    add_check(r, "empirical rounds / phi <= 1.1", r.metrics["empirical_rounds_over_phi"], "<=", 1.1);
    add_check(r, "phi = 1 when k = 1", static_cast<double>(phi_one_violations), "==", 0.0);
}

void run_sparse_regression(const experiment_config& c, report& r) {
    double closed_dev = 0.0, kappa_dev = 0.0, kappa_f_dev = 0.0;
    for (std::size_t t = 0; t < c.trials; ++t) {
        rng_t rng = derive_rng(c.seed, stream_instance + t);
        const bool want = uniform_below(rng, 2) == 1;
        const auto inst = gen_disjointness(c.k, c.n, want, rng);
        const auto reg = build_regression_sparse(inst, c.beta_a, c.beta_b);
        const rvector x = pinv_solve(reg.a, reg.b);
        if (t < c.closed_form_checks) {
            closed_dev = std::max(closed_dev, (x - reg.closed_form_x).cwiseAbs().maxCoeff());
            if (c.beta_a == 1.0) {
                const auto p = params(reg.a, reg.b);
                kappa_dev = std::max(kappa_dev, std::abs(p.kappa - 1.0));
                kappa_f_dev = std::max(kappa_f_dev, std::abs(p.kappa_f * p.kappa_f - static_cast<double>(c.k)));
            }
        }

        session s(reg.layout, c.encoding, c.seed + stream_players + t);
        rng_t coordinator = derive_rng(c.seed, stream_coordinator + t);
        const auto decision = decide_disjointness(s, x, c.samples, coordinator);
        merge(r.transcript, s.meter_report());
        const bool truth = inst.truth.has_value();
        std::string detail = truth ? "player=" + std::to_string(inst.truth->player) + " coordinate=" +
                                         std::to_string(inst.truth->coordinate) + " x_j=" +
                                         fmt(x[static_cast<Eigen::Index>(inst.truth->player)])
                                   : "";
        r.trials.push_back({t, truth ? "intersect" : "disjoint", decision.intersect ? "intersect" : "disjoint",
                            truth == decision.intersect, decision.bits, detail});
    }
    r.metrics["closed_form_max_deviation"] = closed_dev;
    add_check(r, "closed-form x* equals pinv_solve", closed_dev, "<=", 1e-9);
    if (c.beta_a == 1.0 && c.closed_form_checks > 0) {
        r.metrics["kappa_max_deviation_from_1"] = kappa_dev;
        r.metrics["kappa_f_sq_max_deviation_from_k"] = kappa_f_dev;
        add_check(r, "kappa = 1 at beta_A = 1", kappa_dev, "<=", 1e-9);
        add_check(r, "kappa_F^2 = k at beta_A = 1", kappa_f_dev, "<=", 1e-9);
    }
    finish(r);
    add_check(r, "decision accuracy", r.accuracy, ">=", 0.99);
}

void run_dense_regression(const experiment_config& c, report& r) {
    double worst = 0.0, worst_tv = 0.0;
    std::size_t index = 0;
    for (std::size_t n = 1; n <= c.n_max; ++n, ++index) {
        std::vector<function_pair> pairs;
        if (n <= c.exhaustive_max) {
            const std::uint64_t count = 1ULL << (1ULL << n);
            for (std::uint64_t f = 0; f < count; ++f)
                for (std::uint64_t g = 0; g < count; ++g)
                    pairs.push_back({n, function_from_mask(n, f), function_from_mask(n, g)});
        } else {
            rng_t rng = derive_rng(c.seed, stream_instance + n);
            for (std::size_t i = 0; i < c.random_count; ++i) pairs.push_back(gen_function_pair(n, rng));
        }
        double dev_n = 0.0;
        for (const auto& pair : pairs) {
            const auto reg = build_regression_dense(pair);
            const auto law = solution_law(reg);
            dev_n = std::max(dev_n, max_abs_deviation(law, reg.target));
            worst_tv = std::max(worst_tv, tv_distance(law, reg.target));
        }
        worst = std::max(worst, dev_n);
        if (pairs.empty()) continue;

        // Ownership: Alice holds A, Bob holds |g>; both setups cross the channel.
        const auto reg = build_regression_dense(pairs.front());
        session s(reg.layout, c.encoding, c.seed + stream_players + n);
        s.setup_a();
        s.setup_b();
        const auto summary = s.meter_report();
        merge(r.transcript, summary);
        const bool ok = dev_n <= 1e-9;
        r.trials.push_back({index, "dsp_distribution", ok ? "match" : "mismatch", ok, summary.total_bits,
                            "n=" + std::to_string(n) + " pairs=" + std::to_string(pairs.size()) +
                                (n <= c.exhaustive_max ? " (all)" : " (random)") + " dev=" + fmt(dev_n)});
    }
    r.metrics["law_max_abs_deviation"] = worst;
    r.metrics["law_max_tv"] = worst_tv;
    r.metrics["law_max_l1"] = 2.0 * worst_tv;
    add_check(r, "solution law equals dsp_distribution", worst, "<=", 1e-9);

    double kf_dev = 0.0, kappa_dev = 0.0, gamma_dev = 0.0;
    for (std::size_t n = 1; n <= c.params_n_max; ++n) {
        rng_t rng = derive_rng(c.seed, stream_workload + n);
        const auto reg = build_regression_dense(gen_function_pair(n, rng));
        const auto p = params(reg.a, reg.b);
        const double size = std::ldexp(1.0, static_cast<int>(n));
        kf_dev = std::max(kf_dev, std::abs(p.kappa_f * p.kappa_f - size) / size);
        kappa_dev = std::max(kappa_dev, std::abs(p.kappa - 1.0));
        gamma_dev = std::max(gamma_dev, std::abs(p.gamma - 1.0));
    }
    if (c.params_n_max > 0) {
        r.metrics["kappa_f_sq_max_rel_deviation"] = kf_dev;
        r.metrics["kappa_max_deviation"] = kappa_dev;
        r.metrics["gamma_max_deviation"] = gamma_dev;
        add_check(r, "kappa_F^2 = 2^n (relative)", kf_dev, "<=", 1e-9);
        add_check(r, "kappa = 1", kappa_dev, "<=", 1e-9);
        add_check(r, "gamma = 1", gamma_dev, "<=", 1e-9);
    }

    if (c.chi_square_draws > 0) {
        rng_t rng = derive_rng(c.seed, stream_instance);
        const auto reg = build_regression_dense(gen_function_pair(c.n_max, rng));
        const sq_vector x(pinv_solve(reg.a, reg.b));
        std::vector<std::uint64_t> counts(x.size(), 0);
        rng_t coordinator = derive_rng(c.seed, stream_coordinator);
        for (std::size_t i = 0; i < c.chi_square_draws; ++i) ++counts[x.sample(coordinator)];
        r.chi_square = chi_square(counts, reg.target);
        r.metrics["sampled_tv"] = tv_distance(empirical_law(counts), reg.target);
        r.metrics["chi_square_statistic"] = r.chi_square->statistic;
        add_check(r, "chi-square on sampled solution (alpha 0.001)", r.chi_square->pass ? 1.0 : 0.0, "==", 1.0);
    }
    finish(r);
}

void run_clustering(const experiment_config& c, report& r) {
    double bta_dev = 0.0, frob_dev = 0.0, bnorm_dev = 0.0;
    for (std::size_t t = 0; t < c.trials; ++t) {
        rng_t rng = derive_rng(c.seed, stream_instance + t);
        const std::size_t k = c.k_values[t % c.k_values.size()];
        const std::size_t d = c.d_values[(t / c.k_values.size()) % c.d_values.size()];
        const gap_sign sign = uniform_below(rng, 2) == 0 ? gap_sign::positive : gap_sign::negative;
        const auto inst = gen_gap_hamming(k, d, sign, rng, c.c1, c.c2);
        const auto cl = build_clustering(inst);

        bta_dev = std::max(bta_dev, std::abs(cl.bta_norm_sq - cl.distance_sq));
        frob_dev = std::max(frob_dev, std::abs(cl.a.squaredNorm() - 2.0));
        const double b_expected = 2.0 * cl.alpha * cl.alpha * static_cast<double>(d);
        bnorm_dev = std::max(bnorm_dev, std::abs(cl.b.squaredNorm() - b_expected) / b_expected);

        session s(cl.layout, c.encoding, c.seed + stream_players + t);
        s.setup_a();
        s.setup_b();
        const auto summary = s.meter_report();
        merge(r.transcript, summary);

        // Worst admissible estimate: off by epsilon towards the threshold.
        const double estimate = cl.distance_sq + (sign == gap_sign::positive ? cl.epsilon : -cl.epsilon);
        const gap_sign decided = decide_clustering(cl, estimate);
        const bool ok = decided == sign && clustering_separates(cl, sign);
        r.trials.push_back({t, to_string(sign), to_string(decided), ok, summary.total_bits,
                            "k=" + std::to_string(k) + " d=" + std::to_string(d) +
                                " dot=" + std::to_string(inst.inner_product())});
    }
    r.metrics["bta_vs_distance_max_deviation"] = bta_dev;
    r.metrics["frobenius_sq_max_deviation"] = frob_dev;
    r.metrics["b_norm_sq_max_rel_deviation"] = bnorm_dev;
    add_check(r, "||b^T A||^2 equals ||p - q||^2", bta_dev, "<=", 1e-10);
    add_check(r, "||A||_F^2 = 2", frob_dev, "<=", 1e-12);
    add_check(r, "||b||^2 = 2 alpha^2 d (relative)", bnorm_dev, "<=", 1e-12);
    finish(r);
    add_check(r, "threshold separates the promise branches", r.accuracy, "==", 1.0);
}

void run_pca_recsys(const experiment_config& c, report& r) {
    double sigma_dev = 0.0;
    std::size_t sigma_wrong = 0, sample_bad = 0, rank_bad = 0, recovery_bad = 0, recsys_wrong = 0;
    for (std::size_t t = 0; t < c.trials; ++t) {
        rng_t rng = derive_rng(c.seed, stream_instance + t);
        const bool want = uniform_below(rng, 2) == 1;
        const auto inst = gen_disjointness(2, c.n, want, rng);
        const auto rec = build_recsys(inst.sets[0], inst.sets[1], c.delta);
        const auto& pca = rec.base;
        const bool truth = pca.intersection.has_value();

        rng_t coordinator = derive_rng(c.seed, stream_coordinator + t);
        const auto pd = decide_pca(pca, coordinator);
        const double expected_sigma = truth ? std::numbers::sqrt2 : 1.0;
        sigma_dev = std::max(sigma_dev, std::abs(pd.sigma - expected_sigma));
        sigma_wrong += pd.intersect_by_sigma == truth ? 0 : 1;
        sample_bad += pd.sample_consistent && pd.intersect_by_sample == truth ? 0 : 1;

        rank_bad += rec.rank == (truth ? 1u : 0u) ? 0 : 1;
        const auto rd = decide_recsys(rec, coordinator);
        recsys_wrong += rd.intersect == truth ? 0 : 1;
        if (rec.rank == 1 && !(rd.column && pca.intersection && *rd.column == *pca.intersection)) ++recovery_bad;

        session s(pca.layout, c.encoding, c.seed + stream_players + t);
        s.setup_a();
        const auto summary = s.meter_report();
        merge(r.transcript, summary);
        const bool ok = pd.intersect_by_sigma == truth && rd.intersect == truth && pd.sample_consistent;
        r.trials.push_back({t, truth ? "intersect" : "disjoint", pd.intersect_by_sigma ? "intersect" : "disjoint",
                            ok, summary.total_bits,
                            "sigma=" + fmt(pd.sigma) + " rank=" + std::to_string(rec.rank) +
                                (rd.column ? " column=" + std::to_string(*rd.column) : std::string())});
    }
    r.metrics["sigma_max_deviation"] = sigma_dev;
    r.metrics["pca_sigma_decision_errors"] = static_cast<double>(sigma_wrong);
    r.metrics["pca_sample_errors"] = static_cast<double>(sample_bad);
    r.metrics["recsys_rank_errors"] = static_cast<double>(rank_bad);
    r.metrics["recsys_recovery_errors"] = static_cast<double>(recovery_bad);
    r.metrics["recsys_decision_errors"] = static_cast<double>(recsys_wrong);
    add_check(r, "sigma in {1, sqrt 2} matching truth", sigma_dev, "<=", 1e-9);
    add_check(r, "PCA sigma decisions wrong", static_cast<double>(sigma_wrong), "==", 0.0);
    add_check(r, "PCA singular-vector samples outside the allowed set", static_cast<double>(sample_bad), "==", 0.0);
    add_check(r, "rank of A_{>=delta} differs from truth", static_cast<double>(rank_bad), "==", 0.0);
    add_check(r, "rank-1 cases without the intersection column", static_cast<double>(recovery_bad), "==", 0.0);
    add_check(r, "recommendation decisions wrong", static_cast<double>(recsys_wrong), "==", 0.0);
    finish(r);
}

void run_hamiltonian(const experiment_config& c, report& r) {
    double identity = 0.0, spectral = 0.0, frob = 0.0, law_dev = 0.0;
    std::size_t index = 0;

    const auto check_one = [&](const hamiltonian_construction& h, bool full) {
        identity = std::max(identity, identity_error(h));
        frob = std::max(frob, std::abs(h.a.squaredNorm() - hamiltonian_frobenius_sq(h.n)));
        if (full) {
            const Eigen::SelfAdjointEigenSolver<rmatrix> eig(h.a, Eigen::EigenvaluesOnly);
            spectral = std::max(spectral, std::abs(eig.eigenvalues().cwiseAbs().maxCoeff() - 1.0));
            law_dev = std::max(law_dev, max_abs_deviation(evolved_law(h), dsp_distribution(h.f, h.g)));
        }
    };

    const auto record = [&](std::size_t n, std::size_t count, const char* how, const function_pair& first,
                            double before) {
        const auto h = build_hamiltonian(first);
        session s(h.layout, c.encoding, c.seed + stream_players + n);
        s.setup_a();
        s.setup_b();
        const auto summary = s.meter_report();
        merge(r.transcript, summary);
        const bool ok = identity <= 1e-8 && before <= 1e-8;
        r.trials.push_back({index++, "D_f H D_f", ok ? "match" : "mismatch", ok, summary.total_bits,
                            "n=" + std::to_string(n) + " functions=" + std::to_string(count) + " " + how});
    };

    for (std::size_t n = 1; n <= c.exhaustive_max; ++n) {
        rng_t rng = derive_rng(c.seed, stream_instance + n);
        const std::uint64_t count = 1ULL << (1ULL << n);
        const double before = identity;
        function_pair first;
        for (std::uint64_t mask = 0; mask < count; ++mask) {
            const function_pair pair{n, function_from_mask(n, mask), random_function(n, rng)};
            // Spectrum and law are checked on a sample; the identity on every f.
            check_one(build_hamiltonian(pair), mask % 64 == 0);
            if (mask == 0) first = pair;
        }
        record(n, count, "(all)", first, before);
    }
    for (std::size_t n : c.random_sizes) {
        rng_t rng = derive_rng(c.seed, stream_workload + n);
        const double before = identity;
        function_pair first;
        for (std::size_t i = 0; i < c.random_count; ++i) {
            const auto pair = gen_function_pair(n, rng);
            check_one(build_hamiltonian(pair), true);
            if (i == 0) first = pair;
        }
        if (c.random_count > 0) record(n, c.random_count, "(random)", first, before);
    }
    r.metrics["identity_max_frobenius_error"] = identity;
    r.metrics["spectral_norm_max_deviation"] = spectral;
    r.metrics["frobenius_sq_max_deviation"] = frob;
    r.metrics["evolved_law_max_deviation"] = law_dev;
    add_check(r, "||e^{iAt} - D_f H D_f||_F", identity, "<=", 1e-8);
    add_check(r, "||A|| = 1", spectral, "<=", 1e-9);
    add_check(r, "||A||_F^2 = 2^{n-2}(n+1)/n", frob, "<=", 1e-6);
    add_check(r, "l2 law of e^{iAt} v equals dsp_distribution", law_dev, "<=", 1e-9);
    finish(r);
}

// ---------------------------------------------------------------------------
// Oracle checks for the verify suite

std::vector<check_result> oracle_checks(std::uint64_t seed) {
    report r;
    rng_t rng = derive_rng(seed, stream_instance);
    std::normal_distribution<double> gauss;
    const auto random_matrix = [&](Eigen::Index m, Eigen::Index n, Eigen::Index rank) {
        rmatrix l(m, rank), rt(rank, n);
        for (Eigen::Index i = 0; i < l.size(); ++i) l.data()[i] = gauss(rng);
        for (Eigen::Index i = 0; i < rt.size(); ++i) rt.data()[i] = gauss(rng);
        return rmatrix(l * rt);
    };

    double mp = 0.0, recon = 0.0, ortho = 0.0, residual = 0.0;
    std::size_t kappa_bad = 0;
    for (int t = 0; t < 20; ++t) {
        const rmatrix a = random_matrix(20, 12, t % 2 == 0 ? 12 : 7);
        const rmatrix p = pseudoinverse(a);
        mp = std::max({mp, (a * p * a - a).cwiseAbs().maxCoeff(), (p * a * p - p).cwiseAbs().maxCoeff(),
                       ((a * p).transpose() - a * p).cwiseAbs().maxCoeff(),
                       ((p * a).transpose() - p * a).cwiseAbs().maxCoeff()});
        const auto f = svd(a);
        recon = std::max(recon, (a - f.reconstruct()).norm() / a.norm());
        const auto r_ = static_cast<Eigen::Index>(f.rank());
        ortho = std::max({ortho, (f.u.transpose() * f.u - rmatrix::Identity(r_, r_)).cwiseAbs().maxCoeff(),
                          (f.v.transpose() * f.v - rmatrix::Identity(r_, r_)).cwiseAbs().maxCoeff()});
        rvector b(20);
        for (auto& x : b) x = gauss(rng);
        const rvector x = pinv_solve(a, b);
        residual = std::max(residual, (a.transpose() * (a * x - b)).cwiseAbs().maxCoeff());
        const auto pr = params(a, b);
        if (pr.kappa_f < std::max(pr.kappa, std::sqrt(static_cast<double>(pr.rank))) * (1.0 - 1e-12)) ++kappa_bad;
    }
    add_check(r, "Moore-Penrose identities", mp, "<=", 1e-8);
    add_check(r, "SVD reconstruction (relative)", recon, "<=", 1e-9);
    add_check(r, "SVD orthonormality", ortho, "<=", 1e-10);
    add_check(r, "normal equations residual", residual, "<=", 1e-8);
    add_check(r, "kappa_F >= max(kappa, sqrt rank) violations", static_cast<double>(kappa_bad), "==", 0.0);

    double parseval = 0.0;
    for (std::size_t n = 1; n <= 10; ++n) {
        const auto pair = gen_function_pair(n, rng);
        const auto p = dsp_distribution(pair.f, pair.g);
        double total = 0.0;
        for (double x : p) total += x;
        parseval = std::max(parseval, std::abs(total - 1.0));
    }
    add_check(r, "dsp_distribution sums to 1", parseval, "<=", 1e-10);

    double involution = 0.0, dense = 0.0;
    for (std::size_t n = 1; n <= 6; ++n) {
        rvector v(1 << n);
        for (auto& x : v) x = gauss(rng);
        involution = std::max(involution, (hadamard_apply(n, hadamard_apply(n, v)) - v).cwiseAbs().maxCoeff());
        dense = std::max(dense, (hadamard_apply(n, v) - hadamard_matrix(n) * v).cwiseAbs().maxCoeff());
    }
    add_check(r, "Hadamard transform is an involution", involution, "<=", 1e-10);
    add_check(r, "fast Hadamard matches dense product", dense, "<=", 1e-10);

    double roundtrip = 0.0;
    for (int t = 0; t < 10; ++t) {
        cmatrix h(16, 16);
        for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = scalar(gauss(rng), gauss(rng));
        h = (h + h.adjoint()).eval() / 2.0;
        const double time = gauss(rng);
        roundtrip = std::max(roundtrip,
                             (expm(h, time) * expm(h, -time) - cmatrix::Identity(16, 16)).cwiseAbs().maxCoeff());
    }
    add_check(r, "e^{iAt} e^{-iAt} = I", roundtrip, "<=", 1e-9);
    return r.checks;
}

} // namespace

// ---------------------------------------------------------------------------
// Public interface

const std::vector<std::string>& known_reductions() {
    static const std::vector<std::string> names = {"protocol_exactness", "bit_cost",   "oversampling",
                                                   "sparse_regression",  "dense_regression", "clustering",
                                                   "pca_recsys",         "hamiltonian"};
    return names;
}

experiment_config default_config(const std::string& reduction, std::uint64_t seed) {
    const auto& names = known_reductions();
    if (std::find(names.begin(), names.end(), reduction) == names.end())
        throw config_error("/reduction", "unknown reduction '" + reduction + "'");
    experiment_config c;
    c.reduction = reduction;
    c.name = reduction;
    c.seed = seed;
    if (reduction == "protocol_exactness") c.trials = 50;
    if (reduction == "oversampling") {
        c.trials = 1000;
        c.max_rows = 32;
    }
    if (reduction == "sparse_regression") c.trials = 200;
    if (reduction == "clustering") c.trials = 500;
    if (reduction == "pca_recsys") c.trials = 200;
    if (reduction == "dense_regression") {
        c.exhaustive_max = 3;
        c.random_count = 20;
    }
    if (reduction == "hamiltonian") {
        c.exhaustive_max = 4;
        c.random_count = 100;
    }
    if (reduction == "bit_cost") {
        c.max_rows = 64;
        c.max_cols = 64;
    }
    return c;
}

experiment_config parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error("", std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("", "must be a JSON object");
    if (!j.contains("reduction") || !j["reduction"].is_string())
        throw config_error("/reduction", "is required and must be a string");
    if (!j.contains("seed")) throw config_error("/seed", "is required");

    const auto reduction = j["reduction"].get<std::string>();
    experiment_config c = default_config(reduction, 0);
    for (const auto& [key, value] : j.items()) {
        if (key == "reduction") continue;
        const auto it = std::find_if(fields().begin(), fields().end(), [&](const field& f) { return key == f.name; });
        if (it == fields().end()) throw config_error("/" + key, "unknown field");
        if (!field_applies(*it, reduction))
            throw config_error("/" + key, "not used by reduction '" + reduction + "'");
        it->read(value, c, "/" + key);
    }
    try {
        c.encoding.validate();
    } catch (const error& e) {
        throw config_error("/encoding", e.what());
    }
    validate(c);
    return c;
}

experiment_config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("", "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

bool report::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const check_result& c) { return c.pass; });
}

double report::metric(const std::string& key) const {
    const auto it = metrics.find(key);
    if (it == metrics.end()) throw invalid_argument("report: no metric '" + key + "'");
    return it->second;
}

std::string report::to_json() const {
    json j;
    j["schema_version"] = report_schema_version;
    j["name"] = config.name;
    j["reduction"] = config.reduction;
    j["seed"] = config.seed;
    j["config"] = config_to_json(config);
    j["passed"] = passed();
    j["accuracy"] = accuracy;
    j["bits"] = {{"mean", bits_mean}, {"max", bits_max}};
    j["metrics"] = json::object();
    for (const auto& [k, v] : metrics) j["metrics"][k] = v;
    j["checks"] = json::array();
    for (const auto& c : checks)
        j["checks"].push_back(
            {{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"bound", c.bound}, {"pass", c.pass}});
    if (chi_square)
        j["chi_square"] = {{"statistic", chi_square->statistic},
                           {"degrees_of_freedom", chi_square->degrees_of_freedom},
                           {"critical_value", chi_square->critical_value},
                           {"retained_buckets", chi_square->retained_buckets},
                           {"significance", chi_square_significance},
                           {"pass", chi_square->pass}};
    if (fit) j["fit"] = {{"intercept", fit->intercept}, {"slope", fit->slope}, {"r_squared", fit->r_squared}};
    json t;
    t["total_bits"] = transcript.total_bits;
    t["setup_bits"] = transcript.setup_bits;
    t["access_bits"] = transcript.access_bits;
    t["messages"] = transcript.messages;
    t["rounds"] = transcript.rounds;
    t["by_kind"] = json::object();
    for (const auto& [kind, kt] : transcript.by_kind) t["by_kind"][kind] = {{"messages", kt.messages}, {"bits", kt.bits}};
    j["transcript"] = t;
    j["trials"] = json::array();
    for (const auto& tr : trials)
        j["trials"].push_back({{"index", tr.index},
                               {"truth", tr.truth},
                               {"decision", tr.decision},
                               {"correct", tr.correct},
                               {"bits", tr.bits},
                               {"detail", tr.detail}});
    return j.dump(2) + "\n";
}

std::string report::to_csv() const {
    std::ostringstream out;
    out << "key,value\n";
    out << "schema_version," << report_schema_version << '\n';
    out << "name," << config.name << '\n';
    out << "reduction," << config.reduction << '\n';
    out << "seed," << config.seed << '\n';
    out << "trials," << trials.size() << '\n';
    out << "accuracy," << fmt_exact(accuracy) << '\n';
    out << "bits_mean," << fmt_exact(bits_mean) << '\n';
    out << "bits_max," << bits_max << '\n';
    out << "transcript_total_bits," << transcript.total_bits << '\n';
    for (const auto& [k, v] : metrics) out << "metric:" << k << ',' << fmt_exact(v) << '\n';
    for (const auto& c : checks) {
        std::string name = c.name;
        std::replace(name.begin(), name.end(), ',', ';');
        out << "check:" << name << ',' << (c.pass ? "pass" : "fail") << '\n';
    }
    out << "passed," << (passed() ? "true" : "false") << '\n';
    return out.str();
}

report run(const experiment_config& config) {
    validate(config);
    config.encoding.validate();
    const auto start = std::chrono::steady_clock::now();
    report r;
    r.config = config;
    const auto& red = config.reduction;
    if (red == "protocol_exactness") run_protocol_exactness(config, r);
    else if (red == "bit_cost") run_bit_cost(config, r);
    else if (red == "oversampling") run_oversampling(config, r);
    else if (red == "sparse_regression") run_sparse_regression(config, r);
    else if (red == "dense_regression") run_dense_regression(config, r);
    else if (red == "clustering") run_clustering(config, r);
    else if (red == "pca_recsys") run_pca_recsys(config, r);
    else if (red == "hamiltonian") run_hamiltonian(config, r);
    else throw config_error("/reduction", "unknown reduction '" + red + "'");
    finish(r);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<std::filesystem::path> write_report(const report& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto csv = dir / (r.config.name + ".csv");
    const auto js = dir / (r.config.name + ".json");
    std::ofstream(csv, std::ios::binary) << r.to_csv();
    std::ofstream(js, std::ios::binary) << r.to_json();
    return {csv, js};
}

std::vector<check_result> verify_suite(const std::string& suite, std::uint64_t seed) {
    std::vector<check_result> out;
    const auto add = [&](experiment_config c) {
        const report r = run(c);
        for (auto check : r.checks) {
            check.name = c.reduction + ": " + check.name;
            out.push_back(std::move(check));
        }
    };
    if (suite == "protocols") {
        auto p = default_config("protocol_exactness", seed);
        p.trials = 10;
        p.max_rows = 128;
        p.max_cols = 128;
        add(p);
        auto b = default_config("bit_cost", seed);
        b.sweep = {10, 200, 10};
        add(b);
        auto o = default_config("oversampling", seed);
        o.trials = 100;
        add(o);
    } else if (suite == "reductions") {
        auto s = default_config("sparse_regression", seed);
        s.trials = 50;
        add(s);
        auto d = default_config("dense_regression", seed);
        d.exhaustive_max = 2;
        d.n_max = 6;
        d.random_count = 5;
        d.params_n_max = 8;
        d.chi_square_draws = 20000;
        add(d);
        auto c = default_config("clustering", seed);
        c.trials = 60;
        add(c);
        auto p = default_config("pca_recsys", seed);
        p.trials = 50;
        add(p);
        auto h = default_config("hamiltonian", seed);
        h.exhaustive_max = 3;
        h.random_sizes = {6};
        h.random_count = 10;
        add(h);
    } else if (suite == "oracle") {
        out = oracle_checks(seed);
    } else {
        throw invalid_argument("verify: unknown suite '" + suite + "'");
    }
    return out;
}

report fit_bits(const std::string& workload, const t_sweep& sweep, std::uint64_t seed, const encoding_spec& enc) {
    experiment_config c = default_config("bit_cost", seed);
    c.name = "fit_bits_" + workload;
    c.workload = workload;
    c.sweep = sweep;
    c.encoding = enc;
    if (workload == "clustering") c.k = 3;
    if (workload == "dense_regression" || workload == "hamiltonian") c.n = 6;
    try {
        validate(c);
    } catch (const config_error& e) {
        throw invalid_argument(std::string("fit_bits: ") + e.what());
    }
    return run(c);
}

} // namespace sqcomm

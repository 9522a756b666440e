#include "sqcomm/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <json.hpp>

#include "sqcomm/errors.hpp"

namespace sqcomm {

namespace {

std::size_t weight(const bit_string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), std::uint8_t{1}));
}

std::size_t min_weight(std::size_t n) { return (n + 3) / 4; }
std::size_t max_weight(std::size_t n) { return 3 * n / 4; }

std::size_t uniform_in(rng_t& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform_below(rng, hi - lo + 1));
}

// Uniform subset of the given size, by a partial Fisher-Yates shuffle.
std::vector<std::size_t> choose(std::vector<std::size_t> pool, std::size_t count, rng_t& rng) {
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

} // namespace

// ---------------------------------------------------------------------------
// Set-Disjointness

std::vector<intersection> find_intersections(const disjointness_instance& inst) {
    std::vector<intersection> out;
    for (std::size_t j = 1; j < inst.sets.size(); ++j)
        for (std::size_t l = 0; l < inst.n; ++l)
            if (inst.sets[0][l] == 1 && inst.sets[j][l] == 1) out.push_back({j, l});
    return out;
}

void verify(const disjointness_instance& inst) {
    if (inst.sets.size() != inst.k) throw promise_violation("disjointness: expected k strings");
    for (std::size_t j = 0; j < inst.k; ++j) {
        const auto& s = inst.sets[j];
        if (s.size() != inst.n) throw promise_violation("disjointness: string length differs from n");
        if (std::any_of(s.begin(), s.end(), [](std::uint8_t x) { return x > 1; }))
            throw promise_violation("disjointness: entries must be 0 or 1");
        const std::size_t w = weight(s);
        if (w < min_weight(inst.n) || w > max_weight(inst.n))
            throw promise_violation("disjointness: player " + std::to_string(j) + " has weight " +
                                    std::to_string(w) + " outside [n/4, 3n/4]");
    }
    const auto found = find_intersections(inst);
    if (found.size() > 1) throw promise_violation("disjointness: more than one intersection");
    const std::optional<intersection> actual =
        found.empty() ? std::nullopt : std::optional<intersection>(found.front());
    if (actual != inst.truth) throw promise_violation("disjointness: recorded truth is wrong");
}

disjointness_instance gen_disjointness(std::size_t k, std::size_t n, bool want_intersection, rng_t& rng) {
    if (k < 2) throw invalid_argument("gen_disjointness: need k >= 2");
    if (n < 8) throw invalid_argument("gen_disjointness: need n >= 8");
    const std::size_t lo = min_weight(n), hi = max_weight(n);

    disjointness_instance inst;
    inst.k = k;
    inst.n = n;
    inst.sets.assign(k, bit_string(n, 0));

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto first = choose(all, uniform_in(rng, lo, hi), rng);
    for (std::size_t l : first) inst.sets[0][l] = 1;

    // Other players draw inside the complement of T_0, so no pair intersects
    // unless planted. |complement| >= n - 3n/4 >= n/4 keeps every weight legal.
    std::vector<std::size_t> complement;
    for (std::size_t l = 0; l < n; ++l)
        if (inst.sets[0][l] == 0) complement.push_back(l);

    if (want_intersection) {
        inst.truth = intersection{1 + static_cast<std::size_t>(uniform_below(rng, k - 1)),
                                  first[static_cast<std::size_t>(uniform_below(rng, first.size()))]};
    }
    for (std::size_t j = 1; j < k; ++j) {
        const bool planted = inst.truth && inst.truth->player == j;
        const std::size_t room = complement.size() + (planted ? 1 : 0);
        const std::size_t w = uniform_in(rng, lo, std::min(hi, room));
        const auto picks = choose(complement, planted ? w - 1 : w, rng);
        for (std::size_t l : picks) inst.sets[j][l] = 1;
        if (planted) inst.sets[j][inst.truth->coordinate] = 1;
    }
    verify(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// Gap-Hamming

const char* to_string(gap_sign s) { return s == gap_sign::positive ? "+" : "-"; }

sign_vector gap_hamming_instance::combined() const {
    sign_vector t(d, 0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t c = 0; c < d; ++c) t[c] += strings[i][c];
    return t;
}

long long gap_hamming_instance::inner_product() const {
    const sign_vector t = combined();
    long long dot = 0;
    for (std::size_t c = 0; c < d; ++c) dot += static_cast<long long>(t[c]) * strings[k][c];
    return dot;
}

void verify(const gap_hamming_instance& inst) {
    if (inst.k % 2 == 0) throw promise_violation("gap_hamming: k must be odd");
    if (inst.strings.size() != inst.k + 1) throw promise_violation("gap_hamming: expected k+1 strings");
    for (const auto& s : inst.strings) {
        if (s.size() != inst.d) throw promise_violation("gap_hamming: string length differs from d");
        if (std::any_of(s.begin(), s.end(), [](int x) { return x != 1 && x != -1; }))
            throw promise_violation("gap_hamming: entries must be +-1");
    }
    const sign_vector t = inst.combined();
    if (std::any_of(t.begin(), t.end(), [](int x) { return x != 1 && x != -1; }))
        throw promise_violation("gap_hamming: the first k strings do not sum to a sign vector");
    const double dot = static_cast<double>(inst.inner_product());
    const double edge = inst.c1 * std::sqrt(static_cast<double>(inst.d));
    const bool ok = inst.sign == gap_sign::positive ? dot >= edge : dot <= -edge;
    if (!ok) throw promise_violation("gap_hamming: inner product outside the promised branch");
}

gap_hamming_instance gen_gap_hamming(std::size_t k, std::size_t d, gap_sign sign, rng_t& rng, double c1,
                                     double c2) {
    if (k % 2 == 0) throw invalid_argument("gen_gap_hamming: k must be odd");
    if (d == 0) throw invalid_argument("gen_gap_hamming: d must be positive");
    if (!(c1 > 0.0 && c1 <= c2)) throw invalid_argument("gen_gap_hamming: need 0 < c1 <= c2");

    // Attainable inner products are -d, -d+2, ..., d.
    const double root = std::sqrt(static_cast<double>(d));
    const auto di = static_cast<long long>(d);
    long long lo = static_cast<long long>(std::ceil(c1 * root - 1e-9));
    long long hi = std::min(static_cast<long long>(std::floor(c2 * root + 1e-9)), di);
    if ((lo - di) % 2 != 0) ++lo;
    if ((hi - di) % 2 != 0) --hi;
    if (lo > hi) throw infeasible_promise("gen_gap_hamming: no attainable inner product in the band");
    if (sign == gap_sign::negative) {
        std::swap(lo, hi);
        lo = -lo;
        hi = -hi;
    }

    gap_hamming_instance inst;
    inst.k = k;
    inst.d = d;
    inst.sign = sign;
    inst.c1 = c1;
    inst.c2 = c2;

    sign_vector t(d), x(d);
    for (auto& v : t) v = uniform_below(rng, 2) == 0 ? 1 : -1;
    for (auto& v : x) v = uniform_below(rng, 2) == 0 ? 1 : -1;
    long long dot = 0;
    for (std::size_t c = 0; c < d; ++c) dot += t[c] * x[c];

    // Each flip moves the inner product by 2 towards the band.
    while (dot < lo || dot > hi) {
        const int want_agree = dot < lo ? 1 : 0;
        std::vector<std::size_t> candidates;
        for (std::size_t c = 0; c < d; ++c)
            if ((t[c] == x[c]) != static_cast<bool>(want_agree)) candidates.push_back(c);
        const std::size_t c = candidates[static_cast<std::size_t>(uniform_below(rng, candidates.size()))];
        x[c] = -x[c];
        dot += want_agree ? 2 : -2;
    }

    // Split T coordinatewise: (k+1)/2 players carry t_c and (k-1)/2 carry -t_c.
    inst.strings.assign(k + 1, sign_vector(d, 0));
    std::vector<std::size_t> players(k);
    std::iota(players.begin(), players.end(), std::size_t{0});
    for (std::size_t c = 0; c < d; ++c) {
        const auto with = choose(players, (k + 1) / 2, rng);
        for (std::size_t i = 0; i < k; ++i) inst.strings[i][c] = -t[c];
        for (std::size_t i : with) inst.strings[i][c] = t[c];
    }
    inst.strings[k] = x;
    verify(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// Function pairs

void verify(const function_pair& pair) {
    if (pair.n >= 31) throw bad_dimension("function_pair: n too large");
    const std::size_t size = std::size_t{1} << pair.n;
    if (pair.f.size() != size || pair.g.size() != size)
        throw bad_dimension("function_pair: f and g must have 2^n entries");
    const auto sign = [](int x) { return x == 1 || x == -1; };
    if (!std::all_of(pair.f.begin(), pair.f.end(), sign) || !std::all_of(pair.g.begin(), pair.g.end(), sign))
        throw invalid_argument("function_pair: entries must be +-1");
}

sign_vector function_from_mask(std::size_t n, std::uint64_t mask) {
    if (n > 6) throw bad_dimension("function_from_mask: n must be at most 6");
    const std::size_t size = std::size_t{1} << n;
    sign_vector f(size);
    for (std::size_t x = 0; x < size; ++x) f[x] = ((mask >> x) & 1U) ? -1 : 1;
    return f;
}

sign_vector random_function(std::size_t n, rng_t& rng) {
    if (n >= 31) throw bad_dimension("random_function: n too large");
    sign_vector f(std::size_t{1} << n);
    for (auto& v : f) v = uniform_below(rng, 2) == 0 ? 1 : -1;
    return f;
}

function_pair gen_function_pair(std::size_t n, rng_t& rng) {
    function_pair p{n, random_function(n, rng), {}};
    p.g = random_function(n, rng);
    return p;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using json = nlohmann::ordered_json;

json parse_object(const std::string& text, const char* type) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw invalid_argument(std::string("instance JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("type", "") != type)
        throw invalid_argument(std::string("instance JSON: expected type '") + type + "'");
    return j;
}

template <class T>
T field(const json& j, const char* name) {
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& e) {
        throw invalid_argument(std::string("instance JSON: field '") + name + "': " + e.what());
    }
}

} // namespace

std::string encode_bits(const bit_string& bits) {
    using namespace boost::archive::iterators;
    using encoder = base64_from_binary<transform_width<std::string::const_iterator, 6, 8>>;
    std::string bytes((bits.size() + 7) / 8, '\0');
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (0x80 >> (i % 8)));
    std::string out(encoder(bytes.cbegin()), encoder(bytes.cend()));
    out.append((3 - bytes.size() % 3) % 3, '=');
    return out;
}

bit_string decode_bits(const std::string& text, std::size_t length) {
    using namespace boost::archive::iterators;
    using decoder = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
    std::string body = text;
    const std::size_t pad = body.size() - std::min(body.size(), body.find_last_not_of('=') + 1);
    body.erase(body.size() - pad);
    std::string bytes;
    try {
        bytes.assign(decoder(body.cbegin()), decoder(body.cend()));
    } catch (const std::exception&) {
        throw invalid_argument("decode_bits: malformed base64");
    }
    if (bytes.size() < (length + 7) / 8) throw invalid_argument("decode_bits: too few bytes");
    bit_string bits(length);
    for (std::size_t i = 0; i < length; ++i)
        bits[i] = (static_cast<unsigned char>(bytes[i / 8]) >> (7 - i % 8)) & 1U;
    return bits;
}

std::string to_json(const disjointness_instance& inst) {
    json j;
    j["type"] = "disjointness";
    j["k"] = inst.k;
    j["n"] = inst.n;
    j["sets"] = json::array();
    for (const auto& s : inst.sets) j["sets"].push_back(encode_bits(s));
    if (inst.truth)
        j["truth"] = {{"player", inst.truth->player}, {"coordinate", inst.truth->coordinate}};
    else
        j["truth"] = nullptr;
    return j.dump();
}

disjointness_instance disjointness_from_json(const std::string& text) {
    const json j = parse_object(text, "disjointness");
    disjointness_instance inst;
    inst.k = field<std::size_t>(j, "k");
    inst.n = field<std::size_t>(j, "n");
    for (const auto& s : field<std::vector<std::string>>(j, "sets")) inst.sets.push_back(decode_bits(s, inst.n));
    if (j.contains("truth") && !j["truth"].is_null())
        inst.truth = intersection{field<std::size_t>(j["truth"], "player"),
                                  field<std::size_t>(j["truth"], "coordinate")};
    verify(inst);
    return inst;
}

std::string to_json(const gap_hamming_instance& inst) {
    json j;
    j["type"] = "gap_hamming";
    j["k"] = inst.k;
    j["d"] = inst.d;
    j["sign"] = to_string(inst.sign);
    j["c1"] = inst.c1;
    j["c2"] = inst.c2;
    j["strings"] = inst.strings;
    return j.dump();
}

gap_hamming_instance gap_hamming_from_json(const std::string& text) {
    const json j = parse_object(text, "gap_hamming");
    gap_hamming_instance inst;
    inst.k = field<std::size_t>(j, "k");
    inst.d = field<std::size_t>(j, "d");
    const auto sign = field<std::string>(j, "sign");
    if (sign != "+" && sign != "-") throw invalid_argument("instance JSON: sign must be '+' or '-'");
    inst.sign = sign == "+" ? gap_sign::positive : gap_sign::negative;
    inst.c1 = field<double>(j, "c1");
    inst.c2 = field<double>(j, "c2");
    inst.strings = field<std::vector<sign_vector>>(j, "strings");
    verify(inst);
    return inst;
}

std::string to_json(const function_pair& pair) {
    json j;
    j["type"] = "function_pair";
    j["n"] = pair.n;
    j["f"] = pair.f;
    j["g"] = pair.g;
    return j.dump();
}

function_pair function_pair_from_json(const std::string& text) {
    const json j = parse_object(text, "function_pair");
    function_pair p{field<std::size_t>(j, "n"), field<sign_vector>(j, "f"), field<sign_vector>(j, "g")};
    verify(p);
    return p;
}

} // namespace sqcomm

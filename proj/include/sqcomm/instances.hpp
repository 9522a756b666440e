#pragma once

// Promise-respecting hard instances for the reductions. Players and
// coordinates are 0-based here: player 0 holds T_1 in one-based notation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqcomm/types.hpp"

namespace sqcomm {

using bit_string = std::vector<std::uint8_t>; // entries 0 or 1
using sign_vector = std::vector<int>;         // entries +1 or -1

// ---------------------------------------------------------------------------
// k-player Set-Disjointness

struct intersection {
    std::size_t player = 0;     // in 1..k-1
    std::size_t coordinate = 0; // in 0..n-1
    bool operator==(const intersection&) const = default;
};

struct disjointness_instance {
    std::size_t k = 0;
    std::size_t n = 0;
    std::vector<bit_string> sets; // k strings of length n
    std::optional<intersection> truth;
};

/// Every (j, l) with T_0l = T_jl = 1, j >= 1.
std::vector<intersection> find_intersections(const disjointness_instance& inst);

/// Throws promise_violation unless every weight lies in [n/4, 3n/4], at most
/// one intersecting pair exists, and truth records it.
void verify(const disjointness_instance& inst);

/// Throws invalid_argument unless n >= 8 and k >= 2. With want_intersection,
/// exactly one pair is planted at a uniformly random player and coordinate.
disjointness_instance gen_disjointness(std::size_t k, std::size_t n, bool want_intersection, rng_t& rng);

// ---------------------------------------------------------------------------
// k-Gap-Hamming

enum class gap_sign { positive, negative };

const char* to_string(gap_sign s);

struct gap_hamming_instance {
    std::size_t k = 0;
    std::size_t d = 0;
    std::vector<sign_vector> strings; // k+1 strings; the last is T_{k+1}
    gap_sign sign = gap_sign::positive;
    double c1 = 1.0;
    double c2 = 2.0;

    /// T = sum of the first k strings.
    sign_vector combined() const;
    /// T . T_{k+1}
    long long inner_product() const;
};

/// Throws promise_violation unless the first k strings sum to a sign vector
/// and |T . T_{k+1}| >= c1 sqrt(d) with the recorded sign.
void verify(const gap_hamming_instance& inst);

/// Draws T and T_{k+1}, flips coordinates of T_{k+1} until T . T_{k+1} lies in
/// [c1 sqrt(d), c2 sqrt(d)] (negated for the negative sign), then splits T into
/// k sign vectors. Throws invalid_argument for even k or c1 > c2, and
/// infeasible_promise when the band holds no attainable inner product.
gap_hamming_instance gen_gap_hamming(std::size_t k, std::size_t d, gap_sign sign, rng_t& rng,
                                     double c1 = 1.0, double c2 = 2.0);

// ---------------------------------------------------------------------------
// Boolean function pairs for the distributed sampling problem

struct function_pair {
    std::size_t n = 0; // qubits; f and g have 2^n entries
    sign_vector f;
    sign_vector g;
};

/// Throws bad_dimension or invalid_argument on malformed input.
void verify(const function_pair& pair);

/// The function whose x-th value is -1 iff bit x of mask is set (n <= 6 so
/// the mask fits).
sign_vector function_from_mask(std::size_t n, std::uint64_t mask);
sign_vector random_function(std::size_t n, rng_t& rng);
function_pair gen_function_pair(std::size_t n, rng_t& rng);

// ---------------------------------------------------------------------------
// JSON serialization: bit strings as base64 of MSB-first packed bytes, sign
// vectors as arrays of +-1.

std::string to_json(const disjointness_instance& inst);
std::string to_json(const gap_hamming_instance& inst);
std::string to_json(const function_pair& pair);

disjointness_instance disjointness_from_json(const std::string& text);
gap_hamming_instance gap_hamming_from_json(const std::string& text);
function_pair function_pair_from_json(const std::string& text);

std::string encode_bits(const bit_string& bits);
bit_string decode_bits(const std::string& text, std::size_t length);

} // namespace sqcomm

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace sqcomm {

using scalar = std::complex<double>;

using rmatrix = Eigen::MatrixXd;
using rvector = Eigen::VectorXd;
using cmatrix = Eigen::MatrixXcd;
using cvector = Eigen::VectorXcd;

/// Random stream used everywhere. State is always owned by the caller.
using rng_t = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(rng_t& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased integer in [0, n).
inline std::uint64_t uniform_below(rng_t& rng, std::uint64_t n) {
    const std::uint64_t limit = rng_t::max() - rng_t::max() % n;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return draw % n;
}

/// Fresh stream derived from a base seed and a stream label.
inline rng_t derive_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return rng_t(seq);
}

} // namespace sqcomm

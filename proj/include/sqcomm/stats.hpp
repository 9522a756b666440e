#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sqcomm {

struct chi_square_result {
    double statistic = 0.0;
    std::size_t degrees_of_freedom = 0;
    double critical_value = 0.0;
    std::size_t retained_buckets = 0; // after pooling
    bool pass = true;
};

inline constexpr double chi_square_significance = 0.001;

/// Pearson goodness of fit. Buckets whose expected count is below 5 are pooled
/// into one bucket, which is merged into the smallest retained bucket if it is
/// still below 5. Throws too_few_samples when fewer than 5 draws are given,
/// dimension_mismatch on unequal lengths.
chi_square_result chi_square(std::span<const std::uint64_t> counts, std::span<const double> expected,
                             double significance = chi_square_significance);

/// (1/2) sum |p_i - q_i|. Throws dimension_mismatch on unequal lengths and
/// invalid_argument unless each input sums to 1 within 1e-9.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// max_i |p_i - q_i|; throws dimension_mismatch on unequal lengths.
double max_abs_deviation(std::span<const double> p, std::span<const double> q);

std::vector<double> empirical_law(std::span<const std::uint64_t> counts);

struct linear_fit_result {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares of y on x. Needs at least two distinct x.
linear_fit_result linear_fit(std::span<const double> x, std::span<const double> y);

} // namespace sqcomm

#include "sqcomm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "sqcomm/errors.hpp"

namespace sqcomm {

chi_square_result chi_square(std::span<const std::uint64_t> counts, std::span<const double> expected,
                             double significance) {
    if (counts.size() != expected.size())
        throw dimension_mismatch("chi_square: counts and probabilities differ in length");
    if (!(significance > 0.0 && significance < 1.0))
        throw invalid_argument("chi_square: significance must lie in (0, 1)");
    const double draws = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    if (draws < 5.0) throw too_few_samples("chi_square: need at least 5 draws");

    struct bucket {
        double observed = 0.0;
        double expected = 0.0;
    };
    std::vector<bucket> kept;
    bucket pool;
    chi_square_result out;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double e = expected[i] * draws;
        const auto o = static_cast<double>(counts[i]);
        if (e == 0.0 && o > 0.0) {
            // A draw the law forbids.
            out.statistic = std::numeric_limits<double>::infinity();
            out.pass = false;
        }
        if (e >= 5.0)
            kept.push_back({o, e});
        else {
            pool.observed += o;
            pool.expected += e;
        }
    }
    if (pool.expected >= 5.0)
        kept.push_back(pool);
    else if (pool.expected > 0.0 || pool.observed > 0.0) {
        if (kept.empty())
            kept.push_back(pool);
        else {
            auto smallest = std::min_element(kept.begin(), kept.end(),
                                             [](const bucket& a, const bucket& b) { return a.expected < b.expected; });
            smallest->observed += pool.observed;
            smallest->expected += pool.expected;
        }
    }

    out.retained_buckets = kept.size();
    if (!out.pass) return out;
    if (kept.size() < 2) return out; // one bucket: nothing to test

    for (const auto& b : kept) out.statistic += (b.observed - b.expected) * (b.observed - b.expected) / b.expected;
    out.degrees_of_freedom = kept.size() - 1;
    const boost::math::chi_squared dist(static_cast<double>(out.degrees_of_freedom));
    out.critical_value = boost::math::quantile(boost::math::complement(dist, significance));
    out.pass = out.statistic <= out.critical_value;
    return out;
}

namespace {

void check_law(std::span<const double> p, const char* name) {
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9)
        throw invalid_argument(std::string("tv_distance: ") + name + " sums to " + std::to_string(total));
}

} // namespace

double tv_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw dimension_mismatch("tv_distance: lengths differ");
    check_law(p, "p");
    check_law(q, "q");
    double l1 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) l1 += std::abs(p[i] - q[i]);
    return std::min(1.0, 0.5 * l1);
}

double max_abs_deviation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw dimension_mismatch("max_abs_deviation: lengths differ");
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(p[i] - q[i]));
    return worst;
}

std::vector<double> empirical_law(std::span<const std::uint64_t> counts) {
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    if (total == 0.0) throw too_few_samples("empirical_law: no draws");
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(counts[i]) / total;
    return p;
}

linear_fit_result linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw dimension_mismatch("linear_fit: lengths differ");
    if (x.size() < 2) throw too_few_samples("linear_fit: need at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw invalid_argument("linear_fit: x values are all equal");
    linear_fit_result fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

} // namespace sqcomm

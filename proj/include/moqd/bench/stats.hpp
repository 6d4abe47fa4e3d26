#ifndef MOQD_BENCH_STATS_HPP
#define MOQD_BENCH_STATS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace moqd::bench {

/// Largest sample size (after dropping zero differences) handled by exact enumeration.
inline constexpr std::size_t wilcoxon_exact_limit = 12;

struct WilcoxonResult {
    double p_value = 1.0;
    double w_plus = 0.0;   ///< sum of ranks of positive differences
    std::size_t n = 0;     ///< non-zero differences
    bool exact = false;
};

/// Two-sided paired test on a - b. Zero differences are dropped and tied magnitudes get
/// midranks. Throws DimensionError on unequal lengths and InsufficientDataError below 5 pairs.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Forces one method regardless of n; used to cross-check the two.
double wilcoxon_exact_p(std::span<const double> differences);
double wilcoxon_normal_p(std::span<const double> differences);

/// Step-down adjusted p-values, returned in input order. Throws std::invalid_argument for p outside [0, 1].
std::vector<double> holm_bonferroni(std::span<const double> p_values);

/// Linear-interpolation quantile (the usual "type 7"); q in [0, 1].
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

} // namespace moqd::bench

#endif

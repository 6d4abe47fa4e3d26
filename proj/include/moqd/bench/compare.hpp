#ifndef MOQD_BENCH_COMPARE_HPP
#define MOQD_BENCH_COMPARE_HPP

#include <moqd/bench/runs.hpp>

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace moqd::bench {

/// Two groups do not cover the same seeds.
class PairingError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Per-evaluation-count quantile over replications as (evaluations, value) pairs.
/// Runs must share their evaluation grid; throws ParseError otherwise.
std::vector<std::pair<double, double>> quantile_curve(const RunGroup& group, const std::string& metric, double q);
std::vector<std::pair<double, double>> median_curve(const RunGroup& group, const std::string& metric);

/// First evaluation count at which the curve reaches `target`, interpolating linearly between
/// rows; empty if it never does.
std::optional<double> evaluations_to_reach(const std::vector<std::pair<double, double>>& curve, double target);

/// Evaluations `other` needs divided by evaluations `reference` needs to reach the lower of the
/// two final medians. Above 1 means the reference is more data efficient.
std::optional<double> efficiency_ratio(const RunGroup& reference, const RunGroup& other, const std::string& metric);

struct GroupSummary {
    std::string label;
    std::size_t n = 0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
};

struct Comparison {
    std::string reference;
    std::string other;
    double median_difference = 0.0; ///< median(reference - other) over seeds
    std::optional<double> p_value;  ///< empty when the test is not applicable (fewer than 5 pairs)
    std::optional<double> p_adjusted;
    std::optional<double> efficiency_ratio;
};

struct ComparisonTable {
    std::string metric;
    std::vector<GroupSummary> groups;
    std::vector<Comparison> comparisons; ///< reference (first group) against each other group
};

/// Final values are paired by seed; throws PairingError listing seeds missing from either side.
ComparisonTable compare_groups(const std::vector<RunGroup>& groups, const std::string& metric);

void write_comparison_text(std::ostream& out, const ComparisonTable& table);
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);

} // namespace moqd::bench

#endif

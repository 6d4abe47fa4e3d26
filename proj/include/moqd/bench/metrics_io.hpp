#ifndef MOQD_BENCH_METRICS_IO_HPP
#define MOQD_BENCH_METRICS_IO_HPP

#include <moqd/algorithms.hpp>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace moqd::bench {

inline constexpr std::string_view metrics_header = "evals,moqd_score,global_hv,max_sum,coverage,seconds";

/// Metric columns usable by plot and compare.
inline constexpr std::string_view metric_names[] = {"moqd_score", "global_hv", "max_sum", "coverage"};

/// An empty max_sum (empty archive) is written as an empty field.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> rows);
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRecord> rows);

/// Throws ParseError on a foreign header, malformed rows or non-increasing evaluation counts.
std::vector<MetricsRecord> read_metrics_csv(std::istream& in);
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

/// Value of a named metric column; throws ConfigError(field "metric") for unknown names.
/// A missing max_sum reads as NaN.
double metric_value(const MetricsRecord& row, std::string_view name);

/// printf "%.17g", the round-trip format used for every double written by the harness.
std::string format_double(double x);

} // namespace moqd::bench

#endif

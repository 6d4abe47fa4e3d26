#ifndef MOQD_BENCH_RUNS_HPP
#define MOQD_BENCH_RUNS_HPP

#include <moqd/bench/config.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace moqd::bench {

inline constexpr const char* metrics_file = "metrics.csv";
inline constexpr const char* archive_file = "archive.jsonl";
inline constexpr const char* manifest_file = "manifest.json";
inline constexpr const char* config_file = "config.toml";

/// Version string baked in at configure time (git describe, or "unknown").
const char* version();

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string algorithm;
    std::string environment;
    std::vector<double> reference_point;
    std::size_t evaluations = 0;
    std::string version;
    std::vector<std::string> outputs; ///< file names relative to the run directory
};

std::string manifest_json(const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

/// Runs the configured algorithm with `seed` and writes metrics.csv, archive.jsonl, manifest.json
/// and a copy of the configuration text into `out_dir` (created if needed).
RunManifest execute_run(RunConfig cfg, const std::string& config_text, std::uint64_t seed,
                        const std::filesystem::path& out_dir, const ProgressCallback& progress = {});

/// One completed run as read back from disk.
struct RunRecord {
    std::filesystem::path dir;
    std::uint64_t seed = 0;
    std::string algorithm; ///< empty without a manifest
    std::vector<MetricsRecord> metrics;
};

/// Replications of one configuration.
struct RunGroup {
    std::string label;
    std::string algorithm;
    std::vector<RunRecord> runs;
};

/// Accepts a metrics.csv file, a run directory, or a directory whose subdirectories are runs.
/// Runs without a manifest get their position as seed. Throws ParseError for malformed metrics.
RunGroup load_group(const std::filesystem::path& path);

} // namespace moqd::bench

#endif

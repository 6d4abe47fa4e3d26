#ifndef MOQD_BENCH_CONFIG_HPP
#define MOQD_BENCH_CONFIG_HPP

#include <moqd/algorithms.hpp>
#include <moqd/envs.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace moqd::bench {

struct EnvConfig {
    std::string name = "pointwalker"; ///< "pointwalker" or "bisphere"
    EnvSpec pointwalker;
    std::vector<int> policy_hidden = {64, 64};
    std::size_t genotype_size = 8; ///< bisphere
    double init_range = 1.5;       ///< bisphere
};

struct RunConfig {
    AlgorithmConfig algorithm;
    EnvConfig env;
};

/// Parses and validates a TOML run configuration. Unknown sections or keys and invalid values
/// raise ConfigError naming the dotted field; TOML syntax errors raise ParseError.
RunConfig parse_run_config(std::string_view toml_text);
RunConfig load_run_config(const std::filesystem::path& path);

std::unique_ptr<Task> make_task(const EnvConfig& env);

/// Canonical JSON of the resolved configuration (sorted keys, run.seed excluded).
std::string canonical_json(const RunConfig& cfg);
/// 64-bit FNV-1a of canonical_json as 16 hex digits; replicates of one configuration share it.
std::string config_hash(const RunConfig& cfg);

} // namespace moqd::bench

#endif

#ifndef MOQD_ALGORITHMS_DETAIL_HPP
#define MOQD_ALGORITHMS_DETAIL_HPP

#include <moqd/algorithms.hpp>

#include <chrono>

namespace moqd::detail {

/// Stream ids for derive_seed.
enum Stream : std::uint64_t {
    init_stream = 1,
    main_stream = 2,
    archive_stream = 3,
    passive_stream = 4,
    pg_stream = 5,
    critic_stream = 100, // + objective index
};

/// Collects metric rows on the configured cadence.
class Recorder {
public:
    Recorder(const AlgorithmConfig& cfg, const ProgressCallback& progress);

    /// iteration 0 is the initialization row; the last iteration is always recorded.
    void record(int iteration, std::size_t evaluations, const MoqdArchive& archive);
    std::vector<MetricsRecord> take() { return std::move(_rows); }

private:
    const AlgorithmConfig& _cfg;
    const ProgressCallback& _progress;
    std::chrono::steady_clock::time_point _start;
    std::vector<MetricsRecord> _rows;
};

/// Evaluates genotypes in order, assigning consecutive ids; transitions go to `buffer` when given.
std::vector<Solution> evaluate_batch(const Task& task, std::vector<Genotype> genotypes, std::uint64_t& next_id,
                                     ReplayBuffer* buffer);

/// Objectives that receive gradient offspring once defaults are applied.
std::vector<std::size_t> resolved_pg_objectives(const AlgorithmConfig& cfg, const Task& task);

MoqdArchive make_archive(const AlgorithmConfig& cfg, const Task& task, std::size_t cells, ReplacementPolicy policy,
                         std::uint64_t seed);

ReplayBuffer make_buffer(const AlgorithmConfig& cfg, const Task& task);

} // namespace moqd::detail

#endif

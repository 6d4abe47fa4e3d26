#ifndef MOQD_ALGORITHMS_HPP
#define MOQD_ALGORITHMS_HPP

#include <moqd/archive.hpp>
#include <moqd/envs.hpp>
#include <moqd/neuro.hpp>
#include <moqd/variation.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace moqd {

enum class AlgorithmId {
    mome_pgx,
    mome,
    mome_crowding,
    mo_pga,
    mo_pga_only_forward,
    mo_pga_only_energy,
    pga_me,
    nsga2,
    spea2,
};

const char* to_string(AlgorithmId id);
/// Throws ConfigError naming `run.algorithm` for unknown ids.
AlgorithmId algorithm_from_string(const std::string& name);
std::vector<AlgorithmId> all_algorithms();

struct ArchiveParams {
    std::size_t cells = 32;          ///< k
    std::size_t front_capacity = 10; ///< P
    std::size_t cvt_samples = 50000;
    std::uint64_t cvt_seed = 7;
};

struct AlgorithmConfig {
    AlgorithmId algorithm = AlgorithmId::mome_pgx;
    int iterations = 200;       ///< N
    std::size_t batch_size = 32; ///< B
    ArchiveParams archive;
    VariationConfig variation;
    Td3Params td3;
    /// Objectives receiving policy-gradient offspring. Unset means the algorithm default
    /// (all objectives for MOME-PGX and MO-PGA, the named one for the single-objective ablations).
    std::optional<std::vector<std::size_t>> pg_objectives;
    /// MOME-PGX only: crowding-based selection and replacement.
    bool crowding = true;
    /// PGA-ME only: evaluate the greedy actor as one of the gradient offspring.
    bool inject_actor = true;
    std::uint64_t seed = 0;
    int metrics_every = 1;
    ReferencePoint reference_point;
    /// Record elapsed seconds in metrics; off keeps metric files reproducible byte for byte.
    bool wall_clock = false;

    void validate(const Task& task) const;
};

struct MetricsRecord {
    std::size_t evaluations = 0;
    ArchiveMetrics metrics;
    double seconds = 0.0;
};

struct RunResult {
    /// Main archive for MOQD algorithms, passive archive for the others.
    MoqdArchive archive;
    std::vector<MetricsRecord> metrics;
    std::size_t evaluations = 0;
};

using ProgressCallback = std::function<void(const MetricsRecord&)>;

/// Dispatches on cfg.algorithm.
RunResult run_algorithm(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress = {});

RunResult run_mome_pgx(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress = {});
RunResult run_mome(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress = {});
RunResult run_mome_crowding(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress = {});
RunResult run_mo_pga(const AlgorithmConfig& cfg, const Task& task, std::vector<std::size_t> pg_objectives,
                     const ProgressCallback& progress = {});
RunResult run_pga_me(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress = {});
RunResult run_nsga2(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress = {});
RunResult run_spea2(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress = {});

/// CVT centroids memoized per (bounds, k, samples, seed) for the lifetime of the process.
const Centroids& shared_centroids(const Bounds& bounds, std::size_t k, std::size_t samples, std::uint64_t seed);

/// The B random genotypes every algorithm starts from for a given seed.
std::vector<Genotype> initial_pool(const Task& task, std::size_t batch, std::uint64_t seed);

/// Independent stream seed derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// ---------------------------------------------------------------------------
// MAP-Elites grid used by PGA-ME (single occupant per cell, scalar fitness)
// ---------------------------------------------------------------------------

class MapElitesGrid {
public:
    explicit MapElitesGrid(Centroids centroids);

    /// Adds to an empty cell or replaces a strictly lower-fitness occupant.
    bool insert(Solution s, double fitness);
    std::size_t cell_index(std::span<const double> descriptor) const;
    const std::optional<Solution>& cell(std::size_t i) const { return _cells.at(i); }
    std::optional<double> fitness(std::size_t i) const { return _fitness.at(i); }
    std::size_t occupied_cells() const;
    std::vector<Solution> solutions() const;
    /// Uniform over occupied cells, with replacement.
    std::vector<const Solution*> sample(std::size_t batch, std::mt19937_64& rng) const;

private:
    Centroids _centroids;
    std::vector<std::optional<Solution>> _cells;
    std::vector<std::optional<double>> _fitness;
};

// ---------------------------------------------------------------------------
// NSGA-II and SPEA2 selection primitives
// ---------------------------------------------------------------------------

/// Classic NSGA-II crowding: range-normalized cuboid sides summed over objectives,
/// extreme points infinite. Any objective count.
std::vector<double> nsga2_crowding(std::span<const ScoreVector> front);

/// Keeps whole fronts in rank order and splits the last one by descending crowding
/// (ties by ascending id). Output has exactly `target` members.
std::vector<Solution> nsga2_survival(std::span<const Solution> combined, std::size_t target);

/// F = R + D for every member of population ++ archive (in that order). Lower is better;
/// F < 1 exactly for non-dominated members.
std::vector<double> spea2_fitness(std::span<const Solution> population, std::span<const Solution> archive);

/// Keeps every F < 1 member, truncating by nearest-neighbour distances when over-full and
/// padding with the best dominated members when under-full.
std::vector<Solution> spea2_environmental_selection(std::span<const Solution> combined, std::size_t target);

} // namespace moqd

#endif

#include "detail.hpp"

#include <moqd/errors.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace moqd {

namespace {

struct AlgorithmName {
    AlgorithmId id;
    const char* name;
};

constexpr AlgorithmName algorithm_names[] = {
    {AlgorithmId::mome_pgx, "mome_pgx"},
    {AlgorithmId::mome, "mome"},
    {AlgorithmId::mome_crowding, "mome_crowding"},
    {AlgorithmId::mo_pga, "mo_pga"},
    {AlgorithmId::mo_pga_only_forward, "mo_pga_only_forward"},
    {AlgorithmId::mo_pga_only_energy, "mo_pga_only_energy"},
    {AlgorithmId::pga_me, "pga_me"},
    {AlgorithmId::nsga2, "nsga2"},
    {AlgorithmId::spea2, "spea2"},
};

bool uses_gradients_by_default(AlgorithmId id)
{
    switch (id) {
    case AlgorithmId::mome_pgx:
    case AlgorithmId::mo_pga:
    case AlgorithmId::mo_pga_only_forward:
    case AlgorithmId::mo_pga_only_energy:
    case AlgorithmId::pga_me:
        return true;
    default:
        return false;
    }
}

} // namespace

const char* to_string(AlgorithmId id)
{
    for (const auto& entry : algorithm_names)
        if (entry.id == id)
            return entry.name;
    return "unknown";
}

AlgorithmId algorithm_from_string(const std::string& name)
{
    for (const auto& entry : algorithm_names)
        if (name == entry.name)
            return entry.id;
    throw ConfigError("unknown algorithm id '" + name + "'", "run.algorithm");
}

std::vector<AlgorithmId> all_algorithms()
{
    std::vector<AlgorithmId> out;
    for (const auto& entry : algorithm_names)
        out.push_back(entry.id);
    return out;
}

void AlgorithmConfig::validate(const Task& task) const
{
    if (iterations < 1)
        throw ConfigError("must be at least 1", "run.iterations");
    if (batch_size < 2)
        throw ConfigError("must be at least 2", "run.batch_size");
    if (metrics_every < 1)
        throw ConfigError("must be at least 1", "run.metrics_every");
    if (archive.cells < 1)
        throw ConfigError("must be at least 1", "archive.cells");
    if (archive.front_capacity < 1)
        throw ConfigError("must be at least 1", "archive.front_capacity");
    variation.validate();
    td3.validate();

    if (reference_point.size() != task.objective_count())
        throw ConfigError("needs one entry per objective (" + std::to_string(task.objective_count()) + ")",
                          "env.reference_point");
    for (double r : reference_point)
        if (!std::isfinite(r))
            throw ConfigError("entries must be finite", "env.reference_point");

    if (pg_objectives) {
        if (!uses_gradients_by_default(algorithm) && !pg_objectives->empty())
            throw ConfigError(std::string("algorithm '") + to_string(algorithm) + "' has no gradient variation",
                              "algorithm.pg_objectives");
        for (auto j : *pg_objectives)
            if (j >= task.objective_count())
                throw ConfigError("objective index " + std::to_string(j) + " out of range", "algorithm.pg_objectives");
    }
    if (!detail::resolved_pg_objectives(*this, task).empty() && !task.is_mdp())
        throw ConfigError("policy-gradient variation needs a sequential task; set algorithm.pg_objectives = []",
                          "algorithm.pg_objectives");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    // splitmix64 over the pair
    std::uint64_t z = seed * 0x9e3779b97f4a7c15ULL + stream * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

const Centroids& shared_centroids(const Bounds& bounds, std::size_t k, std::size_t samples, std::uint64_t seed)
{
    using Key = std::tuple<std::vector<std::array<double, 2>>, std::size_t, std::size_t, std::uint64_t>;
    static std::mutex mutex;
    static std::map<Key, Centroids> cache;

    std::lock_guard lock(mutex);
    Key key{bounds.ranges, k, samples, seed};
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(std::move(key), cvt_centroids(bounds, k, samples, seed)).first;
    return it->second;
}

std::vector<Genotype> initial_pool(const Task& task, std::size_t batch, std::uint64_t seed)
{
    std::mt19937_64 rng(derive_seed(seed, detail::init_stream));
    std::vector<Genotype> pool;
    pool.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i)
        pool.push_back(task.random_genotype(rng));
    return pool;
}

RunResult run_algorithm(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress)
{
    switch (cfg.algorithm) {
    case AlgorithmId::mome_pgx:
        return run_mome_pgx(cfg, task, progress);
    case AlgorithmId::mome:
        return run_mome(cfg, task, progress);
    case AlgorithmId::mome_crowding:
        return run_mome_crowding(cfg, task, progress);
    case AlgorithmId::mo_pga:
    case AlgorithmId::mo_pga_only_forward:
    case AlgorithmId::mo_pga_only_energy:
        return run_mo_pga(cfg, task, detail::resolved_pg_objectives(cfg, task), progress);
    case AlgorithmId::pga_me:
        return run_pga_me(cfg, task, progress);
    case AlgorithmId::nsga2:
        return run_nsga2(cfg, task, progress);
    case AlgorithmId::spea2:
        return run_spea2(cfg, task, progress);
    }
    throw ConfigError("unhandled algorithm", "run.algorithm");
}

namespace detail {

Recorder::Recorder(const AlgorithmConfig& cfg, const ProgressCallback& progress)
    : _cfg(cfg), _progress(progress), _start(std::chrono::steady_clock::now())
{
}

void Recorder::record(int iteration, std::size_t evaluations, const MoqdArchive& archive)
{
    if (iteration != 0 && iteration != _cfg.iterations && iteration % _cfg.metrics_every != 0)
        return;
    MetricsRecord row;
    row.evaluations = evaluations;
    row.metrics = archive.metrics(_cfg.reference_point);
    if (_cfg.wall_clock)
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - _start).count();
    if (_progress)
        _progress(row);
    _rows.push_back(row);
}

std::vector<Solution> evaluate_batch(const Task& task, std::vector<Genotype> genotypes, std::uint64_t& next_id,
                                     ReplayBuffer* buffer)
{
    std::vector<Solution> out;
    out.reserve(genotypes.size());
    for (auto& g : genotypes) {
        auto e = task.evaluate(g);
        if (buffer)
            buffer->push(e.transitions);
        out.push_back(Solution{std::move(g), std::move(e.scores), std::move(e.descriptor), next_id++});
    }
    return out;
}

std::vector<std::size_t> resolved_pg_objectives(const AlgorithmConfig& cfg, const Task& task)
{
    if (cfg.pg_objectives)
        return *cfg.pg_objectives;
    std::vector<std::size_t> all(task.objective_count());
    for (std::size_t j = 0; j < all.size(); ++j)
        all[j] = j;
    switch (cfg.algorithm) {
    case AlgorithmId::mome_pgx:
    case AlgorithmId::mo_pga:
        return all;
    case AlgorithmId::mo_pga_only_forward:
        return {1}; // velocity
    case AlgorithmId::mo_pga_only_energy:
        return {0};
    case AlgorithmId::pga_me:
        return {0}; // a single critic on the summed reward
    default:
        return {};
    }
}

MoqdArchive make_archive(const AlgorithmConfig& cfg, const Task& task, std::size_t cells, ReplacementPolicy policy,
                         std::uint64_t seed)
{
    const auto samples = std::max(cfg.archive.cvt_samples, 10 * cells);
    return MoqdArchive(shared_centroids(task.descriptor_bounds(), cells, samples, cfg.archive.cvt_seed),
                       cfg.archive.front_capacity, policy, seed);
}

ReplayBuffer make_buffer(const AlgorithmConfig& cfg, const Task& task)
{
    return ReplayBuffer(cfg.td3.buffer_size, task.state_dim(), task.action_dim(),
                        static_cast<int>(task.objective_count()));
}

} // namespace detail
} // namespace moqd

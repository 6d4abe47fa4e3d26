// PGA-ME on the summed objectives, observed through a passive MOQD archive.

#include "detail.hpp"

#include <moqd/errors.hpp>

#include <algorithm>
#include <numeric>

namespace moqd {

MapElitesGrid::MapElitesGrid(Centroids centroids)
    : _centroids(std::move(centroids)), _cells(_centroids.size()), _fitness(_centroids.size())
{
}

std::size_t MapElitesGrid::cell_index(std::span<const double> descriptor) const
{
    const auto clipped = _centroids.bounds.clip(descriptor);
    return nearest_centroid(_centroids, clipped);
}

bool MapElitesGrid::insert(Solution s, double fitness)
{
    const auto i = cell_index(s.descriptor);
    if (_fitness[i] && !(fitness > *_fitness[i]))
        return false;
    _cells[i] = std::move(s);
    _fitness[i] = fitness;
    return true;
}

std::size_t MapElitesGrid::occupied_cells() const
{
    return static_cast<std::size_t>(
        std::count_if(_cells.begin(), _cells.end(), [](const auto& c) { return c.has_value(); }));
}

std::vector<Solution> MapElitesGrid::solutions() const
{
    std::vector<Solution> out;
    for (const auto& c : _cells)
        if (c)
            out.push_back(*c);
    return out;
}

std::vector<const Solution*> MapElitesGrid::sample(std::size_t batch, std::mt19937_64& rng) const
{
    std::vector<const Solution*> occupied;
    for (const auto& c : _cells)
        if (c)
            occupied.push_back(&*c);
    if (occupied.empty())
        throw EmptyArchiveError("cannot sample from an empty grid");
    std::uniform_int_distribution<std::size_t> pick(0, occupied.size() - 1);
    std::vector<const Solution*> out(batch);
    for (auto& p : out)
        p = occupied[pick(rng)];
    return out;
}

RunResult run_pga_me(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress)
{
    auto c = cfg;
    c.algorithm = AlgorithmId::pga_me;
    c.validate(task);
    const bool use_pg = !detail::resolved_pg_objectives(c, task).empty();

    const std::size_t grid_cells = c.archive.cells * c.archive.front_capacity;
    MapElitesGrid grid(shared_centroids(task.descriptor_bounds(), grid_cells,
                                        std::max(c.archive.cvt_samples, 10 * grid_cells), c.archive.cvt_seed));
    auto passive = detail::make_archive(c, task, c.archive.cells, ReplacementPolicy::random,
                                        derive_seed(c.seed, detail::passive_stream));
    std::mt19937_64 rng(derive_seed(c.seed, detail::main_stream));
    std::mt19937_64 pg_rng(derive_seed(c.seed, detail::pg_stream));

    const auto fitness = [](const Solution& s) { return std::accumulate(s.scores.begin(), s.scores.end(), 0.0); };

    std::optional<ReplayBuffer> buffer;
    std::vector<ObjectiveTrainState> critic;
    if (use_pg) {
        buffer.emplace(detail::make_buffer(c, task));
        critic.push_back(make_train_state(task.policy_spec(), c.td3,
                                          Eigen::VectorXd::Ones(static_cast<Eigen::Index>(task.objective_count())),
                                          derive_seed(c.seed, detail::critic_stream)));
    }
    ReplayBuffer* sink = buffer ? &*buffer : nullptr;

    detail::Recorder recorder(c, progress);
    std::uint64_t next_id = 0;

    const auto absorb = [&](std::vector<Solution> evaluated) {
        for (auto& s : evaluated) {
            const double f = fitness(s);
            grid.insert(std::move(s), f);
        }
        const auto population = grid.solutions();
        passive_insert(passive, population);
    };

    auto initial = detail::evaluate_batch(task, initial_pool(task, c.batch_size, c.seed), next_id, sink);
    if (use_pg)
        train_networks(critic, *buffer, c.td3);
    absorb(std::move(initial));
    recorder.record(0, next_id, passive);

    const auto split = split_batch(c.batch_size, use_pg ? 1 : 0);

    for (int iter = 1; iter <= c.iterations; ++iter) {
        const auto parents = grid.sample(c.batch_size, rng);
        const auto partners = grid.sample(split.ga, rng);

        std::vector<Genotype> offspring;
        offspring.reserve(c.batch_size);
        std::size_t slot = 0;
        for (; slot < split.ga; ++slot)
            offspring.push_back(iso_line_dd(parents[slot]->genotype, partners[slot]->genotype, c.variation, rng));

        if (use_pg) {
            std::size_t pg_slots = split.pg.front();
            if (c.inject_actor && pg_slots > 0) {
                offspring.push_back(flatten(critic.front().actor));
                --pg_slots;
                ++slot;
            }
            for (std::size_t k = 0; k < pg_slots; ++k, ++slot) {
                const auto& x = parents[slot]->genotype;
                try {
                    offspring.push_back(pg_mutate(x, critic.front(), *buffer, c.td3.pg_steps, c.td3.policy_lr,
                                                  c.td3.batch_size, pg_rng));
                }
                catch (const InsufficientDataError&) {
                    const auto y = grid.sample(1, rng);
                    offspring.push_back(iso_line_dd(x, y.front()->genotype, c.variation, rng));
                }
            }
        }

        auto evaluated = detail::evaluate_batch(task, std::move(offspring), next_id, sink);
        if (use_pg)
            train_networks(critic, *buffer, c.td3);
        absorb(std::move(evaluated));
        recorder.record(iter, next_id, passive);
    }

    return RunResult{std::move(passive), recorder.take(), next_id};
}

} // namespace moqd

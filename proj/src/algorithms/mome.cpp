// MOME family: MOME, MOME-Crowding, MO-PGA variants and MOME-PGX share one loop.

#include "detail.hpp"

#include <moqd/errors.hpp>

#include <iostream>

namespace moqd {

namespace {

struct LoopOptions {
    SelectionMode selection = SelectionMode::uniform;
    ReplacementPolicy replacement = ReplacementPolicy::random;
    std::vector<std::size_t> pg_objectives;
};

RunResult run_moqd_loop(const AlgorithmConfig& cfg, const Task& task, const LoopOptions& opt,
                        const ProgressCallback& progress)
{
    cfg.validate(task);
    for (auto j : opt.pg_objectives)
        if (j >= task.objective_count())
            throw ConfigError("objective index out of range", "algorithm.pg_objectives");
    const bool use_pg = !opt.pg_objectives.empty();
    if (use_pg && !task.is_mdp())
        throw ConfigError("policy-gradient variation needs a sequential task", "algorithm.pg_objectives");

    auto archive = detail::make_archive(cfg, task, cfg.archive.cells, opt.replacement,
                                        derive_seed(cfg.seed, detail::archive_stream));
    std::mt19937_64 rng(derive_seed(cfg.seed, detail::main_stream));
    std::mt19937_64 pg_rng(derive_seed(cfg.seed, detail::pg_stream));

    std::optional<ReplayBuffer> buffer;
    std::vector<ObjectiveTrainState> critics;
    if (use_pg) {
        buffer.emplace(detail::make_buffer(cfg, task));
        for (auto j : opt.pg_objectives)
            critics.push_back(make_objective_state(task.policy_spec(), cfg.td3, j, task.objective_count(),
                                                   derive_seed(cfg.seed, detail::critic_stream + j)));
    }
    ReplayBuffer* sink = buffer ? &*buffer : nullptr;

    detail::Recorder recorder(cfg, progress);
    std::uint64_t next_id = 0;

    for (auto& s : detail::evaluate_batch(task, initial_pool(task, cfg.batch_size, cfg.seed), next_id, sink))
        archive.insert(std::move(s));
    if (use_pg)
        train_networks(critics, *buffer, cfg.td3);
    recorder.record(0, next_id, archive);

    const auto split = split_batch(cfg.batch_size, opt.pg_objectives.size());

    for (int iter = 1; iter <= cfg.iterations; ++iter) {
        const auto parents = archive.sample_solutions(cfg.batch_size, rng, opt.selection);
        const auto partners = archive.sample_solutions(split.ga, rng, opt.selection);

        std::vector<Genotype> offspring;
        offspring.reserve(cfg.batch_size);
        std::size_t slot = 0;
        for (; slot < split.ga; ++slot)
            offspring.push_back(iso_line_dd(parents[slot]->genotype, partners[slot]->genotype, cfg.variation, rng));

        for (std::size_t k = 0; k < critics.size(); ++k) {
            for (std::size_t c = 0; c < split.pg[k]; ++c, ++slot) {
                const auto& x = parents[slot]->genotype;
                try {
                    offspring.push_back(pg_mutate(x, critics[k], *buffer, cfg.td3.pg_steps, cfg.td3.policy_lr,
                                                  cfg.td3.batch_size, pg_rng));
                }
                catch (const InsufficientDataError&) {
                    const auto y = archive.sample_solutions(1, rng, opt.selection);
                    offspring.push_back(iso_line_dd(x, y.front()->genotype, cfg.variation, rng));
                }
            }
        }

        auto evaluated = detail::evaluate_batch(task, std::move(offspring), next_id, sink);
        if (use_pg)
            train_networks(critics, *buffer, cfg.td3);
        for (auto& s : evaluated)
            archive.insert(std::move(s));
        recorder.record(iter, next_id, archive);
    }

    return RunResult{std::move(archive), recorder.take(), next_id};
}

} // namespace

RunResult run_mome_pgx(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress)
{
    LoopOptions opt;
    if (cfg.crowding) {
        opt.selection = SelectionMode::crowding;
        opt.replacement = ReplacementPolicy::crowding;
    }
    auto c = cfg;
    c.algorithm = AlgorithmId::mome_pgx;
    opt.pg_objectives = detail::resolved_pg_objectives(c, task);
    return run_moqd_loop(c, task, opt, progress);
}

RunResult run_mome(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress)
{
    auto c = cfg;
    c.algorithm = AlgorithmId::mome;
    return run_moqd_loop(c, task, LoopOptions{}, progress);
}

RunResult run_mome_crowding(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress)
{
    auto c = cfg;
    c.algorithm = AlgorithmId::mome_crowding;
    return run_moqd_loop(c, task, LoopOptions{SelectionMode::crowding, ReplacementPolicy::crowding, {}}, progress);
}

RunResult run_mo_pga(const AlgorithmConfig& cfg, const Task& task, std::vector<std::size_t> pg_objectives,
                     const ProgressCallback& progress)
{
    auto c = cfg;
    if (c.algorithm != AlgorithmId::mo_pga_only_forward && c.algorithm != AlgorithmId::mo_pga_only_energy)
        c.algorithm = AlgorithmId::mo_pga;
    c.pg_objectives = pg_objectives;
    return run_moqd_loop(c, task, LoopOptions{SelectionMode::uniform, ReplacementPolicy::random, std::move(pg_objectives)},
                         progress);
}

} // namespace moqd

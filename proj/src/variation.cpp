#include <moqd/errors.hpp>
#include <moqd/variation.hpp>

#include <algorithm>
#include <iostream>

namespace moqd {

void VariationConfig::validate() const
{
    if (!(iso_sigma >= 0.0))
        throw ConfigError("must be non-negative", "variation.iso_sigma");
    if (!(line_sigma >= 0.0))
        throw ConfigError("must be non-negative", "variation.line_sigma");
    if (genotype_bounds && !((*genotype_bounds)[0] < (*genotype_bounds)[1]))
        throw ConfigError("low must be below high", "variation.genotype_bounds");
}

Genotype iso_line_dd(std::span<const double> x, std::span<const double> y, const VariationConfig& cfg,
                     std::mt19937_64& rng)
{
    if (x.size() != y.size())
        throw DimensionError("parents of length " + std::to_string(x.size()) + " and " + std::to_string(y.size()));

    std::normal_distribution<double> normal(0.0, 1.0);
    const double line = cfg.line_sigma * normal(rng);
    Genotype child(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        child[i] = x[i] + cfg.iso_sigma * normal(rng) + line * (y[i] - x[i]);
        if (cfg.genotype_bounds)
            child[i] = std::clamp(child[i], (*cfg.genotype_bounds)[0], (*cfg.genotype_bounds)[1]);
    }
    return child;
}

Genotype iso_line_dd(std::span<const double> x, std::span<const double> y, const VariationConfig& cfg,
                     std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return iso_line_dd(x, y, cfg, rng);
}

BatchSplit split_batch(std::size_t batch, std::size_t objectives)
{
    BatchSplit split;
    if (objectives == 0) {
        split.ga = batch;
        return split;
    }
    split.ga = (batch + 1) / 2;
    const auto per_objective = (batch - split.ga) / objectives;
    split.pg.assign(objectives, per_objective);
    split.ga = batch - per_objective * objectives;
    if (per_objective == 0) {
        split.pg_starved = true;
        std::cerr << "warning: batch of " << batch << " leaves no policy-gradient offspring for " << objectives
                  << " objectives\n";
    }
    return split;
}

} // namespace moqd

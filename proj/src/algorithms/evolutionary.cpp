// NSGA-II and SPEA2: generational loops observed through a passive MOQD archive.

#include "detail.hpp"

#include <moqd/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace moqd {

namespace {

constexpr double infinity = std::numeric_limits<double>::infinity();

std::vector<ScoreVector> scores_of(std::span<const Solution> population)
{
    std::vector<ScoreVector> out;
    out.reserve(population.size());
    for (const auto& s : population)
        out.push_back(s.scores);
    return out;
}

double euclidean(const ScoreVector& a, const ScoreVector& b)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sum);
}

/// Binary tournament: the first draw wins unless the second is strictly better.
template <class Better>
std::size_t tournament(std::size_t n, std::mt19937_64& rng, Better better)
{
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const auto a = pick(rng);
    const auto b = pick(rng);
    return better(b, a) ? b : a;
}

/// Shared generational loop; `make_comparator` supplies the mating comparator and the survival step.
template <class MakeComparator, class Survive>
RunResult run_generational(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress,
                           MakeComparator make_comparator, Survive survive)
{
    cfg.validate(task);
    const std::size_t capacity = cfg.archive.cells * cfg.archive.front_capacity;
    auto passive = detail::make_archive(cfg, task, cfg.archive.cells, ReplacementPolicy::random,
                                        derive_seed(cfg.seed, detail::passive_stream));
    std::mt19937_64 rng(derive_seed(cfg.seed, detail::main_stream));

    detail::Recorder recorder(cfg, progress);
    std::uint64_t next_id = 0;

    auto population = detail::evaluate_batch(task, initial_pool(task, cfg.batch_size, cfg.seed), next_id, nullptr);
    passive_insert(passive, population);
    recorder.record(0, next_id, passive);

    for (int iter = 1; iter <= cfg.iterations; ++iter) {
        const auto better = make_comparator(std::span<const Solution>(population));
        std::vector<Genotype> offspring;
        offspring.reserve(cfg.batch_size);
        for (std::size_t i = 0; i < cfg.batch_size; ++i) {
            const auto a = tournament(population.size(), rng, better);
            const auto b = tournament(population.size(), rng, better);
            offspring.push_back(iso_line_dd(population[a].genotype, population[b].genotype, cfg.variation, rng));
        }
        auto evaluated = detail::evaluate_batch(task, std::move(offspring), next_id, nullptr);

        std::vector<Solution> combined = std::move(population);
        combined.insert(combined.end(), std::make_move_iterator(evaluated.begin()),
                        std::make_move_iterator(evaluated.end()));
        population = survive(std::span<const Solution>(combined), std::min(capacity, combined.size()));

        passive_insert(passive, population);
        recorder.record(iter, next_id, passive);
    }

    return RunResult{std::move(passive), recorder.take(), next_id};
}

} // namespace

std::vector<double> nsga2_crowding(std::span<const ScoreVector> front)
{
    const std::size_t n = front.size();
    std::vector<double> distance(n, 0.0);
    if (n == 0)
        return distance;
    if (n <= 2) {
        std::fill(distance.begin(), distance.end(), infinity);
        return distance;
    }
    const std::size_t m = front.front().size();
    std::vector<std::size_t> order(n);
    for (std::size_t obj = 0; obj < m; ++obj) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return front[a][obj] < front[b][obj]; });
        const double range = front[order.back()][obj] - front[order.front()][obj];
        distance[order.front()] = infinity;
        distance[order.back()] = infinity;
        if (!(range > 0.0))
            continue;
        for (std::size_t i = 1; i + 1 < n; ++i)
            distance[order[i]] += (front[order[i + 1]][obj] - front[order[i - 1]][obj]) / range;
    }
    return distance;
}

std::vector<Solution> nsga2_survival(std::span<const Solution> combined, std::size_t target)
{
    target = std::min(target, combined.size());
    const auto points = scores_of(combined);
    std::vector<Solution> out;
    out.reserve(target);
    for (const auto& front : non_dominated_sort(points)) {
        if (out.size() == target)
            break;
        if (out.size() + front.size() <= target) {
            for (auto i : front)
                out.push_back(combined[i]);
            continue;
        }
        std::vector<ScoreVector> front_points;
        for (auto i : front)
            front_points.push_back(points[i]);
        const auto crowd = nsga2_crowding(front_points);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (crowd[a] != crowd[b])
                return crowd[a] > crowd[b];
            return combined[front[a]].id < combined[front[b]].id;
        });
        for (std::size_t k = 0; out.size() < target; ++k)
            out.push_back(combined[front[order[k]]]);
    }
    return out;
}

std::vector<double> spea2_fitness(std::span<const Solution> population, std::span<const Solution> archive)
{
    std::vector<ScoreVector> points = scores_of(population);
    for (const auto& s : archive)
        points.push_back(s.scores);
    const std::size_t n = points.size();

    std::vector<double> strength(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && dominates(points[i], points[j]))
                strength[i] += 1.0;

    const auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    std::vector<double> fitness(n, 0.0);
    std::vector<double> distances;
    for (std::size_t i = 0; i < n; ++i) {
        double raw = 0.0;
        distances.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            if (dominates(points[j], points[i]))
                raw += strength[j];
            distances.push_back(euclidean(points[i], points[j]));
        }
        double sigma = 0.0;
        if (!distances.empty()) {
            const auto kth = std::min(k, distances.size()) - 1;
            std::nth_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(kth), distances.end());
            sigma = distances[kth];
        }
        fitness[i] = raw + 1.0 / (sigma + 2.0);
    }
    return fitness;
}

std::vector<Solution> spea2_environmental_selection(std::span<const Solution> combined, std::size_t target)
{
    target = std::min(target, combined.size());
    const auto fitness = spea2_fitness(combined, {});
    std::vector<std::size_t> kept;
    std::vector<std::size_t> dominated;
    for (std::size_t i = 0; i < combined.size(); ++i)
        (fitness[i] < 1.0 ? kept : dominated).push_back(i);

    if (kept.size() < target) {
        std::sort(dominated.begin(), dominated.end(), [&](std::size_t a, std::size_t b) {
            if (fitness[a] != fitness[b])
                return fitness[a] < fitness[b];
            return combined[a].id < combined[b].id;
        });
        kept.insert(kept.end(), dominated.begin(),
                    dominated.begin() + static_cast<std::ptrdiff_t>(target - kept.size()));
    }
    else if (kept.size() > target) {
        // Sorted distances from each survivor to every other survivor.
        const std::size_t n = kept.size();
        std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                dist[a][b] = dist[b][a] = euclidean(combined[kept[a]].scores, combined[kept[b]].scores);
        std::vector<std::vector<double>> sorted(n);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b)
                if (b != a)
                    sorted[a].push_back(dist[a][b]);
            std::sort(sorted[a].begin(), sorted[a].end());
        }
        std::vector<bool> alive(n, true);
        for (std::size_t remaining = n; remaining > target; --remaining) {
            std::size_t victim = n;
            for (std::size_t a = 0; a < n; ++a) {
                if (!alive[a])
                    continue;
                if (victim == n || sorted[a] < sorted[victim] ||
                    (sorted[a] == sorted[victim] && combined[kept[a]].id > combined[kept[victim]].id))
                    victim = a;
            }
            alive[victim] = false;
            for (std::size_t a = 0; a < n; ++a) {
                if (!alive[a])
                    continue;
                auto& row = sorted[a];
                row.erase(std::lower_bound(row.begin(), row.end(), dist[a][victim]));
            }
        }
        std::vector<std::size_t> survivors;
        for (std::size_t a = 0; a < n; ++a)
            if (alive[a])
                survivors.push_back(kept[a]);
        kept = std::move(survivors);
    }

    std::sort(kept.begin(), kept.end());
    std::vector<Solution> out;
    out.reserve(kept.size());
    for (auto i : kept)
        out.push_back(combined[i]);
    return out;
}

RunResult run_nsga2(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress)
{
    auto c = cfg;
    c.algorithm = AlgorithmId::nsga2;
    const auto make_comparator = [](std::span<const Solution> population) {
        const auto points = scores_of(population);
        std::vector<std::size_t> rank(population.size());
        std::vector<double> crowd(population.size());
        const auto fronts = non_dominated_sort(points);
        for (std::size_t r = 0; r < fronts.size(); ++r) {
            std::vector<ScoreVector> front_points;
            for (auto i : fronts[r])
                front_points.push_back(points[i]);
            const auto d = nsga2_crowding(front_points);
            for (std::size_t k = 0; k < fronts[r].size(); ++k) {
                rank[fronts[r][k]] = r;
                crowd[fronts[r][k]] = d[k];
            }
        }
        return [rank = std::move(rank), crowd = std::move(crowd)](std::size_t a, std::size_t b) {
            if (rank[a] != rank[b])
                return rank[a] < rank[b];
            return crowd[a] > crowd[b];
        };
    };
    return run_generational(c, task, progress, make_comparator, nsga2_survival);
}

RunResult run_spea2(const AlgorithmConfig& cfg, const Task& task, const ProgressCallback& progress)
{
    auto c = cfg;
    c.algorithm = AlgorithmId::spea2;
    const auto make_comparator = [](std::span<const Solution> population) {
        return [fitness = spea2_fitness(population, {})](std::size_t a, std::size_t b) {
            return fitness[a] < fitness[b];
        };
    };
    return run_generational(c, task, progress, make_comparator, spea2_environmental_selection);
}

} // namespace moqd

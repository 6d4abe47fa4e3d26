#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <moqd/algorithms.hpp>
#include <moqd/errors.hpp>

#include <cmath>
#include <limits>
#include <set>

using namespace moqd;
using testing::Rng;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::vector<Solution> population(const std::vector<ScoreVector>& scores)
{
    std::vector<Solution> out;
    for (std::size_t i = 0; i < scores.size(); ++i)
        out.push_back(Solution{Genotype{static_cast<double>(i)}, scores[i], Descriptor{0.5, 0.5}, i});
    return out;
}

std::set<std::uint64_t> id_set(const std::vector<Solution>& pop)
{
    std::set<std::uint64_t> out;
    for (const auto& s : pop)
        out.insert(s.id);
    return out;
}

/// A task whose every genotype scores the same.
class FlatTask final : public Task {
public:
    std::string name() const override { return "flat"; }
    bool is_mdp() const override { return false; }
    std::size_t genotype_size() const override { return 3; }
    std::size_t objective_count() const override { return 2; }
    Bounds descriptor_bounds() const override { return Bounds{{{0.0, 1.0}, {0.0, 1.0}}}; }
    Genotype random_genotype(std::mt19937_64& rng) const override
    {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        return {u(rng), u(rng), u(rng)};
    }
    Evaluation evaluate(std::span<const double> g) const override
    {
        return Evaluation{{1.0, 1.0}, {(std::tanh(g[0]) + 1) / 2, (std::tanh(g[1]) + 1) / 2}, {}};
    }
};

PointWalkerTask small_walker()
{
    EnvSpec spec;
    spec.episode_length = 20;
    return PointWalkerTask(spec, {4, 4});
}

AlgorithmConfig small_config(AlgorithmId id, int iterations = 3)
{
    AlgorithmConfig cfg;
    cfg.algorithm = id;
    cfg.iterations = iterations;
    cfg.batch_size = 8;
    cfg.archive.cells = 8;
    cfg.archive.front_capacity = 3;
    cfg.archive.cvt_samples = 2000;
    cfg.td3.critic_hidden = {8, 8};
    cfg.td3.batch_size = 16;
    cfg.td3.critic_steps = 4;
    cfg.td3.pg_steps = 2;
    cfg.reference_point = {-30.0, -10.0};
    cfg.seed = 3;
    return cfg;
}

std::vector<double> scores_series(const RunResult& r)
{
    std::vector<double> out;
    for (const auto& m : r.metrics) {
        out.push_back(static_cast<double>(m.evaluations));
        out.push_back(m.metrics.moqd_score);
        out.push_back(m.metrics.global_hypervolume);
        out.push_back(m.metrics.coverage);
    }
    return out;
}

} // namespace

TEST_CASE("configuration checks")
{
    const auto walker = small_walker();
    auto cfg = small_config(AlgorithmId::mome_pgx);
    CHECK_NOTHROW(cfg.validate(walker));

    auto bad = cfg;
    bad.batch_size = 1;
    CHECK_THROWS_AS(bad.validate(walker), ConfigError);
    bad = cfg;
    bad.iterations = 0;
    CHECK_THROWS_AS(bad.validate(walker), ConfigError);
    bad = cfg;
    bad.reference_point = {0.0};
    CHECK_THROWS_AS(bad.validate(walker), ConfigError);
    bad = cfg;
    bad.pg_objectives = std::vector<std::size_t>{2};
    CHECK_THROWS_AS(bad.validate(walker), ConfigError);
    bad = small_config(AlgorithmId::nsga2);
    bad.pg_objectives = std::vector<std::size_t>{0};
    CHECK_THROWS_AS(bad.validate(walker), ConfigError);

    const BiSphereTask sphere(8);
    CHECK_THROWS_AS(cfg.validate(sphere), ConfigError);
    cfg.pg_objectives = std::vector<std::size_t>{};
    CHECK_NOTHROW(cfg.validate(sphere));
    CHECK_THROWS_AS(run_algorithm(small_config(AlgorithmId::mo_pga), sphere), ConfigError);

    CHECK(algorithm_from_string("mome_pgx") == AlgorithmId::mome_pgx);
    CHECK_THROWS_AS(algorithm_from_string("mome-pgx-2"), ConfigError);
    for (auto id : all_algorithms())
        CHECK(algorithm_from_string(to_string(id)) == id);
}

TEST_CASE("smallest gradient run")
{
    const auto walker = small_walker();
    auto cfg = small_config(AlgorithmId::mome_pgx, 1);
    cfg.batch_size = 4;
    const auto r = run_mome_pgx(cfg, walker);
    CHECK_FALSE(r.archive.empty());
    REQUIRE(r.metrics.size() == 2);
    CHECK(r.metrics[0].evaluations == 4);
    CHECK(r.metrics[1].evaluations == 8);
    CHECK(r.evaluations == 8);
}

TEST_CASE("every algorithm is seeded and spends the same budget")
{
    const auto walker = small_walker();
    for (auto id : all_algorithms()) {
        CAPTURE(to_string(id));
        const auto cfg = small_config(id);
        const auto a = run_algorithm(cfg, walker);
        const auto b = run_algorithm(cfg, walker);
        CHECK(scores_series(a) == scores_series(b));
        CHECK(a.evaluations == cfg.batch_size * (1 + static_cast<std::size_t>(cfg.iterations)));
        REQUIRE(a.metrics.size() == static_cast<std::size_t>(cfg.iterations) + 1);
        for (std::size_t i = 0; i < a.metrics.size(); ++i)
            CHECK(a.metrics[i].evaluations == cfg.batch_size * (i + 1));
        CHECK(a.archive.metrics(cfg.reference_point).coverage > 0.0);

        auto other = cfg;
        other.seed = 4;
        CHECK(scores_series(run_algorithm(other, walker)) != scores_series(a));
    }
}

TEST_CASE("metrics thinning keeps the first and last rows")
{
    const auto walker = small_walker();
    auto cfg = small_config(AlgorithmId::mome, 7);
    cfg.metrics_every = 3;
    const auto r = run_algorithm(cfg, walker);
    std::vector<std::size_t> evals;
    for (const auto& m : r.metrics)
        evals.push_back(m.evaluations);
    CHECK(evals == std::vector<std::size_t>{8, 32, 56, 64});
}

TEST_CASE("disabled gradients reduce to plain MOME")
{
    const auto walker = small_walker();
    const auto base = scores_series(run_mome(small_config(AlgorithmId::mome, 4), walker));
    CHECK(scores_series(run_mo_pga(small_config(AlgorithmId::mo_pga, 4), walker, {})) == base);

    auto pgx = small_config(AlgorithmId::mome_pgx, 4);
    pgx.pg_objectives = std::vector<std::size_t>{};
    pgx.crowding = false;
    CHECK(scores_series(run_mome_pgx(pgx, walker)) == base);

    // gradients on: the trajectory departs
    CHECK(scores_series(run_mo_pga(small_config(AlgorithmId::mo_pga, 4), walker, {1})) != base);
}

TEST_CASE("single-member crowding cells only change to dominating solutions")
{
    MoqdArchive cell(cvt_centroids(Bounds{{{0.0, 1.0}, {0.0, 1.0}}}, 1, 100, 1), 1, ReplacementPolicy::crowding);
    auto pop = population({{1, 1}, {2, 0}, {0, 2}, {1, 1.5}, {0.5, 0.5}});
    CHECK(cell.insert(pop[0]).added);
    CHECK_FALSE(cell.insert(pop[1]).added);
    CHECK_FALSE(cell.insert(pop[2]).added);
    CHECK(cell.insert(pop[3]).added);
    CHECK_FALSE(cell.insert(pop[4]).added);
    REQUIRE(cell.size() == 1);
    CHECK(cell.cell(0)[0].id == 3);

    const auto walker = small_walker();
    auto cfg = small_config(AlgorithmId::mome_crowding, 5);
    cfg.archive.front_capacity = 1;
    const auto r = run_mome_crowding(cfg, walker);
    for (std::size_t c = 0; c < r.archive.cell_count(); ++c)
        CHECK(r.archive.cell(c).size() <= 1);
}

TEST_CASE("elite grid")
{
    Centroids centroids;
    centroids.bounds = Bounds{{{0.0, 1.0}, {0.0, 1.0}}};
    centroids.points = {{0.25, 0.5}, {0.75, 0.5}};
    MapElitesGrid grid(centroids);
    Rng rng(1);
    CHECK_THROWS_AS(grid.sample(1, rng), EmptyArchiveError);

    auto s = population({{1, 2}, {2, 3}, {1, 1}, {0, 0}});
    s[3].descriptor = {0.9, 0.5};
    CHECK(grid.insert(s[0], 3.0));
    CHECK(grid.insert(s[1], 5.0));
    CHECK(grid.cell(0)->id == 1);
    CHECK_FALSE(grid.insert(s[2], 2.0));
    CHECK_FALSE(grid.insert(s[2], 5.0));
    CHECK(*grid.fitness(0) == 5.0);
    CHECK(grid.insert(s[3], -1.0));
    CHECK(grid.occupied_cells() == 2);

    int first = 0;
    for (const auto* p : grid.sample(4000, rng))
        first += p->id == 1 ? 1 : 0;
    CHECK(std::abs(first - 2000) < 200);
}

TEST_CASE("passive coverage equals the grid projected on the coarse cells")
{
    Rng rng(2);
    const Bounds unit{{{0.0, 1.0}, {0.0, 1.0}}};
    const auto coarse = cvt_centroids(unit, 8, 2000, 5);
    MapElitesGrid grid(cvt_centroids(unit, 40, 4000, 6));
    for (std::uint64_t id = 0; id < 300; ++id) {
        Solution s{Genotype{0.0}, testing::real_points(rng, 1, 2, 0.0, 5.0).front(),
                   testing::real_points(rng, 1, 2, 0.0, 1.0).front(), id};
        grid.insert(s, s.scores[0] + s.scores[1]);
    }
    MoqdArchive passive(coarse, 3, ReplacementPolicy::random, 1);
    passive_insert(passive, grid.solutions());
    std::set<std::size_t> projected;
    for (const auto& s : grid.solutions())
        projected.insert(nearest_centroid(coarse, s.descriptor));
    CHECK(passive.occupied_cells() == projected.size());
}

TEST_CASE("cuboid crowding")
{
    const auto d = nsga2_crowding(std::vector<ScoreVector>{{0, 4}, {1, 2}, {3, 1}});
    CHECK(d[0] == inf);
    CHECK(d[2] == inf);
    CHECK(d[1] == doctest::Approx(2.0));
    CHECK(nsga2_crowding(std::vector<ScoreVector>{{1, 1}, {2, 0}}) == std::vector<double>{inf, inf});
}

TEST_CASE("NSGA-II survival examples")
{
    const auto chain = population({{1, 1}, {3, 3}, {2, 2}});
    CHECK(id_set(nsga2_survival(chain, 2)) == std::set<std::uint64_t>{1, 2});

    const auto front = population({{0, 4}, {1, 3}, {2, 2.5}, {4, 0}});
    CHECK(id_set(nsga2_survival(front, 4)) == std::set<std::uint64_t>{0, 1, 2, 3});
    // extremes go first
    CHECK(id_set(nsga2_survival(front, 2)) == std::set<std::uint64_t>{0, 3});
}

TEST_CASE("NSGA-II survival keeps whole better fronts")
{
    Rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = 2 + testing::index(rng, 40);
        const auto pop = population(testing::integer_points(rng, n, 2, 6));
        const auto target = 1 + testing::index(rng, n);
        const auto kept = nsga2_survival(pop, target);
        REQUIRE(kept.size() == target);
        const auto ids = id_set(kept);
        CHECK(ids.size() == target);

        std::vector<std::size_t> rank(n);
        std::vector<ScoreVector> pts;
        for (const auto& s : pop)
            pts.push_back(s.scores);
        auto rest = testing::all_indices(n);
        for (std::size_t r = 0; !rest.empty(); ++r) {
            const auto front = testing::brute_front(pts, rest);
            for (auto i : front)
                rank[i] = r;
            std::erase_if(rest, [&](std::size_t i) { return std::find(front.begin(), front.end(), i) != front.end(); });
        }
        std::size_t worst = 0;
        for (auto id : ids)
            worst = std::max(worst, rank[id]);
        for (std::size_t i = 0; i < n; ++i)
            if (rank[i] < worst)
                CHECK(ids.count(i) == 1);
    }
}

TEST_CASE("strength fitness")
{
    const auto pop = population({{3, 3}, {2, 2}, {1, 1}});
    const auto f = spea2_fitness(pop, std::vector<Solution>{});
    // R = (0, 2, 3); one nearest neighbour at distance sqrt(2) for each point
    const double density = 1.0 / (std::sqrt(2.0) + 2.0);
    CHECK(f[0] == doctest::Approx(0.0 + density));
    CHECK(f[1] == doctest::Approx(2.0 + density));
    CHECK(f[2] == doctest::Approx(3.0 + density));

    // population and archive are treated as one union
    const auto split = spea2_fitness(std::vector<Solution>{pop[0]}, std::vector<Solution>{pop[1], pop[2]});
    CHECK(split == f);

    const auto twins = spea2_fitness(population({{1, 2}, {1, 2}, {0, 0}}), std::vector<Solution>{});
    CHECK(twins[0] == twins[1]);
}

TEST_CASE("strength fitness is below one exactly for non-dominated members")
{
    Rng rng(4);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = 1 + testing::index(rng, 40);
        const auto pts = testing::integer_points(rng, n, 2, 5);
        const auto f = spea2_fitness(population(pts), std::vector<Solution>{});
        const auto front = testing::brute_front(pts, testing::all_indices(n));
        for (std::size_t i = 0; i < n; ++i) {
            const bool nd = std::find(front.begin(), front.end(), i) != front.end();
            CHECK((f[i] < 1.0) == nd);
        }
    }
}

TEST_CASE("environmental selection")
{
    const auto exact = population({{0, 4}, {1, 3}, {4, 0}, {0, 0}});
    CHECK(id_set(spea2_environmental_selection(exact, 3)) == std::set<std::uint64_t>{0, 1, 2});

    // (1,3) and (1.1,2.9) are the tight pair
    const auto tight = population({{0, 4}, {1, 3}, {1.1, 2.9}, {4, 0}});
    const auto kept = id_set(spea2_environmental_selection(tight, 3));
    CHECK(kept.size() == 3);
    CHECK(kept.count(0) == 1);
    CHECK(kept.count(3) == 1);
    CHECK(kept.count(1) + kept.count(2) == 1);

    // padding by ascending fitness: (2,2) beats (1,1)
    const auto thin = population({{3, 3}, {1, 1}, {2, 2}});
    CHECK(id_set(spea2_environmental_selection(thin, 2)) == std::set<std::uint64_t>{0, 2});
}

TEST_CASE("truncation matches distance bookkeeping")
{
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = 3 + testing::index(rng, 12);
        const auto pts = testing::random_front(rng, n, 0.0, 10.0);
        const auto target = 2 + testing::index(rng, n - 2);

        // oracle: repeatedly drop the member whose sorted distance list is lexicographically smallest
        std::vector<std::size_t> alive = testing::all_indices(n);
        while (alive.size() > target) {
            std::vector<std::vector<double>> lists;
            for (auto i : alive) {
                std::vector<double> d;
                for (auto j : alive)
                    if (i != j)
                        d.push_back(std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]));
                std::sort(d.begin(), d.end());
                lists.push_back(d);
            }
            std::size_t victim = 0;
            for (std::size_t a = 1; a < alive.size(); ++a)
                if (lists[a] < lists[victim])
                    victim = a;
            alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(victim));
        }
        const auto kept = id_set(spea2_environmental_selection(population(pts), target));
        CHECK(kept == std::set<std::uint64_t>(alive.begin(), alive.end()));
    }
}

TEST_CASE("baselines on degenerate and small problems")
{
    const FlatTask flat;
    auto cfg = small_config(AlgorithmId::spea2, 4);
    const auto r = run_spea2(cfg, flat);
    CHECK(r.metrics.size() == 5);
    CHECK(r.archive.metrics(cfg.reference_point).coverage > 0.0);

    const BiSphereTask sphere(8);
    auto one = small_config(AlgorithmId::nsga2, 1);
    one.reference_point = {-4.5, -4.5};
    CHECK(run_nsga2(one, sphere).archive.metrics(one.reference_point).coverage > 0.0);
}

TEST_CASE("gradient-free MAP-Elites runs on a function task")
{
    const BiSphereTask sphere(8);
    auto cfg = small_config(AlgorithmId::pga_me, 5);
    cfg.reference_point = {-4.5, -4.5};
    cfg.pg_objectives = std::vector<std::size_t>{};
    const auto r = run_pga_me(cfg, sphere);
    CHECK(r.evaluations == 48);
    CHECK(r.archive.front_capacity() == 3);
    CHECK(r.archive.cell_count() == 8);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <moqd/errors.hpp>
#include <moqd/pareto.hpp>

#include <cmath>
#include <limits>

using namespace moqd;
using testing::Rng;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

/// Area dominated by integer points above an integer reference, counted unit square by unit square.
double grid_area(const std::vector<ScoreVector>& front, const ScoreVector& ref, int hi)
{
    double area = 0.0;
    for (int x = static_cast<int>(ref[0]); x < hi; ++x)
        for (int y = static_cast<int>(ref[1]); y < hi; ++y) {
            const double cx = x + 0.5, cy = y + 0.5;
            for (const auto& p : front)
                if (p[0] >= cx && p[1] >= cy) {
                    area += 1.0;
                    break;
                }
        }
    return area;
}

} // namespace

TEST_CASE("dominance on small examples")
{
    CHECK(dominates(ScoreVector{2, 3}, ScoreVector{1, 3}));
    CHECK_FALSE(dominates(ScoreVector{1, 1}, ScoreVector{1, 1}));
    CHECK_FALSE(dominates(ScoreVector{2, 1}, ScoreVector{1, 2}));
    CHECK_FALSE(dominates(ScoreVector{1, 2}, ScoreVector{2, 1}));
    CHECK_THROWS_AS(dominates(ScoreVector{1, 2}, ScoreVector{1, 2, 3}), DimensionError);
}

TEST_CASE("dominance is irreflexive and antisymmetric")
{
    Rng rng(1);
    for (int trial = 0; trial < 5000; ++trial) {
        const auto pts = testing::integer_points(rng, 2, 1 + testing::index(rng, 4), 3);
        CHECK_FALSE(dominates(pts[0], pts[0]));
        if (dominates(pts[0], pts[1]))
            CHECK_FALSE(dominates(pts[1], pts[0]));
        CHECK(dominates(pts[0], pts[1]) == testing::brute_dominates(pts[0], pts[1]));
    }
}

TEST_CASE("front extraction examples")
{
    const std::vector<ScoreVector> pts = {{1, 3}, {2, 2}, {3, 1}, {1, 1}};
    CHECK(extract_front(pts) == std::vector<std::size_t>{0, 1, 2});
    CHECK(extract_front(std::vector<ScoreVector>{{5, 5}}) == std::vector<std::size_t>{0});
    CHECK(extract_front(std::vector<ScoreVector>{{1, 1}, {1, 1}}) == std::vector<std::size_t>{0, 1});
    CHECK(extract_front(std::vector<ScoreVector>{}).empty());
    CHECK_THROWS_AS(extract_front(std::vector<ScoreVector>{{1, 1}, {1, 1, 1}}), DimensionError);
}

TEST_CASE("front extraction matches the pairwise filter")
{
    Rng rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = 1 + testing::index(rng, 64);
        const auto pts = testing::integer_points(rng, n, 2 + testing::index(rng, 2), 6);
        CHECK(extract_front(pts) == testing::brute_front(pts, testing::all_indices(n)));
    }
}

TEST_CASE("non-dominated sorting examples")
{
    const std::vector<ScoreVector> pts = {{1, 3}, {2, 2}, {3, 1}, {1, 1}, {0, 0}};
    const std::vector<std::vector<std::size_t>> expected = {{0, 1, 2}, {3}, {4}};
    CHECK(non_dominated_sort(pts) == expected);

    const std::vector<ScoreVector> same(5, ScoreVector{2, 2});
    CHECK(non_dominated_sort(same).size() == 1);

    const std::vector<ScoreVector> chain = {{3, 3}, {2, 2}, {1, 1}};
    CHECK(non_dominated_sort(chain) == std::vector<std::vector<std::size_t>>{{0}, {1}, {2}});
}

TEST_CASE("non-dominated sorting matches repeated peeling")
{
    Rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = 1 + testing::index(rng, 64);
        const auto pts = testing::integer_points(rng, n, 2 + testing::index(rng, 2), 5);
        std::vector<std::vector<std::size_t>> peeled;
        auto rest = testing::all_indices(n);
        while (!rest.empty()) {
            auto front = testing::brute_front(pts, rest);
            peeled.push_back(front);
            std::erase_if(rest, [&](std::size_t i) { return std::find(front.begin(), front.end(), i) != front.end(); });
        }
        const auto fronts = non_dominated_sort(pts);
        CHECK(fronts == peeled);

        std::vector<std::size_t> seen;
        for (const auto& f : fronts)
            seen.insert(seen.end(), f.begin(), f.end());
        std::sort(seen.begin(), seen.end());
        CHECK(seen == testing::all_indices(n));
        for (std::size_t i = 0; i < fronts.size(); ++i)
            for (std::size_t j = i + 1; j < fronts.size(); ++j)
                for (auto a : fronts[j])
                    for (auto b : fronts[i])
                        CHECK_FALSE(dominates(pts[a], pts[b]));
    }
}

TEST_CASE("exact bi-objective hypervolume examples")
{
    const ScoreVector origin{0, 0};
    CHECK(hypervolume_2d(std::vector<ScoreVector>{{1, 3}, {2, 2}, {3, 1}}, origin) == doctest::Approx(6.0));
    CHECK(hypervolume_2d(std::vector<ScoreVector>{{2, 3}}, origin) == doctest::Approx(6.0));
    CHECK(hypervolume_2d(std::vector<ScoreVector>{}, origin) == 0.0);
    CHECK_THROWS_AS(hypervolume_2d(std::vector<ScoreVector>{{1, 1, 1}}, ScoreVector{0, 0, 0}),
                    UnsupportedDimensionError);
}

TEST_CASE("points below the reference add nothing and are reported")
{
    const std::vector<ScoreVector> front = {{-1, -1}, {2, 3}, {5, -0.5}};
    const auto report = hypervolume_2d_report(front, ScoreVector{0, 0});
    CHECK(report.volume == doctest::Approx(6.0));
    CHECK(report.below_reference == std::vector<std::size_t>{0, 2});
}

TEST_CASE("hypervolume equals unit-square counting on integer sets")
{
    Rng rng(4);
    for (int trial = 0; trial < 300; ++trial) {
        const auto pts = testing::integer_points(rng, 1 + testing::index(rng, 15), 2, 12);
        const ScoreVector ref{2, 1};
        CHECK(hypervolume_2d(pts, ref) == doctest::Approx(grid_area(pts, ref, 13)));
    }
}

TEST_CASE("hypervolume is monotone and translation consistent")
{
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        auto front = testing::random_front(rng, 1 + testing::index(rng, 20), 0.0, 10.0);
        const ScoreVector ref{-1.0, -2.0};
        const double base = hypervolume_2d(front, ref);

        auto grown = front;
        grown.push_back(testing::real_points(rng, 1, 2, 0.0, 10.0).front());
        CHECK(hypervolume_2d(grown, ref) >= base - 1e-12);

        auto shrunk = front;
        shrunk.erase(shrunk.begin() + static_cast<std::ptrdiff_t>(testing::index(rng, shrunk.size())));
        CHECK(hypervolume_2d(shrunk, ref) <= base + 1e-12);

        const double dx = testing::uniform(rng, -50, 50), dy = testing::uniform(rng, -50, 50);
        auto moved = front;
        for (auto& p : moved) {
            p[0] += dx;
            p[1] += dy;
        }
        CHECK(hypervolume_2d(moved, ScoreVector{ref[0] + dx, ref[1] + dy}) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("Monte-Carlo hypervolume examples")
{
    const auto single = hypervolume_mc(std::vector<ScoreVector>{{2, 3}}, ScoreVector{0, 0}, ScoreVector{4, 4}, 1000000, 9);
    CHECK(std::abs(single.value - 6.0) <= 3.0 * single.std_error);

    const std::vector<ScoreVector> staircase = {{1, 3}, {2, 2}, {3, 1}};
    const auto stairs = hypervolume_mc(staircase, ScoreVector{0, 0}, ScoreVector{3, 3}, 1000000, 10);
    CHECK(std::abs(stairs.value - 6.0) <= 3.0 * stairs.std_error);

    CHECK(hypervolume_mc(std::vector<ScoreVector>{}, ScoreVector{0, 0}, ScoreVector{1, 1}, 100, 1).value == 0.0);
    CHECK_THROWS_AS(hypervolume_mc(staircase, ScoreVector{0, 0}, ScoreVector{3, 0}, 100, 1), DegenerateDomainError);

    const auto again = hypervolume_mc(staircase, ScoreVector{0, 0}, ScoreVector{3, 3}, 1000, 77);
    CHECK(again.value == hypervolume_mc(staircase, ScoreVector{0, 0}, ScoreVector{3, 3}, 1000, 77).value);
}

TEST_CASE("Monte-Carlo hypervolume of a box in three objectives")
{
    const auto est = hypervolume_mc(std::vector<ScoreVector>{{1, 2, 3}}, ScoreVector{0, 0, 0}, ScoreVector{3, 3, 3},
                                    400000, 11);
    CHECK(std::abs(est.value - 6.0) <= 4.0 * est.std_error);
}

TEST_CASE("crowding distance examples")
{
    const std::vector<ScoreVector> front = {{0, 4}, {1, 2}, {3, 1}};
    CHECK(crowding_distances(front, CrowdingMode::selection) == std::vector<double>{3.0, 3.0, 3.0});
    CHECK(crowding_distances(front, CrowdingMode::replacement) == std::vector<double>{inf, 3.0, inf});
    CHECK(crowding_distances(std::vector<ScoreVector>{{5, 5}}, CrowdingMode::replacement) == std::vector<double>{inf});
    CHECK(crowding_distances(std::vector<ScoreVector>{{5, 5}}, CrowdingMode::selection) == std::vector<double>{1.0});

    const std::vector<ScoreVector> twins = {{0, 4}, {1, 2}, {1, 2}, {3, 1}};
    const auto d = crowding_distances(twins, CrowdingMode::replacement);
    CHECK(d[1] == doctest::Approx(1.5));
    CHECK(d[2] == doctest::Approx(1.5));
}

TEST_CASE("crowding distance with range normalization")
{
    const std::vector<ScoreVector> front = {{0, 4}, {1, 2}, {3, 1}};
    const auto d = crowding_distances(front, CrowdingMode::replacement, CrowdingOptions{true});
    // neighbours (0,4) and (3,1): |1/3| + |2/3| and |2/3| + |1/3|
    CHECK(d[1] == doctest::Approx(1.0));
}

TEST_CASE("replacement crowding is infinite exactly at the objective-1 extremes")
{
    Rng rng(6);
    for (int trial = 0; trial < 500; ++trial) {
        const auto front = testing::random_front(rng, 2 + testing::index(rng, 20), -5.0, 5.0);
        const auto d = crowding_distances(front, CrowdingMode::replacement);
        double lo = inf, hi = -inf;
        for (const auto& p : front) {
            lo = std::min(lo, p[0]);
            hi = std::max(hi, p[0]);
        }
        for (std::size_t i = 0; i < front.size(); ++i) {
            const bool boundary = front[i][0] == lo || front[i][0] == hi;
            CHECK(std::isinf(d[i]) == boundary);
        }
    }
}

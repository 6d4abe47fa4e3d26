#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <moqd/archive.hpp>
#include <moqd/errors.hpp>

#include <cmath>
#include <map>
#include <sstream>

using namespace moqd;
using testing::Rng;

namespace {

const Bounds unit_square{{{0.0, 1.0}, {0.0, 1.0}}};

Centroids line_centroids(std::size_t k)
{
    Centroids c;
    c.bounds = unit_square;
    for (std::size_t i = 0; i < k; ++i)
        c.points.push_back({(static_cast<double>(i) + 0.5) / static_cast<double>(k), 0.5});
    return c;
}

Solution sol(std::uint64_t id, ScoreVector scores, Descriptor desc = {0.5, 0.5})
{
    return Solution{Genotype{static_cast<double>(id), -1.0}, std::move(scores), std::move(desc), id};
}

std::vector<std::uint64_t> ids(const std::vector<Solution>& front)
{
    std::vector<std::uint64_t> out;
    for (const auto& s : front)
        out.push_back(s.id);
    return out;
}

std::vector<ScoreVector> scores_of(const std::vector<Solution>& front)
{
    std::vector<ScoreVector> out;
    for (const auto& s : front)
        out.push_back(s.scores);
    return out;
}

void check_well_formed(const MoqdArchive& archive)
{
    for (std::size_t c = 0; c < archive.cell_count(); ++c) {
        const auto& front = archive.cell(c);
        if (archive.front_capacity() != unbounded_front)
            CHECK(front.size() <= archive.front_capacity());
        for (const auto& a : front) {
            CHECK(archive.cell_index(a.descriptor) == c);
            for (const auto& b : front)
                if (&a != &b) {
                    CHECK_FALSE(testing::brute_dominates(a.scores, b.scores));
                    CHECK(a.scores != b.scores);
                }
        }
    }
}

} // namespace

TEST_CASE("tessellation basics")
{
    const auto one = cvt_centroids(unit_square, 1, 50000, 3);
    REQUIRE(one.size() == 1);
    CHECK(std::abs(one.points[0][0] - 0.5) < 0.01);
    CHECK(std::abs(one.points[0][1] - 0.5) < 0.01);

    const auto four = cvt_centroids(unit_square, 4, 5000, 3);
    REQUIRE(four.size() == 4);
    for (const auto& p : four.points)
        CHECK(unit_square.contains(p));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            CHECK(four.points[i] != four.points[j]);

    CHECK(cvt_centroids(unit_square, 16, 2000, 9).points == cvt_centroids(unit_square, 16, 2000, 9).points);
    CHECK_THROWS_AS(cvt_centroids(unit_square, 20, 10, 1), ConfigError);
    CHECK_THROWS_AS(cvt_centroids(unit_square, 0, 100, 1), ConfigError);
}

TEST_CASE("cell lookup")
{
    MoqdArchive archive(line_centroids(4), 3, ReplacementPolicy::crowding);
    CHECK(archive.cell_index(Descriptor{0.625, 0.5}) == 2);
    CHECK(archive.cell_index(Descriptor{7.0, -3.0}) == 3);
    CHECK(archive.cell_index(Descriptor{-1.0, 0.5}) == 0);
    // equidistant between centroids 1 and 2
    CHECK(archive.cell_index(Descriptor{0.5, 0.9}) == 1);
}

TEST_CASE("insertion examples")
{
    MoqdArchive archive(line_centroids(1), 3, ReplacementPolicy::crowding);
    CHECK(archive.insert(sol(1, {2, 2})).added);
    auto report = archive.insert(sol(2, {1, 1}));
    CHECK_FALSE(report.added);
    report = archive.insert(sol(3, {2, 2}));
    CHECK_FALSE(report.added);
    report = archive.insert(sol(4, {3, 3}));
    CHECK(report.added);
    CHECK(report.evicted == std::vector<std::uint64_t>{1});
    CHECK(ids(archive.cell(0)) == std::vector<std::uint64_t>{4});
}

TEST_CASE("crowding replacement evicts the least crowded interior point")
{
    MoqdArchive archive(line_centroids(1), 3, ReplacementPolicy::crowding);
    archive.insert(sol(1, {0, 4}));
    archive.insert(sol(2, {1, 2}));
    archive.insert(sol(3, {3, 1}));
    // after adding (2,1.9): (1,2) has |2-0| + |1.9-4| = 4.1, (2,1.9) has |3-1| + |1-2| = 3
    const auto report = archive.insert(sol(4, {2, 1.9}));
    CHECK(report.evicted == std::vector<std::uint64_t>{4});
    CHECK(ids(archive.cell(0)) == std::vector<std::uint64_t>{1, 2, 3});

    // a new extreme (5,0.5) turns (3,1) interior: |5-1| + |0.5-2| = 5.5 against 3 + 3 = 6 for (1,2)
    const auto second = archive.insert(sol(5, {5, 0.5}));
    CHECK(second.added);
    CHECK(second.evicted == std::vector<std::uint64_t>{3});
    CHECK(ids(archive.cell(0)) == std::vector<std::uint64_t>{1, 2, 5});
}

TEST_CASE("crowding ties evict the oldest insertion")
{
    MoqdArchive archive(line_centroids(1), 3, ReplacementPolicy::crowding);
    archive.insert(sol(1, {0, 4}));
    archive.insert(sol(2, {1, 3}));
    archive.insert(sol(3, {4, 0}));
    const auto report = archive.insert(sol(4, {3, 1}));
    // (1,3): |3-0|+|1-4| = 6, (3,1): |4-1|+|0-3| = 6
    CHECK(report.evicted == std::vector<std::uint64_t>{2});
}

TEST_CASE("random replacement keeps the front bounded and is seeded")
{
    auto run = [](std::uint64_t seed) {
        MoqdArchive archive(line_centroids(1), 2, ReplacementPolicy::random, seed);
        archive.insert(sol(1, {0, 4}));
        archive.insert(sol(2, {1, 2}));
        archive.insert(sol(3, {3, 1}));
        return ids(archive.cell(0));
    };
    CHECK(run(5).size() == 2);
    CHECK(run(5) == run(5));

    std::map<std::uint64_t, int> evicted;
    for (std::uint64_t seed = 0; seed < 3000; ++seed) {
        MoqdArchive archive(line_centroids(1), 2, ReplacementPolicy::random, seed);
        archive.insert(sol(1, {0, 4}));
        archive.insert(sol(2, {1, 2}));
        const auto report = archive.insert(sol(3, {3, 1}));
        REQUIRE(report.evicted.size() == 1);
        ++evicted[report.evicted[0]];
    }
    // the candidate itself may be evicted; all three equally likely
    for (std::uint64_t id = 1; id <= 3; ++id)
        CHECK(std::abs(evicted[id] - 1000) < 120);
}

TEST_CASE("random insertion sequences keep every cell a bounded front")
{
    Rng rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        const auto policy = trial % 2 == 0 ? ReplacementPolicy::crowding : ReplacementPolicy::random;
        const std::size_t capacity = 1 + testing::index(rng, 5);
        MoqdArchive archive(line_centroids(3), capacity, policy, static_cast<std::uint64_t>(trial));
        for (std::uint64_t id = 0; id < 200; ++id) {
            const auto desc = testing::real_points(rng, 1, 2, -0.2, 1.2).front();
            const auto scores = testing::integer_points(rng, 1, 2, 8).front();
            const auto cell = archive.cell_index(desc);

            // the post-addition front before capacity handling
            std::vector<Solution> expected;
            bool rejected = false;
            for (const auto& m : archive.cell(cell)) {
                if (testing::brute_dominates(m.scores, scores) || m.scores == scores)
                    rejected = true;
                if (!testing::brute_dominates(scores, m.scores))
                    expected.push_back(m);
            }
            const auto before = archive.cell(cell);
            const auto report = archive.insert(sol(id, scores, desc));
            CHECK(report.cell == cell);
            const bool self_evicted =
                std::find(report.evicted.begin(), report.evicted.end(), id) != report.evicted.end();
            CHECK(report.added == (!rejected && !self_evicted));
            if (rejected) {
                CHECK(ids(archive.cell(cell)) == ids(before));
                continue;
            }
            expected.push_back(sol(id, scores, desc));
            if (policy == ReplacementPolicy::crowding && expected.size() > capacity && capacity >= 2) {
                const auto& front = archive.cell(cell);
                double lo = 1e9, hi = -1e9;
                for (const auto& e : expected) {
                    lo = std::min(lo, e.scores[0]);
                    hi = std::max(hi, e.scores[0]);
                }
                // both objective-1 extremes survive
                bool has_lo = false, has_hi = false;
                for (const auto& f : front) {
                    has_lo = has_lo || f.scores[0] == lo;
                    has_hi = has_hi || f.scores[0] == hi;
                }
                CHECK(has_lo);
                CHECK(has_hi);
            }
        }
        check_well_formed(archive);
    }
}

TEST_CASE("unbounded fronts give a monotone score")
{
    Rng rng(12);
    MoqdArchive archive(line_centroids(4), unbounded_front, ReplacementPolicy::random, 1);
    const ScoreVector ref{0, 0};
    double last = 0.0;
    for (std::uint64_t id = 0; id < 2000; ++id) {
        archive.insert(sol(id, testing::real_points(rng, 1, 2, 0.0, 10.0).front(),
                           testing::real_points(rng, 1, 2, 0.0, 1.0).front()));
        const double score = archive.metrics(ref).moqd_score;
        CHECK(score >= last - 1e-9);
        last = score;
    }
    check_well_formed(archive);
}

TEST_CASE("metrics examples")
{
    const ScoreVector ref{0, 0};
    MoqdArchive archive(line_centroids(4), 3, ReplacementPolicy::crowding);
    const auto empty = archive.metrics(ref);
    CHECK(empty.moqd_score == 0.0);
    CHECK(empty.global_hypervolume == 0.0);
    CHECK_FALSE(empty.max_sum.has_value());
    CHECK(empty.coverage == 0.0);

    archive.insert(sol(1, {2, 3}, {0.1, 0.5}));
    auto m = archive.metrics(ref);
    CHECK(m.moqd_score == doctest::Approx(6.0));
    CHECK(m.global_hypervolume == doctest::Approx(6.0));
    CHECK(*m.max_sum == doctest::Approx(5.0));
    CHECK(m.coverage == doctest::Approx(0.25));

    archive.insert(sol(2, {2, 3}, {0.9, 0.5}));
    m = archive.metrics(ref);
    CHECK(m.moqd_score == doctest::Approx(12.0));
    CHECK(m.global_hypervolume == doctest::Approx(6.0));
    CHECK(m.coverage == doctest::Approx(0.5));
    CHECK(archive_metrics(archive, ref).moqd_score == m.moqd_score);
}

TEST_CASE("metrics agree with per-cell brute force")
{
    Rng rng(13);
    MoqdArchive archive(line_centroids(5), 4, ReplacementPolicy::crowding);
    for (std::uint64_t id = 0; id < 300; ++id)
        archive.insert(sol(id, testing::real_points(rng, 1, 2, -1.0, 10.0).front(),
                           testing::real_points(rng, 1, 2, 0.0, 1.0).front()));
    const ScoreVector ref{0, 0};
    double total = 0.0, best = -1e9;
    std::size_t occupied = 0;
    std::vector<ScoreVector> all;
    for (std::size_t c = 0; c < archive.cell_count(); ++c) {
        const auto pts = scores_of(archive.cell(c));
        total += hypervolume_2d(pts, ref);
        occupied += pts.empty() ? 0 : 1;
        for (const auto& p : pts) {
            best = std::max(best, p[0] + p[1]);
            all.push_back(p);
        }
    }
    const auto m = archive.metrics(ref);
    CHECK(m.moqd_score == doctest::Approx(total));
    CHECK(m.global_hypervolume == doctest::Approx(hypervolume_2d(all, ref)));
    CHECK(*m.max_sum == doctest::Approx(best));
    CHECK(m.coverage == doctest::Approx(static_cast<double>(occupied) / 5.0));
}

TEST_CASE("sampling")
{
    Rng rng(14);
    MoqdArchive archive(line_centroids(4), 3, ReplacementPolicy::crowding);
    CHECK_THROWS_AS(archive.sample(1, rng, SelectionMode::uniform), EmptyArchiveError);

    archive.insert(sol(7, {1, 1}, {0.1, 0.5}));
    for (const auto* s : archive.sample_solutions(50, rng, SelectionMode::crowding))
        CHECK(s->id == 7);

    archive.insert(sol(8, {0, 4}, {0.9, 0.5}));
    archive.insert(sol(9, {1, 2}, {0.9, 0.5}));
    archive.insert(sol(10, {3, 1}, {0.9, 0.5}));
    std::map<std::uint64_t, int> counts;
    for (const auto* s : archive.sample_solutions(10000, rng, SelectionMode::crowding))
        ++counts[s->id];
    // cells uniformly, then uniform within the cell because all selection distances are 3
    CHECK(std::abs(counts[7] - 5000) <= 300);
    for (std::uint64_t id = 8; id <= 10; ++id)
        CHECK(std::abs(counts[id] - 5000.0 / 3.0) <= 200);
}

TEST_CASE("crowding selection follows the selection distances")
{
    Rng rng(15);
    MoqdArchive archive(line_centroids(1), 4, ReplacementPolicy::crowding);
    const std::vector<ScoreVector> pts = {{0, 10}, {1, 9}, {2, 8}, {10, 0}};
    for (std::uint64_t i = 0; i < pts.size(); ++i)
        archive.insert(sol(i, pts[i]));
    const auto d = crowding_distances(pts, CrowdingMode::selection);
    double sum = 0.0;
    for (double x : d)
        sum += x;
    const int draws = 40000;
    std::map<std::uint64_t, int> counts;
    for (const auto* s : archive.sample_solutions(draws, rng, SelectionMode::crowding))
        ++counts[s->id];
    double chi2 = 0.0;
    for (std::uint64_t i = 0; i < pts.size(); ++i) {
        const double expected = draws * d[i] / sum;
        chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
    }
    // 3 degrees of freedom, 0.999 quantile
    CHECK(chi2 < 16.27);
}

TEST_CASE("cell choice is uniform over non-empty cells")
{
    Rng rng(16);
    MoqdArchive archive(line_centroids(8), 5, ReplacementPolicy::crowding);
    std::uint64_t id = 0;
    for (std::size_t c = 0; c < 8; c += 2)
        for (std::size_t j = 0; j <= c / 2; ++j)
            archive.insert(sol(id++, {static_cast<double>(j), static_cast<double>(5 - j)},
                               {(static_cast<double>(c) + 0.5) / 8.0, 0.5}));
    std::map<std::size_t, int> per_cell;
    for (const auto* s : archive.sample_solutions(10000, rng, SelectionMode::uniform))
        ++per_cell[archive.cell_index(s->descriptor)];
    CHECK(per_cell.size() == 4);
    double chi2 = 0.0;
    for (const auto& [cell, n] : per_cell) {
        CHECK(cell % 2 == 0);
        chi2 += (n - 2500.0) * (n - 2500.0) / 2500.0;
    }
    CHECK(chi2 < 16.27);
}

TEST_CASE("passive insertion")
{
    MoqdArchive passive(line_centroids(2), 3, ReplacementPolicy::random, 4);
    CHECK(passive_insert(passive, std::vector<Solution>{}) == 0);
    const std::vector<Solution> one = {sol(1, {1, 1}, {0.2, 0.5})};
    CHECK(passive_insert(passive, one) == 1);
    const std::vector<Solution> pop = {sol(1, {1, 1}, {0.2, 0.5}), sol(2, {0, 3}, {0.2, 0.5}),
                                       sol(3, {0, 0}, {0.2, 0.5}), sol(4, {5, 5}, {0.8, 0.5})};
    CHECK(passive_insert(passive, pop) == 2);
    CHECK(passive.size() == 3);
}

TEST_CASE("snapshots round-trip")
{
    Rng rng(17);
    MoqdArchive archive(cvt_centroids(unit_square, 6, 600, 2), 3, ReplacementPolicy::crowding);
    for (std::uint64_t id = 0; id < 200; ++id) {
        Solution s = sol(id, testing::real_points(rng, 1, 2, -3.0, 3.0).front(),
                         testing::real_points(rng, 1, 2, 0.0, 1.0).front());
        s.genotype = testing::real_points(rng, 1, 5, -1.0, 1.0).front();
        s.genotype[0] = 0.1 + 1e-17 * static_cast<double>(id);
        archive.insert(s);
    }
    std::stringstream buffer;
    archive.write_snapshot(buffer);
    const auto loaded = MoqdArchive::load_snapshot(buffer);
    CHECK(loaded.centroids().points == archive.centroids().points);
    CHECK(loaded.front_capacity() == 3);
    CHECK(loaded.policy() == ReplacementPolicy::crowding);
    for (std::size_t c = 0; c < archive.cell_count(); ++c) {
        REQUIRE(loaded.cell(c).size() == archive.cell(c).size());
        for (std::size_t j = 0; j < archive.cell(c).size(); ++j) {
            CHECK(loaded.cell(c)[j].genotype == archive.cell(c)[j].genotype);
            CHECK(loaded.cell(c)[j].scores == archive.cell(c)[j].scores);
            CHECK(loaded.cell(c)[j].descriptor == archive.cell(c)[j].descriptor);
        }
    }
    const ScoreVector ref{-3, -3};
    CHECK(loaded.metrics(ref).moqd_score == archive.metrics(ref).moqd_score);
    CHECK(loaded.metrics(ref).global_hypervolume == archive.metrics(ref).global_hypervolume);
}

TEST_CASE("snapshot parsing")
{
    MoqdArchive archive(line_centroids(2), 3, ReplacementPolicy::random);
    archive.insert(sol(1, {1, 2}, {0.1, 0.5}));
    archive.insert(sol(2, {2, 1}, {0.9, 0.5}));
    std::stringstream full;
    archive.write_snapshot(full);
    const auto text = full.str();

    std::stringstream header_only(text.substr(0, text.find('\n') + 1));
    const auto bare = MoqdArchive::load_snapshot(header_only);
    CHECK(bare.empty());
    CHECK(bare.cell_count() == 2);
    CHECK(bare.policy() == ReplacementPolicy::random);

    std::stringstream truncated(text.substr(0, text.size() - 10));
    try {
        MoqdArchive::load_snapshot(truncated);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }

    std::stringstream garbage("{\"kind\":\"sol\"}\n");
    CHECK_THROWS_AS(MoqdArchive::load_snapshot(garbage), ParseError);
}

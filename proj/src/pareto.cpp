#include <moqd/errors.hpp>
#include <moqd/pareto.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace moqd {

namespace {

void check_same_length(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw DimensionError("score vectors of length " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
}

void check_uniform(std::span<const ScoreVector> points)
{
    if (points.empty())
        return;
    const auto m = points.front().size();
    for (const auto& p : points)
        if (p.size() != m)
            throw DimensionError("non-uniform score vector lengths");
}

bool weakly_dominates_ref(std::span<const double> point, std::span<const double> ref)
{
    for (std::size_t i = 0; i < point.size(); ++i)
        if (point[i] < ref[i])
            return false;
    return true;
}

} // namespace

bool dominates(std::span<const double> a, std::span<const double> b)
{
    check_same_length(a, b);
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i])
            return false;
        if (a[i] > b[i])
            strictly = true;
    }
    return strictly;
}

std::vector<std::size_t> extract_front(std::span<const ScoreVector> points)
{
    check_uniform(points);
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j)
            dominated = j != i && dominates(points[j], points[i]);
        if (!dominated)
            front.push_back(i);
    }
    return front;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const ScoreVector> points)
{
    check_uniform(points);
    const auto n = points.size();

    // Fast non-dominated sort: domination counts plus dominated-by lists.
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> counter(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(points[i], points[j])) {
                dominated_by[i].push_back(j);
                ++counter[j];
            }
            else if (dominates(points[j], points[i])) {
                dominated_by[j].push_back(i);
                ++counter[i];
            }
        }
    }

    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (counter[i] == 0)
            current.push_back(i);

    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto i : current)
            for (auto j : dominated_by[i])
                if (--counter[j] == 0)
                    next.push_back(j);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

HypervolumeReport hypervolume_2d_report(std::span<const ScoreVector> front, std::span<const double> ref)
{
    if (ref.size() != 2)
        throw UnsupportedDimensionError("hypervolume_2d needs two objectives, got " + std::to_string(ref.size()));

    HypervolumeReport report;
    std::vector<std::pair<double, double>> kept;
    kept.reserve(front.size());
    for (std::size_t i = 0; i < front.size(); ++i) {
        if (front[i].size() != 2)
            throw UnsupportedDimensionError("hypervolume_2d needs two objectives");
        if (!weakly_dominates_ref(front[i], ref)) {
            report.below_reference.push_back(i);
            continue;
        }
        kept.emplace_back(front[i][0], front[i][1]);
    }

    // Sweep from the largest first objective down, adding the slab above the running max.
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second > b.second);
    });
    double top = ref[1];
    for (const auto& [x, y] : kept) {
        if (y > top) {
            report.volume += (x - ref[0]) * (y - top);
            top = y;
        }
    }
    return report;
}

double hypervolume_2d(std::span<const ScoreVector> front, std::span<const double> ref)
{
    return hypervolume_2d_report(front, ref).volume;
}

MonteCarloEstimate hypervolume_mc(std::span<const ScoreVector> front, std::span<const double> ref,
                                  std::span<const double> bound, std::size_t samples, std::uint64_t seed)
{
    check_same_length(ref, bound);
    if (samples == 0)
        throw std::invalid_argument("hypervolume_mc needs at least one sample");
    double box = 1.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (!(bound[i] > ref[i]))
            throw DegenerateDomainError("bound does not exceed reference in objective " + std::to_string(i));
        box *= bound[i] - ref[i];
    }
    for (const auto& p : front) {
        check_same_length(p, ref);
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] > bound[i])
                throw std::invalid_argument("front point exceeds the sampling bound");
    }
    if (front.empty())
        return {};

    const auto m = ref.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> u(m);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t i = 0; i < m; ++i)
            u[i] = ref[i] + unit(rng) * (bound[i] - ref[i]);
        for (const auto& p : front) {
            bool covers = true;
            for (std::size_t i = 0; i < m && covers; ++i)
                covers = p[i] >= u[i];
            if (covers) {
                ++hits;
                break;
            }
        }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    return {box * frac, box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples))};
}

double hypervolume(std::span<const ScoreVector> front, std::span<const double> ref)
{
    if (ref.size() == 2)
        return hypervolume_2d(front, ref);

    std::vector<ScoreVector> kept;
    for (const auto& p : front)
        if (weakly_dominates_ref(p, ref))
            kept.push_back(p);
    if (kept.empty())
        return 0.0;
    std::vector<double> bound(ref.begin(), ref.end());
    for (const auto& p : kept)
        for (std::size_t i = 0; i < p.size(); ++i)
            bound[i] = std::max(bound[i], p[i]);
    for (std::size_t i = 0; i < bound.size(); ++i)
        if (!(bound[i] > ref[i]))
            return 0.0;
    return hypervolume_mc(kept, ref, bound, 200000, 0x5eedULL).value;
}

std::vector<double> crowding_distances(std::span<const ScoreVector> front, CrowdingMode mode, CrowdingOptions options)
{
    const auto n = front.size();
    if (n == 0)
        return {};
    check_uniform(front);
    if (front.front().size() != 2)
        throw UnsupportedDimensionError("crowding distance is defined for two objectives only");

    constexpr double inf = std::numeric_limits<double>::infinity();
    if (n == 1)
        return {mode == CrowdingMode::selection ? 1.0 : inf};

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (front[a][0] != front[b][0])
            return front[a][0] < front[b][0];
        if (front[a][1] != front[b][1])
            return front[a][1] > front[b][1];
        return a < b;
    });

    double scale[2] = {1.0, 1.0};
    if (options.normalize) {
        for (int k = 0; k < 2; ++k) {
            const auto [lo, hi] = std::minmax_element(front.begin(), front.end(),
                                                      [k](const auto& a, const auto& b) { return a[k] < b[k]; });
            const double range = (*hi)[k] - (*lo)[k];
            if (range > 0.0)
                scale[k] = range;
        }
    }
    auto manhattan = [&](std::size_t a, std::size_t b) {
        return std::abs(front[a][0] - front[b][0]) / scale[0] + std::abs(front[a][1] - front[b][1]) / scale[1];
    };

    // gaps[i] is the distance between sorted positions i and i+1.
    std::vector<double> gaps(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        gaps[i] = manhattan(order[i], order[i + 1]);

    std::vector<double> distances(n);
    for (std::size_t i = 1; i + 1 < n; ++i)
        distances[order[i]] = 0.5 * (gaps[i - 1] + gaps[i]);
    if (mode == CrowdingMode::selection) {
        distances[order.front()] = gaps.front();
        distances[order.back()] = gaps.back();
    }
    else {
        distances[order.front()] = inf;
        distances[order.back()] = inf;
    }
    return distances;
}

} // namespace moqd

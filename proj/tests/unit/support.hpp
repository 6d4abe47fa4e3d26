#ifndef MOQD_TESTS_SUPPORT_HPP
#define MOQD_TESTS_SUPPORT_HPP

// Generators and brute-force oracles shared by the unit tests.

#include <moqd/pareto.hpp>

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t index(Rng& rng, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Points on a small integer grid so that ties and duplicates are common.
inline std::vector<moqd::ScoreVector> integer_points(Rng& rng, std::size_t n, std::size_t m, int hi)
{
    std::uniform_int_distribution<int> coord(0, hi);
    std::vector<moqd::ScoreVector> pts(n, moqd::ScoreVector(m));
    for (auto& p : pts)
        for (auto& x : p)
            x = coord(rng);
    return pts;
}

inline std::vector<moqd::ScoreVector> real_points(Rng& rng, std::size_t n, std::size_t m, double lo, double hi)
{
    std::vector<moqd::ScoreVector> pts(n, moqd::ScoreVector(m));
    for (auto& p : pts)
        for (auto& x : p)
            x = uniform(rng, lo, hi);
    return pts;
}

/// Mutually non-dominated bi-objective points: x ascending, y strictly descending.
inline std::vector<moqd::ScoreVector> random_front(Rng& rng, std::size_t n, double lo, double hi)
{
    std::vector<double> xs(n), ys(n);
    for (auto& x : xs)
        x = uniform(rng, lo, hi);
    for (auto& y : ys)
        y = uniform(rng, lo, hi);
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end(), std::greater<>());
    std::vector<moqd::ScoreVector> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({xs[i], ys[i]});
    return out;
}

inline bool brute_dominates(const moqd::ScoreVector& a, const moqd::ScoreVector& b)
{
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i])
            return false;
        if (a[i] > b[i])
            strictly = true;
    }
    return strictly;
}

inline std::vector<std::size_t> brute_front(const std::vector<moqd::ScoreVector>& pts,
                                            const std::vector<std::size_t>& among)
{
    std::vector<std::size_t> out;
    for (auto i : among) {
        bool dominated = false;
        for (auto j : among)
            if (j != i && brute_dominates(pts[j], pts[i]))
                dominated = true;
        if (!dominated)
            out.push_back(i);
    }
    return out;
}

inline std::vector<std::size_t> all_indices(std::size_t n)
{
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = i;
    return v;
}

} // namespace testing

#endif

#include <moqd/bench/stats.hpp>
#include <moqd/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace moqd::bench {

namespace {

struct SignedRanks {
    std::vector<std::int64_t> doubled; ///< 2 * midrank, so ties stay integral
    std::vector<bool> positive;
    std::vector<std::size_t> tie_sizes;
};

SignedRanks rank_differences(std::span<const double> differences)
{
    std::vector<double> d;
    for (double x : differences)
        if (x != 0.0)
            d.push_back(x);
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });

    SignedRanks out;
    out.doubled.resize(d.size());
    out.positive.resize(d.size());
    for (std::size_t i = 0; i < d.size();) {
        std::size_t j = i;
        while (j + 1 < d.size() && std::abs(d[order[j + 1]]) == std::abs(d[order[i]]))
            ++j;
        // ranks i+1 .. j+1 share their mean; doubled that is i + j + 2
        for (std::size_t k = i; k <= j; ++k)
            out.doubled[order[k]] = static_cast<std::int64_t>(i + j + 2);
        out.tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }
    for (std::size_t i = 0; i < d.size(); ++i)
        out.positive[i] = d[i] > 0.0;
    return out;
}

std::int64_t doubled_w_plus(const SignedRanks& r)
{
    std::int64_t w = 0;
    for (std::size_t i = 0; i < r.doubled.size(); ++i)
        if (r.positive[i])
            w += r.doubled[i];
    return w;
}

double exact_from_ranks(const SignedRanks& r)
{
    const std::size_t n = r.doubled.size();
    if (n == 0)
        return 1.0;
    if (n > 30)
        throw std::invalid_argument("exact enumeration limited to 30 differences");
    const std::int64_t observed = doubled_w_plus(r);
    const std::int64_t total = std::accumulate(r.doubled.begin(), r.doubled.end(), std::int64_t{0});
    // Distribution of the doubled statistic by subset-sum counting.
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    std::int64_t reach = 0;
    for (auto rank : r.doubled) {
        for (std::int64_t s = reach; s >= 0; --s)
            if (count[static_cast<std::size_t>(s)] != 0.0)
                count[static_cast<std::size_t>(s + rank)] += count[static_cast<std::size_t>(s)];
        reach += rank;
    }
    const double all = std::ldexp(1.0, static_cast<int>(n));
    double lower = 0.0;
    double upper = 0.0;
    for (std::int64_t s = 0; s <= total; ++s) {
        if (s <= observed)
            lower += count[static_cast<std::size_t>(s)];
        if (s >= observed)
            upper += count[static_cast<std::size_t>(s)];
    }
    return std::min(1.0, 2.0 * std::min(lower, upper) / all);
}

double normal_from_ranks(const SignedRanks& r)
{
    const auto n = static_cast<double>(r.doubled.size());
    if (n == 0.0)
        return 1.0;
    const double w = static_cast<double>(doubled_w_plus(r)) / 2.0;
    const double mean = n * (n + 1.0) / 4.0;
    double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    for (auto t : r.tie_sizes) {
        const auto tt = static_cast<double>(t);
        variance -= (tt * tt * tt - tt) / 48.0;
    }
    if (!(variance > 0.0))
        return 1.0;
    const double z = std::max(0.0, std::abs(w - mean) - 0.5) / std::sqrt(variance);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

} // namespace

double wilcoxon_exact_p(std::span<const double> differences)
{
    return exact_from_ranks(rank_differences(differences));
}

double wilcoxon_normal_p(std::span<const double> differences)
{
    return normal_from_ranks(rank_differences(differences));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw DimensionError("paired samples differ in length");
    if (a.size() < 5)
        throw InsufficientDataError("signed-rank test needs at least 5 pairs, got " + std::to_string(a.size()));
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        d[i] = a[i] - b[i];
    const auto ranks = rank_differences(d);

    WilcoxonResult out;
    out.n = ranks.doubled.size();
    out.w_plus = static_cast<double>(doubled_w_plus(ranks)) / 2.0;
    out.exact = out.n <= wilcoxon_exact_limit;
    out.p_value = out.exact ? exact_from_ranks(ranks) : normal_from_ranks(ranks);
    return out;
}

std::vector<double> holm_bonferroni(std::span<const double> p_values)
{
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("p-values must lie in [0, 1]");
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<double> adjusted(m);
    double running = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double scaled = std::min(1.0, static_cast<double>(m - j) * p_values[order[j]]);
        running = std::max(running, scaled);
        adjusted[order[j]] = running;
    }
    return adjusted;
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty())
        throw InsufficientDataError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values)
{
    return quantile(std::move(values), 0.5);
}

} // namespace moqd::bench

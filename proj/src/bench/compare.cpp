#include <moqd/bench/compare.hpp>
#include <moqd/bench/metrics_io.hpp>
#include <moqd/bench/stats.hpp>
#include <moqd/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace moqd::bench {

namespace {

std::map<std::uint64_t, double> finals_by_seed(const RunGroup& g, const std::string& metric)
{
    std::map<std::uint64_t, double> out;
    for (const auto& r : g.runs) {
        if (r.metrics.empty())
            throw ParseError(r.dir.string() + ": metrics file has no rows", 1);
        if (!out.emplace(r.seed, metric_value(r.metrics.back(), metric)).second)
            throw PairingError("group '" + g.label + "' has seed " + std::to_string(r.seed) + " twice");
    }
    return out;
}

std::string seed_list(const std::vector<std::uint64_t>& seeds)
{
    std::string out;
    for (auto s : seeds)
        out += (out.empty() ? "" : ", ") + std::to_string(s);
    return out;
}

std::string fixed(double x, int digits)
{
    if (std::isnan(x))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string general(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

} // namespace

std::vector<std::pair<double, double>> median_curve(const RunGroup& group, const std::string& metric)
{
    return quantile_curve(group, metric, 0.5);
}

std::vector<std::pair<double, double>> quantile_curve(const RunGroup& group, const std::string& metric, double q)
{
    const auto& first = group.runs.front().metrics;
    for (const auto& r : group.runs) {
        if (r.metrics.size() != first.size())
            throw ParseError(r.dir.string() + ": metric rows do not align with the other replications", 1);
        for (std::size_t i = 0; i < first.size(); ++i)
            if (r.metrics[i].evaluations != first[i].evaluations)
                throw ParseError(r.dir.string() + ": evaluation counts differ from the other replications", i + 2);
    }
    std::vector<std::pair<double, double>> curve;
    for (std::size_t i = 0; i < first.size(); ++i) {
        std::vector<double> values;
        for (const auto& r : group.runs)
            values.push_back(metric_value(r.metrics[i], metric));
        curve.emplace_back(static_cast<double>(first[i].evaluations), quantile(values, q));
    }
    return curve;
}

std::optional<double> evaluations_to_reach(const std::vector<std::pair<double, double>>& curve, double target)
{
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve[i].second < target)
            continue;
        if (i == 0)
            return curve[i].first;
        const auto [e0, v0] = curve[i - 1];
        const auto [e1, v1] = curve[i];
        return e0 + (target - v0) / (v1 - v0) * (e1 - e0);
    }
    return std::nullopt;
}

std::optional<double> efficiency_ratio(const RunGroup& reference, const RunGroup& other, const std::string& metric)
{
    const auto ref_curve = median_curve(reference, metric);
    const auto other_curve = median_curve(other, metric);
    if (ref_curve.empty() || other_curve.empty())
        return std::nullopt;
    const double target = std::min(ref_curve.back().second, other_curve.back().second);
    const auto e_ref = evaluations_to_reach(ref_curve, target);
    const auto e_other = evaluations_to_reach(other_curve, target);
    if (!e_ref || !e_other || !(*e_ref > 0.0))
        return std::nullopt;
    return *e_other / *e_ref;
}

ComparisonTable compare_groups(const std::vector<RunGroup>& groups, const std::string& metric)
{
    metric_value(MetricsRecord{}, metric); // rejects unknown names early
    ComparisonTable table;
    table.metric = metric;
    if (groups.empty())
        return table;

    std::vector<std::map<std::uint64_t, double>> finals;
    for (const auto& g : groups) {
        finals.push_back(finals_by_seed(g, metric));
        std::vector<double> values;
        for (const auto& [seed, v] : finals.back())
            values.push_back(v);
        table.groups.push_back({g.label, values.size(), median(values), quantile(values, 0.25), quantile(values, 0.75)});
    }

    const auto& ref = finals.front();
    for (std::size_t k = 1; k < groups.size(); ++k) {
        std::vector<std::uint64_t> missing_other;
        std::vector<std::uint64_t> missing_ref;
        for (const auto& [seed, v] : ref)
            if (!finals[k].contains(seed))
                missing_other.push_back(seed);
        for (const auto& [seed, v] : finals[k])
            if (!ref.contains(seed))
                missing_ref.push_back(seed);
        if (!missing_other.empty() || !missing_ref.empty()) {
            std::string msg = "cannot pair '" + groups.front().label + "' with '" + groups[k].label + "'";
            if (!missing_other.empty())
                msg += "; seeds missing from '" + groups[k].label + "': " + seed_list(missing_other);
            if (!missing_ref.empty())
                msg += "; seeds missing from '" + groups.front().label + "': " + seed_list(missing_ref);
            throw PairingError(msg);
        }

        std::vector<double> a;
        std::vector<double> b;
        std::vector<double> diff;
        for (const auto& [seed, v] : ref) {
            a.push_back(v);
            b.push_back(finals[k].at(seed));
            diff.push_back(a.back() - b.back());
        }
        Comparison c;
        c.reference = groups.front().label;
        c.other = groups[k].label;
        c.median_difference = median(diff);
        if (a.size() >= 5)
            c.p_value = wilcoxon_signed_rank(a, b).p_value;
        c.efficiency_ratio = efficiency_ratio(groups.front(), groups[k], metric);
        table.comparisons.push_back(c);
    }

    std::vector<double> raw;
    for (const auto& c : table.comparisons)
        if (c.p_value)
            raw.push_back(*c.p_value);
    const auto adjusted = holm_bonferroni(raw);
    std::size_t next = 0;
    for (auto& c : table.comparisons)
        if (c.p_value)
            c.p_adjusted = adjusted[next++];
    return table;
}

void write_comparison_text(std::ostream& out, const ComparisonTable& table)
{
    out << "metric: " << table.metric << "\n\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-28s %4s %14s %14s %14s\n", "group", "n", "median", "q25", "q75");
    out << line;
    for (const auto& g : table.groups) {
        std::snprintf(line, sizeof line, "%-28s %4zu %14s %14s %14s\n", g.label.c_str(), g.n, general(g.median).c_str(),
                      general(g.q25).c_str(), general(g.q75).c_str());
        out << line;
    }
    if (table.comparisons.empty())
        return;
    out << '\n';
    const std::string heading = "versus " + table.groups.front().label;
    std::snprintf(line, sizeof line, "%-28s %14s %10s %10s %10s\n", heading.c_str(), "median diff", "p", "p (holm)",
                  "eff ratio");
    out << line;
    for (const auto& c : table.comparisons) {
        std::snprintf(line, sizeof line, "%-28s %14s %10s %10s %10s\n", c.other.c_str(),
                      general(c.median_difference).c_str(), c.p_value ? fixed(*c.p_value, 5).c_str() : "n/a",
                      c.p_adjusted ? fixed(*c.p_adjusted, 5).c_str() : "n/a",
                      c.efficiency_ratio ? fixed(*c.efficiency_ratio, 3).c_str() : "n/a");
        out << line;
    }
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table)
{
    out << "metric,group,n,median,q25,q75,reference,median_diff,p,p_holm,efficiency_ratio\n";
    for (std::size_t i = 0; i < table.groups.size(); ++i) {
        const auto& g = table.groups[i];
        out << table.metric << ',' << g.label << ',' << g.n << ',' << format_double(g.median) << ','
            << format_double(g.q25) << ',' << format_double(g.q75) << ',';
        if (i == 0) {
            out << ",,,,\n";
            continue;
        }
        const auto& c = table.comparisons[i - 1];
        out << c.reference << ',' << format_double(c.median_difference) << ','
            << (c.p_value ? format_double(*c.p_value) : "") << ','
            << (c.p_adjusted ? format_double(*c.p_adjusted) : "") << ','
            << (c.efficiency_ratio ? format_double(*c.efficiency_ratio) : "") << '\n';
    }
}

} // namespace moqd::bench

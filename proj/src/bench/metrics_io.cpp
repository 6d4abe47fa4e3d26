#include <moqd/bench/metrics_io.hpp>
#include <moqd/errors.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace moqd::bench {

namespace {

double parse_field(std::string_view text, std::size_t line)
{
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ParseError("malformed number '" + std::string(text) + "'", line);
    return value;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos)
            return out;
        start = comma + 1;
    }
}

} // namespace

std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> rows)
{
    out << metrics_header << '\n';
    for (const auto& r : rows) {
        out << r.evaluations << ',' << format_double(r.metrics.moqd_score) << ','
            << format_double(r.metrics.global_hypervolume) << ','
            << (r.metrics.max_sum ? format_double(*r.metrics.max_sum) : std::string()) << ','
            << format_double(r.metrics.coverage) << ',' << format_double(r.seconds) << '\n';
    }
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRecord> rows)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    write_metrics_csv(out, rows);
    if (!out)
        throw std::runtime_error("write failed for " + path.string());
}

std::vector<MetricsRecord> read_metrics_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("empty metrics file", 1);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != metrics_header)
        throw ParseError("unexpected metrics header '" + line + "'", 1);

    std::vector<MetricsRecord> rows;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto fields = split(line);
        if (fields.size() != 6)
            throw ParseError("expected 6 fields, found " + std::to_string(fields.size()), number);
        MetricsRecord r;
        const double evals = parse_field(fields[0], number);
        if (!(evals >= 0.0) || evals != std::floor(evals))
            throw ParseError("evaluation count must be a non-negative integer", number);
        r.evaluations = static_cast<std::size_t>(evals);
        r.metrics.moqd_score = parse_field(fields[1], number);
        r.metrics.global_hypervolume = parse_field(fields[2], number);
        if (!fields[3].empty())
            r.metrics.max_sum = parse_field(fields[3], number);
        r.metrics.coverage = parse_field(fields[4], number);
        r.seconds = parse_field(fields[5], number);
        if (!rows.empty() && r.evaluations <= rows.back().evaluations)
            throw ParseError("evaluation counts must strictly increase", number);
        rows.push_back(r);
    }
    return rows;
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    try {
        return read_metrics_csv(in);
    }
    catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.message(), e.line());
    }
}

double metric_value(const MetricsRecord& row, std::string_view name)
{
    if (name == "moqd_score")
        return row.metrics.moqd_score;
    if (name == "global_hv")
        return row.metrics.global_hypervolume;
    if (name == "max_sum")
        return row.metrics.max_sum.value_or(std::numeric_limits<double>::quiet_NaN());
    if (name == "coverage")
        return row.metrics.coverage;
    throw ConfigError("unknown metric '" + std::string(name) + "'", "metric");
}

} // namespace moqd::bench

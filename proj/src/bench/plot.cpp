#include <moqd/bench/compare.hpp>
#include <moqd/bench/plot.hpp>
#include <moqd/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace moqd::bench {

namespace {

constexpr double width = 720.0;
constexpr double height = 480.0;
constexpr double left = 80.0;
constexpr double right = 200.0;
constexpr double top = 30.0;
constexpr double bottom = 60.0;

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string label_number(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string escape(const std::string& text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Scale {
    double lo, hi, px_lo, px_hi;
    double operator()(double v) const
    {
        if (hi == lo)
            return (px_lo + px_hi) / 2.0;
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

std::array<int, 3> viridis(double t)
{
    static constexpr std::array<std::array<int, 3>, 5> stops = {
        {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(t), stops.size() - 2);
    const double f = t - static_cast<double>(i);
    std::array<int, 3> out{};
    for (int c = 0; c < 3; ++c)
        out[c] = static_cast<int>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
    return out;
}

std::string hex(std::array<int, 3> rgb)
{
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

void axes(std::ostringstream& svg, const Scale& x, const Scale& y, const std::string& xlabel,
          const std::string& ylabel)
{
    svg << "<g class=\"axes\" stroke=\"#333\" fill=\"none\">\n";
    svg << "<line x1=\"" << num(x.px_lo) << "\" y1=\"" << num(y.px_lo) << "\" x2=\"" << num(x.px_hi) << "\" y2=\""
        << num(y.px_lo) << "\"/>\n";
    svg << "<line x1=\"" << num(x.px_lo) << "\" y1=\"" << num(y.px_hi) << "\" x2=\"" << num(x.px_lo) << "\" y2=\""
        << num(y.px_lo) << "\"/>\n</g>\n";
    svg << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double vx = x.lo + (x.hi - x.lo) * i / 4.0;
        const double vy = y.lo + (y.hi - y.lo) * i / 4.0;
        svg << "<text x=\"" << num(x(vx)) << "\" y=\"" << num(y.px_lo + 16)
            << "\" text-anchor=\"middle\">" << label_number(vx) << "</text>\n";
        svg << "<text x=\"" << num(x.px_lo - 6) << "\" y=\"" << num(y(vy) + 4) << "\" text-anchor=\"end\">"
            << label_number(vy) << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<text x=\"" << num((x.px_lo + x.px_hi) / 2) << "\" y=\"" << num(height - 16)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
    svg << "<text x=\"18\" y=\"" << num((top + height - bottom) / 2) << "\" font-family=\"sans-serif\" font-size=\"13\""
        << " text-anchor=\"middle\" transform=\"rotate(-90 18 " << num((top + height - bottom) / 2) << ")\">"
        << escape(ylabel) << "</text>\n";
}

} // namespace

std::string algorithm_color(const std::string& algorithm, std::size_t index)
{
    static const std::map<std::string, std::string> fixed = {
        {"mome_pgx", "#d62728"},        {"mome", "#1f77b4"},   {"mome_crowding", "#17becf"},
        {"mo_pga", "#ff7f0e"},          {"mo_pga_only_forward", "#bcbd22"},
        {"mo_pga_only_energy", "#8c564b"}, {"pga_me", "#2ca02c"}, {"nsga2", "#9467bd"},
        {"spea2", "#e377c2"},
    };
    if (const auto it = fixed.find(algorithm); it != fixed.end())
        return it->second;
    static const std::array<const char*, 4> neutral = {"#7f7f7f", "#393b79", "#637939", "#843c39"};
    return neutral[index % neutral.size()];
}

std::string convergence_svg(const std::vector<RunGroup>& groups, const std::string& metric)
{
    struct Series {
        std::string label, color;
        std::vector<std::pair<double, double>> med, q25, q75;
        bool band;
    };
    std::vector<Series> series;
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        Series s;
        s.label = groups[i].label;
        s.color = algorithm_color(groups[i].algorithm, i);
        s.med = median_curve(groups[i], metric);
        s.band = groups[i].runs.size() > 1;
        if (s.band) {
            s.q25 = quantile_curve(groups[i], metric, 0.25);
            s.q75 = quantile_curve(groups[i], metric, 0.75);
        }
        for (const auto* c : {&s.med, &s.q25, &s.q75})
            for (const auto& [e, v] : *c) {
                if (!std::isfinite(v))
                    continue;
                xlo = std::min(xlo, e);
                xhi = std::max(xhi, e);
                ylo = std::min(ylo, v);
                yhi = std::max(yhi, v);
            }
        series.push_back(std::move(s));
    }
    if (!std::isfinite(xlo)) {
        xlo = ylo = 0.0;
        xhi = yhi = 1.0;
    }
    const Scale x{xlo, xhi, left, width - right};
    const Scale y{ylo, yhi, height - bottom, top};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    axes(svg, x, y, "evaluations", metric);

    for (const auto& s : series) {
        svg << "<g class=\"series\" data-label=\"" << escape(s.label) << "\">\n";
        if (s.band) {
            svg << "<polygon class=\"iqr\" fill=\"" << s.color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
            for (const auto& [e, v] : s.q75)
                svg << num(x(e)) << ',' << num(y(v)) << ' ';
            for (auto it = s.q25.rbegin(); it != s.q25.rend(); ++it)
                svg << num(x(it->first)) << ',' << num(y(it->second)) << ' ';
            svg << "\"/>\n";
        }
        svg << "<polyline class=\"median\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [e, v] : s.med)
            if (std::isfinite(v))
                svg << num(x(e)) << ',' << num(y(v)) << ' ';
        svg << "\"/>\n</g>\n";
    }

    svg << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double ly = top + 10 + 20.0 * static_cast<double>(i);
        svg << "<rect x=\"" << num(width - right + 16) << "\" y=\"" << num(ly - 9) << "\" width=\"14\" height=\"10\" fill=\""
            << series[i].color << "\"/>\n";
        svg << "<text x=\"" << num(width - right + 36) << "\" y=\"" << num(ly) << "\">" << escape(series[i].label)
            << "</text>\n";
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

std::string archive_svg(const MoqdArchive& archive, std::span<const double> reference_point, int resolution)
{
    const auto& centroids = archive.centroids();
    if (centroids.bounds.dim() != 2)
        throw UnsupportedDimensionError("archive plots need a 2-D descriptor space");
    if (resolution < 2)
        throw std::invalid_argument("resolution must be at least 2");

    std::vector<std::optional<double>> hv(archive.cell_count());
    double max_hv = 0.0;
    for (std::size_t i = 0; i < archive.cell_count(); ++i) {
        const auto& cell = archive.cell(i);
        if (cell.empty())
            continue;
        std::vector<ScoreVector> front;
        for (const auto& s : cell)
            front.push_back(s.scores);
        hv[i] = hypervolume(front, reference_point);
        max_hv = std::max(max_hv, *hv[i]);
    }

    // Row-wise runs of pixels per cell, y growing upward in descriptor space.
    const auto& r = centroids.bounds.ranges;
    const double plot = height - top - bottom;
    const double px = plot / resolution;
    std::vector<std::ostringstream> rects(archive.cell_count());
    for (int row = 0; row < resolution; ++row) {
        const double d1 = r[1][0] + (r[1][1] - r[1][0]) * (resolution - row - 0.5) / resolution;
        int start = 0;
        std::size_t current = 0;
        for (int col = 0; col <= resolution; ++col) {
            std::size_t cell = std::numeric_limits<std::size_t>::max();
            if (col < resolution) {
                const double d0 = r[0][0] + (r[0][1] - r[0][0]) * (col + 0.5) / resolution;
                const std::array<double, 2> p{d0, d1};
                cell = nearest_centroid(centroids, p);
            }
            if (col == 0) {
                current = cell;
                continue;
            }
            if (cell != current) {
                rects[current] << "<rect x=\"" << num(left + start * px) << "\" y=\"" << num(top + row * px)
                               << "\" width=\"" << num((col - start) * px + 0.3) << "\" height=\"" << num(px + 0.3)
                               << "\"/>";
                start = col;
                current = cell;
            }
        }
    }

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<g class=\"cells\" shape-rendering=\"crispEdges\">\n";
    for (std::size_t i = 0; i < archive.cell_count(); ++i) {
        if (hv[i])
            svg << "<g data-cell=\"" << i << "\" data-hv=\"" << label_number(*hv[i]) << "\" fill=\""
                << hex(viridis(max_hv > 0.0 ? *hv[i] / max_hv : 0.0)) << "\">";
        else
            svg << "<g data-cell=\"" << i << "\" data-empty=\"true\" fill=\"#eeeeee\">";
        svg << rects[i].str() << "</g>\n";
    }
    svg << "</g>\n";
    svg << "<g class=\"centroids\" fill=\"#222\">\n";
    for (const auto& c : centroids.points) {
        const double cx = left + (c[0] - r[0][0]) / (r[0][1] - r[0][0]) * plot;
        const double cy = top + (1.0 - (c[1] - r[1][0]) / (r[1][1] - r[1][0])) * plot;
        svg << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"1.5\"/>\n";
    }
    svg << "</g>\n";
    const Scale x{r[0][0], r[0][1], left, left + plot};
    const Scale y{r[1][0], r[1][1], top + plot, top};
    axes(svg, x, y, "descriptor 1", "descriptor 2");

    // Colour bar.
    const double bx = left + plot + 30;
    for (int i = 0; i < 50; ++i) {
        const double t = i / 49.0;
        svg << "<rect x=\"" << num(bx) << "\" y=\"" << num(top + plot * (1 - t) - plot / 50) << "\" width=\"16\" height=\""
            << num(plot / 50 + 0.5) << "\" fill=\"" << hex(viridis(t)) << "\"/>\n";
    }
    svg << "<text x=\"" << num(bx + 22) << "\" y=\"" << num(top + 10)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << label_number(max_hv) << "</text>\n";
    svg << "<text x=\"" << num(bx + 22) << "\" y=\"" << num(top + plot)
        << "\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n";
    svg << "<text x=\"" << num(bx) << "\" y=\"" << num(top + plot + 30)
        << "\" font-family=\"sans-serif\" font-size=\"12\">cell hypervolume</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

} // namespace moqd::bench

#ifndef MOQD_BENCH_PLOT_HPP
#define MOQD_BENCH_PLOT_HPP

#include <moqd/archive.hpp>
#include <moqd/bench/runs.hpp>

#include <string>
#include <vector>

namespace moqd::bench {

/// Fixed colour per algorithm id; unknown ids fall back to a neutral palette by index.
std::string algorithm_color(const std::string& algorithm, std::size_t index);

/// Median curve per group against evaluations, with an interquartile band when a group has more
/// than one replication. Returns a standalone SVG document.
std::string convergence_svg(const std::vector<RunGroup>& groups, const std::string& metric);

/// Descriptor-plane heatmap: each pixel takes the colour of its nearest centroid's front
/// hypervolume. Only 2-D descriptor spaces; each cell is one <g data-cell="i"> element.
std::string archive_svg(const MoqdArchive& archive, std::span<const double> reference_point, int resolution = 160);

} // namespace moqd::bench

#endif

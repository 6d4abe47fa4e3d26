#ifndef MOQD_PARETO_HPP
#define MOQD_PARETO_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace moqd {

/// Objective values of one solution. Every objective is maximized.
using ScoreVector = std::vector<double>;
/// Lower corner of the hypervolume box; one entry per objective.
using ReferencePoint = std::vector<double>;

/// True iff `a` is at least as good as `b` everywhere and strictly better somewhere.
/// Equal vectors never dominate each other.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Indices of all points not dominated by another point, in input order.
/// Duplicated non-dominated scores are all kept.
std::vector<std::size_t> extract_front(std::span<const ScoreVector> points);

/// Peels successive fronts: F1 = front of everything, F2 = front of the rest, ...
/// Each index appears in exactly one front; indices inside a front are ascending.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const ScoreVector> points);

struct HypervolumeReport {
    double volume = 0.0;
    /// Points with at least one coordinate below the reference; they add nothing.
    std::vector<std::size_t> below_reference;
};

/// Exact bi-objective hypervolume by a sorted sweep. Dominated points in the input are
/// tolerated and simply add no area.
HypervolumeReport hypervolume_2d_report(std::span<const ScoreVector> front, std::span<const double> ref);
double hypervolume_2d(std::span<const ScoreVector> front, std::span<const double> ref);

struct MonteCarloEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte-Carlo hypervolume over the box [ref, bound]; any objective count.
MonteCarloEstimate hypervolume_mc(std::span<const ScoreVector> front, std::span<const double> ref,
                                  std::span<const double> bound, std::size_t samples, std::uint64_t seed);

/// Exact for two objectives, Monte-Carlo (bounded by the front's componentwise maximum) otherwise.
double hypervolume(std::span<const ScoreVector> front, std::span<const double> ref);

enum class CrowdingMode {
    /// Boundary points use their single neighbour distance. Singleton -> 1.0.
    selection,
    /// Boundary points are infinite. Singleton -> +inf.
    replacement,
};

struct CrowdingOptions {
    /// Divide each objective difference by the front's range in that objective.
    bool normalize = false;
};

/// Mean Manhattan distance to the neighbours along objective 1. Two objectives only.
/// Result is indexed like `front`.
std::vector<double> crowding_distances(std::span<const ScoreVector> front, CrowdingMode mode,
                                       CrowdingOptions options = {});

} // namespace moqd

#endif

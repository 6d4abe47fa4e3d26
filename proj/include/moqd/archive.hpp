#ifndef MOQD_ARCHIVE_HPP
#define MOQD_ARCHIVE_HPP

#include <moqd/pareto.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace moqd {

using Genotype = std::vector<double>;
using Descriptor = std::vector<double>;

struct Bounds {
    std::vector<std::array<double, 2>> ranges; ///< per-dimension [low, high]

    std::size_t dim() const { return ranges.size(); }
    Descriptor clip(std::span<const double> point) const;
    bool contains(std::span<const double> point) const;
};

struct Centroids {
    std::vector<Descriptor> points;
    Bounds bounds;

    std::size_t size() const { return points.size(); }
};

/// Index of the nearest centroid to an already clipped point; ties go to the lowest index.
std::size_t nearest_centroid(const Centroids& centroids, std::span<const double> point);

/// CVT by Lloyd iterations on `n_samples` uniform draws. Deterministic for a fixed seed.
Centroids cvt_centroids(const Bounds& bounds, std::size_t k, std::size_t n_samples, std::uint64_t seed);

struct Solution {
    Genotype genotype;
    ScoreVector scores;
    Descriptor descriptor;
    std::uint64_t id = 0;
};

enum class ReplacementPolicy { random, crowding };
enum class SelectionMode { uniform, crowding };

const char* to_string(ReplacementPolicy policy);
ReplacementPolicy replacement_policy_from_string(const std::string& name);

/// Capacity value meaning "no bound"; only used by tests that need monotone reference runs.
inline constexpr std::size_t unbounded_front = std::numeric_limits<std::size_t>::max();

struct InsertionReport {
    bool added = false;
    std::size_t cell = 0;
    std::vector<std::uint64_t> evicted; ///< ids of removed solutions (may include the candidate itself)
};

struct ArchiveMetrics {
    double moqd_score = 0.0;
    double global_hypervolume = 0.0;
    std::optional<double> max_sum; ///< empty archive has no maximum
    double coverage = 0.0;
    std::size_t reference_violations = 0; ///< stored solutions not weakly dominating the reference
};

/// MAP-Elites archive with a bounded Pareto front in each CVT cell.
///
/// Writes (insert) must be serialized; const members may run concurrently with each other.
/// Solutions inside a cell are kept in insertion order, oldest first.
class MoqdArchive {
public:
    MoqdArchive(Centroids centroids, std::size_t front_capacity, ReplacementPolicy policy,
                std::uint64_t seed = 0);

    const Centroids& centroids() const { return _centroids; }
    std::size_t cell_count() const { return _cells.size(); }
    std::size_t front_capacity() const { return _capacity; }
    ReplacementPolicy policy() const { return _policy; }
    const std::vector<Solution>& cell(std::size_t i) const { return _cells.at(i); }
    std::size_t size() const;
    bool empty() const { return size() == 0; }
    std::size_t occupied_cells() const;

    /// Nearest centroid after clipping to bounds; ties go to the lowest index.
    std::size_t cell_index(std::span<const double> descriptor) const;

    InsertionReport insert(Solution s);

    /// `batch` draws: a cell uniformly among non-empty cells, then a member of its front
    /// (uniformly or proportional to selection-mode crowding distance).
    /// Pointers stay valid until the next insert.
    std::vector<const Solution*> sample_solutions(std::size_t batch, std::mt19937_64& rng, SelectionMode mode) const;
    std::vector<Genotype> sample(std::size_t batch, std::mt19937_64& rng, SelectionMode mode) const;

    ArchiveMetrics metrics(std::span<const double> ref) const;

    /// Every stored solution, cell by cell.
    std::vector<Solution> solutions() const;

    void write_snapshot(std::ostream& out) const;
    static MoqdArchive load_snapshot(std::istream& in, std::uint64_t seed = 0);

private:
    Centroids _centroids;
    std::size_t _capacity;
    ReplacementPolicy _policy;
    std::vector<std::vector<Solution>> _cells;
    std::mt19937_64 _rng;
};

ArchiveMetrics archive_metrics(const MoqdArchive& archive, std::span<const double> ref);

/// Feeds a baseline's population into a passive archive; returns how many were added.
std::size_t passive_insert(MoqdArchive& passive, std::span<const Solution> population);

} // namespace moqd

#endif

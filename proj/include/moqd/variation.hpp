#ifndef MOQD_VARIATION_HPP
#define MOQD_VARIATION_HPP

#include <moqd/archive.hpp>

#include <array>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace moqd {

struct VariationConfig {
    double iso_sigma = 0.005; ///< isotropic Gaussian scale
    double line_sigma = 0.05; ///< scale of the step along (y - x)
    /// Optional per-gene clipping. Empty means unbounded.
    std::optional<std::array<double, 2>> genotype_bounds;

    void validate() const;
};

/// Iso+LineDD: child = x + iso_sigma * eps + line_sigma * xi * (y - x).
Genotype iso_line_dd(std::span<const double> x, std::span<const double> y, const VariationConfig& cfg,
                     std::mt19937_64& rng);
Genotype iso_line_dd(std::span<const double> x, std::span<const double> y, const VariationConfig& cfg,
                     std::uint64_t seed);

struct BatchSplit {
    std::size_t ga = 0;
    std::vector<std::size_t> pg; ///< one count per gradient objective, all equal
    bool pg_starved = false;     ///< true when every pg count is zero despite m >= 1
};

/// Half the batch (rounded up) goes to genetic variation, the rest is shared equally by the
/// `objectives` gradient operators; remainders go back to the genetic share.
BatchSplit split_batch(std::size_t batch, std::size_t objectives);

} // namespace moqd

#endif

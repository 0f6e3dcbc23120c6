#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "mmill/core.hpp"
#include "mmill/simulator.hpp"

namespace mmill {

/// Push-response pairs at analysis scale dt = k dt0.
struct PairSet {
    double dt_minutes = 1.0;
    std::vector<std::pair<double, double>> pairs;  ///< (x, y)
};

/// Non-overlapping sums of k consecutive increments, per segment; the
/// trailing remainder of each segment is dropped. Throws ConfigError for
/// k < 1 or k larger than the series.
IncrementSeries aggregate(const IncrementSeries& series, int k);

/// (increment[j], increment[j + lag]) for every j inside one segment.
/// lag = 1 pairs adjacent windows.
PairSet make_pairs(const IncrementSeries& series, int lag = 1);

// --- sector counting and millness -----------------------------------------

/// Occupancy of the eight sectors within a closed square |x|, |y| <= delta_p*.
/// Pairs with x == 0 or y == 0 are not counted.
struct SectorCounts {
    std::array<std::int64_t, 8> n{};  ///< n[s - 1] for sector s

    std::int64_t total() const noexcept;
    void add(double x, double y, double delta_p_star) noexcept;
    void merge(const SectorCounts& other) noexcept;
};

/// Counts the adjacent pairs of each segment of `values` (already aggregated).
void count_adjacent_pairs(std::span<const double> values, double delta_p_star, SectorCounts& counts) noexcept;

/// 100 * [(n8 - n1) + (n2 - n7) + (n6 - n3) + (n4 - n5)] / n_tot.
/// Throws NumericalError when no pair falls inside the square.
double millness(const SectorCounts& counts);

/// Throws ConfigError if delta_p* <= 0 and NumericalError if n_tot == 0.
double millness(const PairSet& pairs, Money delta_p_star);

/// Standard error of the millness of `counts` under the symmetric null,
/// where each counted pair adds +1 or -1 with equal probability: 100 / sqrt(n_tot).
double millness_null_stderr(const SectorCounts& counts);

struct MillnessReport {
    double dt_minutes = 1.0;
    std::vector<double> rho_per_group;  ///< percent
    double mean_rho = 0.0;
    std::optional<double> std_rho;      ///< sample std across groups; absent for one group
    Money delta_p_star{0.3};
};

/// Builds a report from per-group sector counts.
MillnessReport make_millness_report(double dt_minutes, std::span<const SectorCounts> groups, Money delta_p_star);

/// Aggregates each series by k, pools pairs within each group and reports
/// millness statistics across groups.
MillnessReport millness_report(const SimBatch& batch, int k, Money delta_p_star);

/// Same, for an explicit list of series split evenly into `n_groups` groups.
MillnessReport millness_report(std::span<const IncrementSeries> series, std::int64_t n_groups, int k,
                               Money delta_p_star);

// --- bivariate histograms and asymmetry -----------------------------------

/// Counts of (x, y) pairs on a grid of square bins.
class BivariateHistogram {
public:
    /// Square grid [-extent, extent]^2. Throws ConfigError unless 2 extent /
    /// bin_width is (within 1e-9) a positive integer.
    BivariateHistogram(Money bin_width, Money extent);

    /// General grid with lower-left corner (x_min, y_min).
    BivariateHistogram(Money bin_width, double x_min, double y_min, int nx, int ny);

    /// Adds one pair. Pairs outside the closed grid are counted in n_total only.
    void add(double x, double y) noexcept;
    void add(const PairSet& pairs) noexcept;
    /// Adds the adjacent pairs of `values`.
    void add_adjacent(std::span<const double> values) noexcept;

    /// Throws ConfigError if the grids differ.
    void merge(const BivariateHistogram& other);

    double bin_width() const noexcept { return bin_width_; }
    double x_min() const noexcept { return x_min_; }
    double y_min() const noexcept { return y_min_; }
    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    std::int64_t count(int ix, int iy) const noexcept { return counts_[index(ix, iy)]; }
    std::int64_t n_total() const noexcept { return n_total_; }
    std::int64_t n_in_grid() const noexcept;
    double x_center(int ix) const noexcept { return x_min_ + (ix + 0.5) * bin_width_; }
    double y_center(int iy) const noexcept { return y_min_ + (iy + 0.5) * bin_width_; }

private:
    std::size_t index(int ix, int iy) const noexcept {
        return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(ix);
    }

    double bin_width_;
    double x_min_;
    double y_min_;
    int nx_;
    int ny_;
    std::vector<std::int64_t> counts_;
    std::int64_t n_total_ = 0;
};

/// Values on the bin grid of a histogram (row-major, y outer).
struct DensityGrid {
    double bin_width = 0.01;
    double x_min = 0.0;
    double y_min = 0.0;
    int nx = 0;
    int ny = 0;
    std::vector<double> values;

    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
    double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * nx + ix]; }
    double x_center(int ix) const noexcept { return x_min + (ix + 0.5) * bin_width; }
    double y_center(int iy) const noexcept { return y_min + (iy + 0.5) * bin_width; }
};

/// Probability density per bin: count / (n_total * bin_width^2).
DensityGrid density(const BivariateHistogram& h);

enum class AsymmetryAxis {
    X0,       ///< (x, y) -> (-x, y)
    Y0,       ///< (x, y) -> (x, -y)
    Diag,     ///< (x, y) -> (y, x)
    AntiDiag  ///< (x, y) -> (-y, -x)
};

constexpr std::array<AsymmetryAxis, 4> kAllAxes{AsymmetryAxis::X0, AsymmetryAxis::Y0, AsymmetryAxis::Diag,
                                               AsymmetryAxis::AntiDiag};

std::string_view to_string(AsymmetryAxis axis) noexcept;
/// Accepts x0, y0, diag, antidiag. Throws ConfigError otherwise.
AsymmetryAxis parse_axis(std::string_view name);

/// Image of a point under the axis reflection.
std::pair<double, double> reflect(AsymmetryAxis axis, double x, double y) noexcept;

struct AsymmetryPattern {
    AsymmetryAxis axis = AsymmetryAxis::Y0;
    DensityGrid p_asym;            ///< (P - P o R) / 2
    DensityGrid p_mill_component;  ///< max(p_asym, 0)
};

/// Throws ConfigError when the grid is not closed under the reflection.
AsymmetryPattern asymmetric_component(const DensityGrid& grid, AsymmetryAxis axis);
AsymmetryPattern asymmetric_component(const BivariateHistogram& h, AsymmetryAxis axis);

// --- conditional mean response --------------------------------------------

struct ConditionalMeanBin {
    double x_center;
    double mean_y;
    double stderr_y;  ///< 0 when fewer than two pairs
    std::int64_t count;
    bool low_confidence;  ///< fewer than 30 pairs
};

/// Running sums for <y>_x on bins of width w over [-extent, extent].
class ConditionalMeanAccumulator {
public:
    ConditionalMeanAccumulator(Money x_bin_width, Money extent);

    void add(double x, double y) noexcept;
    void add_adjacent(std::span<const double> values) noexcept;
    /// Adds bin sums in order; merging in a fixed order gives reproducible sums.
    void merge(const ConditionalMeanAccumulator& other);

    std::int64_t n_added() const noexcept { return n_added_; }
    /// Bins with at least one pair.
    std::vector<ConditionalMeanBin> result() const;

private:
    double width_;
    double x_min_;
    int nbins_;
    std::vector<std::int64_t> count_;
    std::vector<double> sum_;
    std::vector<double> sum_sq_;
    std::int64_t n_added_ = 0;
};

/// <y>_x per x-bin over the whole range of x in `pairs`. Throws
/// ConfigError for a non-positive width and NumericalError for no pairs.
std::vector<ConditionalMeanBin> conditional_mean_response(const PairSet& pairs, Money x_bin_width);

// --- streaming batch analysis ---------------------------------------------

/// Observables to accumulate while a batch is simulated, so that large
/// batches never need to be held in memory.
struct StreamRequest {
    std::vector<int> millness_scales;  ///< aggregation factors k
    Money delta_p_star{0.3};

    std::optional<int> histogram_scale;
    Money histogram_bin{0.01};
    Money histogram_extent{0.3};

    std::optional<int> conditional_mean_scale;
    Money conditional_mean_bin{0.01};
    Money conditional_mean_extent{0.3};
};

struct StreamResult {
    std::vector<MillnessReport> millness;  ///< one per requested scale, same order
    std::optional<BivariateHistogram> histogram;
    std::optional<ConditionalMeanAccumulator> conditional_mean;
    SimDiagnostics diagnostics;
};

/// Simulates config.n_series series in parallel and folds each into the
/// requested observables. Reduction runs in series order, so the result is
/// independent of `threads`.
StreamResult simulate_and_analyze(const MillConfig& config, const StreamRequest& request, int threads = 0);

/// Same observables over series already in memory.
StreamResult analyze_series(std::span<const IncrementSeries> series, std::int64_t n_groups,
                            const StreamRequest& request, int threads = 0);

}  // namespace mmill

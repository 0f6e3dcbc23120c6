#include "mmill/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "mmill/error.hpp"
#include "mmill/mill_kernel.hpp"
#include "mmill/parallel.hpp"

namespace mmill {

IncrementSeries aggregate(const IncrementSeries& series, int k) {
    if (k < 1) throw ConfigError("aggregation factor k must be >= 1");
    if (static_cast<std::size_t>(k) > series.size()) {
        throw ConfigError("aggregation factor k = " + std::to_string(k) + " exceeds series length " +
                          std::to_string(series.size()));
    }
    IncrementSeries out;
    out.dt0_minutes = series.dt0_minutes * k;
    const auto segments = series.segments();
    out.increments.reserve(series.size() / static_cast<std::size_t>(k));
    for (const auto segment : segments) {
        const std::size_t m = segment.size() / static_cast<std::size_t>(k);
        if (m == 0) continue;
        if (segments.size() > 1) out.segment_starts.push_back(out.increments.size());
        for (std::size_t j = 0; j < m; ++j) {
            double sum = 0.0;
            for (std::size_t r = 0; r < static_cast<std::size_t>(k); ++r) sum += segment[j * k + r];
            out.increments.push_back(sum);
        }
    }
    if (out.increments.empty()) throw ConfigError("aggregation factor k exceeds every session length");
    if (out.segment_starts.size() == 1) out.segment_starts.clear();
    return out;
}

PairSet make_pairs(const IncrementSeries& series, int lag) {
    if (lag < 1) throw ConfigError("pair lag must be >= 1");
    PairSet out;
    out.dt_minutes = series.dt0_minutes;
    const auto step = static_cast<std::size_t>(lag);
    for (const auto segment : series.segments()) {
        for (std::size_t j = 0; j + step < segment.size(); ++j) out.pairs.emplace_back(segment[j], segment[j + step]);
    }
    return out;
}

// --- sector counting ----------------------------------------------------------

std::int64_t SectorCounts::total() const noexcept { return std::accumulate(n.begin(), n.end(), std::int64_t{0}); }

void SectorCounts::add(double x, double y, double delta_p_star) noexcept {
    if (x == 0.0 || y == 0.0) return;
    if (std::abs(x) > delta_p_star || std::abs(y) > delta_p_star) return;
    ++n[static_cast<std::size_t>(sector_of(x, y).index() - 1)];
}

void SectorCounts::merge(const SectorCounts& other) noexcept {
    for (std::size_t s = 0; s < n.size(); ++s) n[s] += other.n[s];
}

void count_adjacent_pairs(std::span<const double> values, double delta_p_star, SectorCounts& counts) noexcept {
    for (std::size_t j = 0; j + 1 < values.size(); ++j) counts.add(values[j], values[j + 1], delta_p_star);
}

double millness(const SectorCounts& counts) {
    const std::int64_t total = counts.total();
    if (total == 0) throw NumericalError("millness: no pairs inside the delta_p* square");
    const auto& n = counts.n;
    const std::int64_t diff = (n[7] - n[0]) + (n[1] - n[6]) + (n[5] - n[2]) + (n[3] - n[4]);
    return 100.0 * static_cast<double>(diff) / static_cast<double>(total);
}

double millness(const PairSet& pairs, Money delta_p_star) {
    if (!(delta_p_star.value > 0.0)) throw ConfigError("delta_p* must be > 0");
    SectorCounts counts;
    for (const auto& [x, y] : pairs.pairs) counts.add(x, y, delta_p_star.value);
    return millness(counts);
}

double millness_null_stderr(const SectorCounts& counts) {
    const std::int64_t total = counts.total();
    if (total == 0) throw NumericalError("millness: no pairs inside the delta_p* square");
    return 100.0 / std::sqrt(static_cast<double>(total));
}

MillnessReport make_millness_report(double dt_minutes, std::span<const SectorCounts> groups, Money delta_p_star) {
    if (groups.empty()) throw NumericalError("millness report needs at least one group");
    MillnessReport report;
    report.dt_minutes = dt_minutes;
    report.delta_p_star = delta_p_star;
    for (const auto& g : groups) report.rho_per_group.push_back(millness(g));
    const double n = static_cast<double>(report.rho_per_group.size());
    report.mean_rho = std::accumulate(report.rho_per_group.begin(), report.rho_per_group.end(), 0.0) / n;
    if (report.rho_per_group.size() > 1) {
        double ss = 0.0;
        for (double r : report.rho_per_group) ss += (r - report.mean_rho) * (r - report.mean_rho);
        report.std_rho = std::sqrt(ss / (n - 1.0));
    }
    return report;
}

MillnessReport millness_report(std::span<const IncrementSeries> series, std::int64_t n_groups, int k,
                               Money delta_p_star) {
    if (series.empty()) throw ConfigError("millness report needs a nonempty batch");
    if (n_groups < 1 || static_cast<std::int64_t>(series.size()) % n_groups != 0) {
        throw ConfigError("series count must be divisible by the number of groups");
    }
    if (!(delta_p_star.value > 0.0)) throw ConfigError("delta_p* must be > 0");
    const auto per_group = static_cast<std::int64_t>(series.size()) / n_groups;
    std::vector<SectorCounts> groups(static_cast<std::size_t>(n_groups));
    for (std::size_t s = 0; s < series.size(); ++s) {
        const IncrementSeries agg = aggregate(series[s], k);
        auto& counts = groups[s / static_cast<std::size_t>(per_group)];
        for (const auto segment : agg.segments()) count_adjacent_pairs(segment, delta_p_star.value, counts);
    }
    return make_millness_report(series.front().dt0_minutes * k, groups, delta_p_star);
}

MillnessReport millness_report(const SimBatch& batch, int k, Money delta_p_star) {
    return millness_report(batch.series, batch.config.n_groups, k, delta_p_star);
}

// --- histograms -------------------------------------------------------------

namespace {

int grid_bins(double bin_width, double extent) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw ConfigError("bin width must be > 0");
    if (!(extent > 0.0) || !std::isfinite(extent)) throw ConfigError("extent must be > 0");
    const double ratio = 2.0 * extent / bin_width;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded) {
        throw ConfigError("2 * extent must be an integer multiple of the bin width");
    }
    return static_cast<int>(rounded);
}

}  // namespace

BivariateHistogram::BivariateHistogram(Money bin_width, Money extent)
    : BivariateHistogram(bin_width, -extent.value, -extent.value, grid_bins(bin_width.value, extent.value),
                         grid_bins(bin_width.value, extent.value)) {}

BivariateHistogram::BivariateHistogram(Money bin_width, double x_min, double y_min, int nx, int ny)
    : bin_width_(bin_width.value), x_min_(x_min), y_min_(y_min), nx_(nx), ny_(ny) {
    if (!(bin_width_ > 0.0) || !std::isfinite(bin_width_)) throw ConfigError("bin width must be > 0");
    if (nx < 1 || ny < 1) throw ConfigError("histogram needs at least one bin per axis");
    counts_.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0);
}

void BivariateHistogram::add(double x, double y) noexcept {
    ++n_total_;
    const double fx = (x - x_min_) / bin_width_;
    const double fy = (y - y_min_) / bin_width_;
    // Closed grid: the upper edge belongs to the last bin.
    if (!(fx >= 0.0 && fx <= nx_ && fy >= 0.0 && fy <= ny_)) return;
    const int ix = std::min(static_cast<int>(fx), nx_ - 1);
    const int iy = std::min(static_cast<int>(fy), ny_ - 1);
    ++counts_[index(ix, iy)];
}

void BivariateHistogram::add(const PairSet& pairs) noexcept {
    for (const auto& [x, y] : pairs.pairs) add(x, y);
}

void BivariateHistogram::add_adjacent(std::span<const double> values) noexcept {
    for (std::size_t j = 0; j + 1 < values.size(); ++j) add(values[j], values[j + 1]);
}

void BivariateHistogram::merge(const BivariateHistogram& other) {
    if (other.nx_ != nx_ || other.ny_ != ny_ || other.bin_width_ != bin_width_ || other.x_min_ != x_min_ ||
        other.y_min_ != y_min_) {
        throw ConfigError("cannot merge histograms on different grids");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    n_total_ += other.n_total_;
}

std::int64_t BivariateHistogram::n_in_grid() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

DensityGrid density(const BivariateHistogram& h) {
    DensityGrid grid{h.bin_width(), h.x_min(), h.y_min(), h.nx(), h.ny(), {}};
    grid.values.assign(static_cast<std::size_t>(h.nx()) * h.ny(), 0.0);
    if (h.n_total() == 0) return grid;
    const double norm = 1.0 / (static_cast<double>(h.n_total()) * h.bin_width() * h.bin_width());
    for (int iy = 0; iy < h.ny(); ++iy) {
        for (int ix = 0; ix < h.nx(); ++ix) grid.at(ix, iy) = static_cast<double>(h.count(ix, iy)) * norm;
    }
    return grid;
}

// --- asymmetry --------------------------------------------------------------

std::string_view to_string(AsymmetryAxis axis) noexcept {
    switch (axis) {
        case AsymmetryAxis::X0: return "x0";
        case AsymmetryAxis::Y0: return "y0";
        case AsymmetryAxis::Diag: return "diag";
        case AsymmetryAxis::AntiDiag: return "antidiag";
    }
    return "unknown";
}

AsymmetryAxis parse_axis(std::string_view name) {
    for (auto axis : kAllAxes) {
        if (name == to_string(axis)) return axis;
    }
    throw ConfigError("unknown asymmetry axis '" + std::string(name) + "' (expected x0, y0, diag or antidiag)");
}

std::pair<double, double> reflect(AsymmetryAxis axis, double x, double y) noexcept {
    switch (axis) {
        case AsymmetryAxis::X0: return {-x, y};
        case AsymmetryAxis::Y0: return {x, -y};
        case AsymmetryAxis::Diag: return {y, x};
        case AsymmetryAxis::AntiDiag: return {-y, -x};
    }
    return {x, y};
}

namespace {

bool near_zero(double v, double scale) { return std::abs(v) <= 1e-9 * scale; }

void require_closed(const DensityGrid& g, AsymmetryAxis axis) {
    const double w = g.bin_width;
    const bool x_sym = near_zero(2.0 * g.x_min + g.nx * w, w);
    const bool y_sym = near_zero(2.0 * g.y_min + g.ny * w, w);
    bool ok = false;
    switch (axis) {
        case AsymmetryAxis::X0: ok = x_sym; break;
        case AsymmetryAxis::Y0: ok = y_sym; break;
        case AsymmetryAxis::Diag: ok = g.nx == g.ny && near_zero(g.x_min - g.y_min, w); break;
        case AsymmetryAxis::AntiDiag: ok = g.nx == g.ny && near_zero(g.x_min + g.y_min + g.nx * w, w); break;
    }
    if (!ok) {
        throw ConfigError("histogram grid is not closed under the " + std::string(to_string(axis)) +
                          " reflection");
    }
}

std::pair<int, int> reflect_bin(AsymmetryAxis axis, int ix, int iy, int nx, int ny) noexcept {
    switch (axis) {
        case AsymmetryAxis::X0: return {nx - 1 - ix, iy};
        case AsymmetryAxis::Y0: return {ix, ny - 1 - iy};
        case AsymmetryAxis::Diag: return {iy, ix};
        case AsymmetryAxis::AntiDiag: return {nx - 1 - iy, ny - 1 - ix};
    }
    return {ix, iy};
}

}  // namespace

AsymmetryPattern asymmetric_component(const DensityGrid& grid, AsymmetryAxis axis) {
    require_closed(grid, axis);
    AsymmetryPattern pattern;
    pattern.axis = axis;
    pattern.p_asym = grid;
    pattern.p_mill_component = grid;
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const auto [rx, ry] = reflect_bin(axis, ix, iy, grid.nx, grid.ny);
            const double a = 0.5 * (grid.at(ix, iy) - grid.at(rx, ry));
            pattern.p_asym.at(ix, iy) = a;
            pattern.p_mill_component.at(ix, iy) = a > 0.0 ? a : 0.0;
        }
    }
    return pattern;
}

AsymmetryPattern asymmetric_component(const BivariateHistogram& h, AsymmetryAxis axis) {
    return asymmetric_component(density(h), axis);
}

// --- conditional mean ------------------------------------------------------

ConditionalMeanAccumulator::ConditionalMeanAccumulator(Money x_bin_width, Money extent)
    : width_(x_bin_width.value), x_min_(-extent.value), nbins_(grid_bins(x_bin_width.value, extent.value)) {
    count_.assign(static_cast<std::size_t>(nbins_), 0);
    sum_.assign(static_cast<std::size_t>(nbins_), 0.0);
    sum_sq_.assign(static_cast<std::size_t>(nbins_), 0.0);
}

void ConditionalMeanAccumulator::add(double x, double y) noexcept {
    ++n_added_;
    const double f = (x - x_min_) / width_;
    if (!(f >= 0.0 && f <= nbins_)) return;
    const auto b = static_cast<std::size_t>(std::min(static_cast<int>(f), nbins_ - 1));
    ++count_[b];
    sum_[b] += y;
    sum_sq_[b] += y * y;
}

void ConditionalMeanAccumulator::add_adjacent(std::span<const double> values) noexcept {
    for (std::size_t j = 0; j + 1 < values.size(); ++j) add(values[j], values[j + 1]);
}

void ConditionalMeanAccumulator::merge(const ConditionalMeanAccumulator& other) {
    if (other.nbins_ != nbins_ || other.width_ != width_ || other.x_min_ != x_min_) {
        throw ConfigError("cannot merge conditional-mean accumulators on different bins");
    }
    for (std::size_t b = 0; b < count_.size(); ++b) {
        count_[b] += other.count_[b];
        sum_[b] += other.sum_[b];
        sum_sq_[b] += other.sum_sq_[b];
    }
    n_added_ += other.n_added_;
}

namespace {

ConditionalMeanBin finish_bin(double center, std::int64_t n, double sum, double sum_sq) {
    const double dn = static_cast<double>(n);
    const double mean = sum / dn;
    double se = 0.0;
    if (n > 1) {
        const double var = std::max(0.0, (sum_sq - dn * mean * mean) / (dn - 1.0));
        se = std::sqrt(var / dn);
    }
    return ConditionalMeanBin{center, mean, se, n, n < 30};
}

}  // namespace

std::vector<ConditionalMeanBin> ConditionalMeanAccumulator::result() const {
    std::vector<ConditionalMeanBin> out;
    for (int b = 0; b < nbins_; ++b) {
        const auto i = static_cast<std::size_t>(b);
        if (count_[i] == 0) continue;
        out.push_back(finish_bin(x_min_ + (b + 0.5) * width_, count_[i], sum_[i], sum_sq_[i]));
    }
    return out;
}

std::vector<ConditionalMeanBin> conditional_mean_response(const PairSet& pairs, Money x_bin_width) {
    const double w = x_bin_width.value;
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("x bin width must be > 0");
    if (pairs.pairs.empty()) throw NumericalError("conditional_mean_response: empty pair set");
    struct Sums {
        std::int64_t n = 0;
        double sum = 0.0;
        double sum_sq = 0.0;
    };
    std::map<std::int64_t, Sums> bins;
    for (const auto& [x, y] : pairs.pairs) {
        auto& s = bins[static_cast<std::int64_t>(std::floor(x / w))];
        ++s.n;
        s.sum += y;
        s.sum_sq += y * y;
    }
    std::vector<ConditionalMeanBin> out;
    out.reserve(bins.size());
    for (const auto& [b, s] : bins) out.push_back(finish_bin((static_cast<double>(b) + 0.5) * w, s.n, s.sum, s.sum_sq));
    return out;
}

// --- streaming ------------------------------------------------------------

namespace {

struct SeriesPartial {
    std::vector<SectorCounts> counts;  // one per millness scale
    std::optional<ConditionalMeanAccumulator> cond;
};

void fold_series(const IncrementSeries& series, const StreamRequest& req, SeriesPartial& partial,
                 BivariateHistogram* hist) {
    partial.counts.assign(req.millness_scales.size(), SectorCounts{});
    for (std::size_t m = 0; m < req.millness_scales.size(); ++m) {
        const IncrementSeries agg = aggregate(series, req.millness_scales[m]);
        for (const auto segment : agg.segments()) {
            count_adjacent_pairs(segment, req.delta_p_star.value, partial.counts[m]);
        }
    }
    if (hist && req.histogram_scale) {
        const IncrementSeries agg = aggregate(series, *req.histogram_scale);
        for (const auto segment : agg.segments()) hist->add_adjacent(segment);
    }
    if (req.conditional_mean_scale) {
        partial.cond.emplace(req.conditional_mean_bin, req.conditional_mean_extent);
        const IncrementSeries agg = aggregate(series, *req.conditional_mean_scale);
        for (const auto segment : agg.segments()) partial.cond->add_adjacent(segment);
    }
}

template <class SeriesSource>
StreamResult run_stream(std::int64_t n_series, std::int64_t n_groups, double dt0_minutes,
                        const StreamRequest& req, int threads, SeriesSource&& source) {
    if (n_series < 1) throw ConfigError("stream analysis needs at least one series");
    if (n_groups < 1 || n_series % n_groups != 0) {
        throw ConfigError("series count must be divisible by the number of groups");
    }
    if (!(req.delta_p_star.value > 0.0)) throw ConfigError("delta_p* must be > 0");
    for (int k : req.millness_scales) {
        if (k < 1) throw ConfigError("aggregation factor k must be >= 1");
    }

    const auto n = static_cast<std::size_t>(n_series);
    std::vector<SeriesPartial> partials(n);
    std::vector<SimDiagnostics> diags(n);

    StreamResult result;
    if (req.histogram_scale) result.histogram.emplace(req.histogram_bin, req.histogram_extent);

    const int n_threads = resolve_threads(threads);
    // Exceptions may not leave an OpenMP region; capture the first one.
    std::exception_ptr failure;
#pragma omp parallel num_threads(n_threads)
    {
        std::optional<BivariateHistogram> local_hist;
        if (req.histogram_scale) local_hist.emplace(req.histogram_bin, req.histogram_extent);
#pragma omp for schedule(dynamic, 1)
        for (std::int64_t k = 0; k < n_series; ++k) {
            try {
                const auto idx = static_cast<std::size_t>(k);
                const IncrementSeries series = source(k, diags[idx]);
                fold_series(series, req, partials[idx], local_hist ? &*local_hist : nullptr);
            } catch (...) {
#pragma omp critical(mmill_stream_failure)
                if (!failure) failure = std::current_exception();
            }
        }
        // Integer bin counts: merge order does not affect the result.
        if (local_hist) {
#pragma omp critical(mmill_stream_hist)
            result.histogram->merge(*local_hist);
        }
    }
    if (failure) std::rethrow_exception(failure);

    const auto per_group = static_cast<std::size_t>(n_series / n_groups);
    for (std::size_t m = 0; m < req.millness_scales.size(); ++m) {
        std::vector<SectorCounts> groups(static_cast<std::size_t>(n_groups));
        for (std::size_t s = 0; s < n; ++s) groups[s / per_group].merge(partials[s].counts[m]);
        result.millness.push_back(
            make_millness_report(dt0_minutes * req.millness_scales[m], groups, req.delta_p_star));
    }
    if (req.conditional_mean_scale) {
        result.conditional_mean.emplace(req.conditional_mean_bin, req.conditional_mean_extent);
        for (const auto& p : partials) result.conditional_mean->merge(*p.cond);
    }
    for (const auto& d : diags) result.diagnostics.merge(d);
    return result;
}

}  // namespace

StreamResult simulate_and_analyze(const MillConfig& config, const StreamRequest& request, int threads) {
    config.validate();
    return run_stream(config.n_series, config.n_groups, config.dt0_minutes, request, threads,
                      [&config](std::int64_t k, SimDiagnostics& diag) {
                          return simulate_composite(config, static_cast<std::uint64_t>(k), &diag);
                      });
}

StreamResult analyze_series(std::span<const IncrementSeries> series, std::int64_t n_groups,
                            const StreamRequest& request, int threads) {
    if (series.empty()) throw ConfigError("stream analysis needs at least one series");
    return run_stream(static_cast<std::int64_t>(series.size()), n_groups, series.front().dt0_minutes, request,
                      threads, [series](std::int64_t k, SimDiagnostics&) {
                          return series[static_cast<std::size_t>(k)];
                      });
}

}  // namespace mmill

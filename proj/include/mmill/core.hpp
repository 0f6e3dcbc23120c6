#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mmill/rng.hpp"
#include "mmill/strategy.hpp"

namespace mmill {

/// An amount of money in dollars. Price increments may be negative.
struct Money {
    double value = 0.0;

    constexpr Money() = default;
    constexpr explicit Money(double dollars) : value(dollars) {}

    friend constexpr auto operator<=>(Money, Money) = default;
};

/// Two-sided exponential with zero mean and scale sigma:
/// p(y) = exp(-|y| / sigma) / (2 sigma). Standard deviation is sqrt(2) sigma.
class LaplaceParams {
public:
    /// Throws ConfigError unless sigma is finite and positive.
    explicit LaplaceParams(Money sigma);

    double sigma() const noexcept { return sigma_; }

private:
    double sigma_;
};

/// Response delay distribution on l = 1, 2, ...:
/// P(l) = (1 - q) q^(l-1) with q = exp(-1 / L).
class DelayParams {
public:
    /// Throws ConfigError unless L is finite and positive.
    explicit DelayParams(double l_scale);

    double l_scale() const noexcept { return l_scale_; }

private:
    double l_scale_;
};

/// Model and batch parameters. Defaults are the elementary-mill setup.
struct MillConfig {
    Money sigma0{0.02};
    /// When true, sigma0 is read as the standard deviation of the base
    /// increments and the Laplace scale is sigma0 / sqrt(2).
    bool sigma_is_std = false;
    double nu0 = 0.12;
    double l_scale = 3.0;
    /// Upper bound on the number of mill scales; 1 is the elementary mill.
    int n_scales = 1;
    /// Ratio nu_i / nu_{i-1}.
    double scale_decay = 0.8;
    /// Scales with nu_i below this floor are not simulated.
    double nu_floor = 1e-3;
    std::int64_t series_len = 195'000;
    double dt0_minutes = 1.0;
    std::int64_t n_series = 2000;
    std::int64_t n_groups = 20;
    std::uint64_t seed = 1;
    StrategyMix strategy{};

    /// Throws ConfigError describing the first violated constraint.
    void validate() const;

    /// Laplace parameters of the base-scale noise.
    LaplaceParams base_laplace() const;

    /// Activation probabilities nu_1, nu_2, ... after truncation.
    std::vector<double> scale_weights() const;

    std::int64_t series_per_group() const { return n_series / n_groups; }

    friend bool operator==(const MillConfig&, const MillConfig&) = default;
};

/// Elementary-mill preset: sigma0 = $0.02, nu0 = 0.12, L = 3.
MillConfig elementary_preset();

/// Composite-mill preset: nu_i = 0.12 * 0.8^(i-1), truncated at the floor.
MillConfig composite_preset();

/// Uniformly spaced price increments at base scale dt0.
///
/// Ingested data may contain several sessions; `segment_starts` lists the
/// index where each session begins so that no pair or aggregation window
/// straddles two sessions. Simulated series have a single segment.
struct IncrementSeries {
    double dt0_minutes = 1.0;
    std::vector<double> increments;
    std::vector<std::size_t> segment_starts;

    std::size_t size() const noexcept { return increments.size(); }

    /// Contiguous pieces of the series, one per session.
    std::vector<std::span<const double>> segments() const;

    /// Throws ConfigError if empty, non-finite, or segment markers are invalid.
    void validate() const;
};

/// Exponential draw with the given mean (> 0). Result is strictly positive.
double sample_exponential(double mean, Rng& rng) noexcept;

double sample_laplace(const LaplaceParams& params, Rng& rng) noexcept;
double laplace_pdf(double y, const LaplaceParams& params) noexcept;
double laplace_cdf(double y, const LaplaceParams& params) noexcept;

int sample_delay(const DelayParams& params, Rng& rng) noexcept;
double delay_pmf(int l, const DelayParams& params) noexcept;

}  // namespace mmill

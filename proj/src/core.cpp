#include "mmill/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "mmill/error.hpp"

namespace mmill {

namespace {

[[noreturn]] void config_fail(const std::string& what) { throw ConfigError(what); }

}  // namespace

std::string_view to_string(StrategyMode mode) noexcept {
    switch (mode) {
        case StrategyMode::Mill: return "mill";
        case StrategyMode::Contrarian: return "contrarian";
        case StrategyMode::TrendFollowing: return "trend";
    }
    return "unknown";
}

StrategyMix::StrategyMix(double w_mill, double w_contrarian, double w_trend)
    : w_mill_(w_mill), w_contrarian_(w_contrarian), w_trend_(w_trend) {
    for (double w : {w_mill, w_contrarian, w_trend}) {
        if (!std::isfinite(w) || w < 0.0) config_fail("strategy weights must be finite and >= 0");
    }
    if (std::abs(w_mill + w_contrarian + w_trend - 1.0) > 1e-12) {
        config_fail("strategy weights must sum to 1");
    }
}

StrategyMix StrategyMix::normalized(double w_mill, double w_contrarian, double w_trend) {
    for (double w : {w_mill, w_contrarian, w_trend}) {
        if (!std::isfinite(w) || w < 0.0) config_fail("strategy weights must be finite and >= 0");
    }
    const double total = w_mill + w_contrarian + w_trend;
    if (!(total > 0.0)) config_fail("strategy weights must not all be zero");
    StrategyMix mix;
    mix.w_mill_ = w_mill / total;
    mix.w_contrarian_ = w_contrarian / total;
    mix.w_trend_ = 1.0 - mix.w_mill_ - mix.w_contrarian_;
    if (mix.w_trend_ < 0.0) mix.w_trend_ = 0.0;
    return mix;
}

bool StrategyMix::is_pure() const noexcept {
    return w_mill_ == 1.0 || w_contrarian_ == 1.0 || w_trend_ == 1.0;
}

StrategyMode StrategyMix::pick(double u) const noexcept {
    if (u < w_mill_) return StrategyMode::Mill;
    if (u < w_mill_ + w_contrarian_) return StrategyMode::Contrarian;
    if (w_trend_ > 0.0) return StrategyMode::TrendFollowing;
    // Rounding pushed u past the cumulative sum; fall back to the last mode with weight.
    return w_contrarian_ > 0.0 ? StrategyMode::Contrarian : StrategyMode::Mill;
}

LaplaceParams::LaplaceParams(Money sigma) : sigma_(sigma.value) {
    if (!std::isfinite(sigma_) || sigma_ <= 0.0) config_fail("Laplace sigma must be finite and > 0");
}

DelayParams::DelayParams(double l_scale) : l_scale_(l_scale) {
    if (!std::isfinite(l_scale) || l_scale <= 0.0) config_fail("delay scale L must be finite and > 0");
}

void MillConfig::validate() const {
    std::ostringstream err;
    if (!std::isfinite(sigma0.value) || sigma0.value <= 0.0) err << "sigma0 must be > 0";
    else if (!(nu0 >= 0.0 && nu0 <= 1.0)) err << "nu0 must lie in [0, 1]";
    else if (!std::isfinite(l_scale) || l_scale <= 0.0) err << "l_scale must be > 0";
    else if (n_scales < 1) err << "n_scales must be >= 1";
    else if (!(scale_decay > 0.0 && scale_decay <= 1.0)) err << "scale_decay must lie in (0, 1]";
    else if (!(nu_floor >= 0.0 && nu_floor < 1.0)) err << "nu_floor must lie in [0, 1)";
    else if (!std::isfinite(dt0_minutes) || dt0_minutes <= 0.0) err << "dt0_minutes must be > 0";
    else if (series_len <= n_scales) err << "series_len must exceed n_scales";
    else if (n_series < 1) err << "n_series must be >= 1";
    else if (n_groups < 1) err << "n_groups must be >= 1";
    else if (n_series % n_groups != 0) err << "n_series must be divisible by n_groups";
    if (!err.str().empty()) config_fail(err.str());

    double total = 0.0;
    for (double nu : scale_weights()) total += nu;
    if (total > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "cumulative activation probability sum(nu_i) = " << total << " exceeds 1";
        config_fail(msg.str());
    }
}

LaplaceParams MillConfig::base_laplace() const {
    return LaplaceParams(Money(sigma_is_std ? sigma0.value / std::sqrt(2.0) : sigma0.value));
}

std::vector<double> MillConfig::scale_weights() const {
    std::vector<double> weights;
    double nu = nu0;
    for (int i = 1; i <= n_scales; ++i) {
        // The first scale is always kept so that nu0 = 0 still yields a (silent) scale.
        if (i > 1 && nu < nu_floor) break;
        weights.push_back(nu);
        nu *= scale_decay;
    }
    return weights;
}

MillConfig elementary_preset() { return MillConfig{}; }

MillConfig composite_preset() {
    MillConfig cfg;
    cfg.n_scales = 64;
    cfg.scale_decay = 0.8;
    return cfg;
}

std::vector<std::span<const double>> IncrementSeries::segments() const {
    std::vector<std::span<const double>> out;
    const std::span<const double> all(increments);
    if (segment_starts.empty()) {
        out.push_back(all);
        return out;
    }
    for (std::size_t s = 0; s < segment_starts.size(); ++s) {
        const std::size_t begin = segment_starts[s];
        const std::size_t end = s + 1 < segment_starts.size() ? segment_starts[s + 1] : all.size();
        out.push_back(all.subspan(begin, end - begin));
    }
    return out;
}

void IncrementSeries::validate() const {
    if (increments.empty()) config_fail("increment series is empty");
    if (!std::isfinite(dt0_minutes) || dt0_minutes <= 0.0) config_fail("dt0 must be > 0");
    for (std::size_t i = 0; i < increments.size(); ++i) {
        if (!std::isfinite(increments[i])) {
            config_fail("non-finite increment at index " + std::to_string(i));
        }
    }
    if (!segment_starts.empty()) {
        if (segment_starts.front() != 0) config_fail("first segment must start at 0");
        for (std::size_t s = 1; s < segment_starts.size(); ++s) {
            if (segment_starts[s] <= segment_starts[s - 1] || segment_starts[s] >= increments.size()) {
                config_fail("segment starts must be strictly increasing and in range");
            }
        }
    }
}

double sample_exponential(double mean, Rng& rng) noexcept {
    return -mean * std::log(rng.uniform_open());
}

double sample_laplace(const LaplaceParams& params, Rng& rng) noexcept {
    // One 64-bit draw: the high 53 bits give the magnitude, bit 0 the sign.
    const std::uint64_t bits = rng();
    const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    const double magnitude = -params.sigma() * std::log(u);
    return (bits & 1U) ? -magnitude : magnitude;
}

double laplace_pdf(double y, const LaplaceParams& params) noexcept {
    const double s = params.sigma();
    return std::exp(-std::abs(y) / s) / (2.0 * s);
}

double laplace_cdf(double y, const LaplaceParams& params) noexcept {
    const double s = params.sigma();
    return y < 0.0 ? 0.5 * std::exp(y / s) : 1.0 - 0.5 * std::exp(-y / s);
}

int sample_delay(const DelayParams& params, Rng& rng) noexcept {
    // P(floor(L * E) >= k) = exp(-k / L) for E ~ Exp(1): a geometric law on {0, 1, ...}.
    const double steps = std::floor(params.l_scale() * -std::log(rng.uniform_open()));
    constexpr double kCap = static_cast<double>(std::numeric_limits<int>::max() - 1);
    return 1 + static_cast<int>(steps < kCap ? steps : kCap);
}

double delay_pmf(int l, const DelayParams& params) noexcept {
    if (l < 1) return 0.0;
    const double inv_l = 1.0 / params.l_scale();
    return -std::expm1(-inv_l) * std::exp(-(l - 1) * inv_l);
}

}  // namespace mmill

#pragma once

#include <array>
#include <string_view>

namespace mmill {

enum class StrategyMode { Mill, Contrarian, TrendFollowing };

constexpr std::array<StrategyMode, 3> kAllModes{StrategyMode::Mill, StrategyMode::Contrarian,
                                                StrategyMode::TrendFollowing};

std::string_view to_string(StrategyMode mode) noexcept;

/// Weights of the three asymmetry-generating modes. Each weight is
/// non-negative and the three sum to one within 1e-12.
class StrategyMix {
public:
    /// Pure market mill.
    StrategyMix() = default;

    /// Throws ConfigError on negative or non-normalized weights.
    StrategyMix(double w_mill, double w_contrarian, double w_trend);

    /// Rescales non-negative weights to sum to one.
    static StrategyMix normalized(double w_mill, double w_contrarian, double w_trend);

    double mill() const noexcept { return w_mill_; }
    double contrarian() const noexcept { return w_contrarian_; }
    double trend() const noexcept { return w_trend_; }

    /// True when one mode carries all the weight; no draw is needed to pick it.
    bool is_pure() const noexcept;

    /// Maps a uniform u in [0, 1) to a mode by cumulative weight.
    StrategyMode pick(double u) const noexcept;

    friend bool operator==(const StrategyMix&, const StrategyMix&) = default;

private:
    double w_mill_ = 1.0;
    double w_contrarian_ = 0.0;
    double w_trend_ = 0.0;
};

}  // namespace mmill

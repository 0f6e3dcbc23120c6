#pragma once

#include <functional>

#include "mmill/core.hpp"
#include "mmill/rng.hpp"
#include "mmill/strategy.hpp"

namespace mmill {

/// One of the eight open wedges cut by x = 0, y = 0, y = x and y = -x.
///
/// Numbered 1..8 counterclockwise from S1 = {x > 0, 0 < y < x}. The even
/// sectors S2, S4, S6, S8 are exactly the support of the mill indicator.
class SectorId {
public:
    /// Throws ConfigError unless 1 <= index <= 8.
    explicit SectorId(int index);

    int index() const noexcept { return index_; }
    bool is_even() const noexcept { return index_ % 2 == 0; }

    friend bool operator==(SectorId, SectorId) = default;

private:
    int index_;
};

/// Mill indicator with the factor-2 normalization: 2 on the trend-preserving
/// segment |y| > |x| (same sign as x) and on the contrarian segment
/// 0 < |y| <= |x| (opposite sign), 0 elsewhere.
///
/// Throws NumericalError for x == 0; zero pushes never activate the mill.
int f_mill(double x, double y);

/// Sector containing (x, y). Points on a boundary ray go to the lower of the
/// two adjacent sector indices; the origin maps to S1.
SectorId sector_of(double x, double y) noexcept;

/// Probability that a mill response to push x is trend-preserving:
/// exp(-|x| / sigma). It exceeds 1/2 exactly when |x| < sigma ln 2.
double trend_branch_probability(double x, const LaplaceParams& base) noexcept;

/// Closed-form mean of the mill response for x > 0:
/// 2 exp(-x / sigma) (x + sigma) - sigma. Odd in x.
double mill_mean(double x, const LaplaceParams& base) noexcept;

/// Draw from P_mill(y | x) = f_mill(x, y) P_0(y).
///
/// For x > 0: with probability exp(-x / sigma) returns x + Exp(sigma),
/// otherwise a draw from the exponential truncated to [-x, 0).
/// Mirror image for x < 0. Throws NumericalError for x == 0.
double sample_mill(double x, const LaplaceParams& base, Rng& rng);

/// Mill delegates to sample_mill. Contrarian and TrendFollowing return the
/// half of P_0 with sign opposite to (resp. equal to) sign(x), renormalized.
double sample_mode(StrategyMode mode, double x, const LaplaceParams& base, Rng& rng);

/// Density of sample_mode(mode, x, ...) at y.
double mode_density(StrategyMode mode, double x, double y, const LaplaceParams& base);

/// Activation probability as a function of the push. Defaults to the step
/// function nu(0) = 0, nu(x != 0) = nu0.
using ActivationFn = std::function<double(double x)>;
ActivationFn step_activation(double nu0);

/// Randomized asymmetric response: 0 when x == 0; otherwise 0 with
/// probability 1 - nu and a mode response with probability nu, the mode
/// being drawn from `mix`.
double sample_asym(const StrategyMix& mix, double nu, double x, const LaplaceParams& base, Rng& rng);
double sample_asym(const StrategyMix& mix, const ActivationFn& nu, double x,
                   const LaplaceParams& base, Rng& rng);

/// P(y | x) for a single interval y = y_rand + y_asym with y_rand ~ P_0 and
/// y_asym ~ (1 - nu) delta + nu f_mill P_0, evaluated by adaptive quadrature
/// of the convolution integral. Test oracle; not used by the simulator.
///
/// Throws NumericalError for x == 0 or when the quadrature error estimate
/// exceeds its tolerance.
double conditional_density_oracle(double y, double x, double nu, const LaplaceParams& base);

}  // namespace mmill

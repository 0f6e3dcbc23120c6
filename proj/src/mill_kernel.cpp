#include "mmill/mill_kernel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "mmill/error.hpp"

namespace mmill {

namespace {

void require_nonzero_push(double x, const char* op) {
    if (x == 0.0 || !std::isfinite(x)) {
        std::ostringstream msg;
        msg << op << ": push x must be finite and nonzero (got " << x << ")";
        throw NumericalError(msg.str());
    }
}

double sign_of(double x) noexcept { return x > 0.0 ? 1.0 : -1.0; }

// Positive-push mill draw; the caller applies the sign of the push.
double sample_mill_positive(double ax, double sigma, Rng& rng) noexcept {
    const double u = ax / sigma;
    if (rng.uniform() < std::exp(-u)) {
        // Trend-preserving branch on (x, inf); y == x belongs to the odd side.
        const double y = ax + sample_exponential(sigma, rng);
        return y > ax ? y : std::nextafter(ax, std::numeric_limits<double>::infinity());
    }
    // Contrarian branch: |y| on (0, x] from the exponential truncated at x,
    // by inverse CDF with v in (0, 1].
    const double v = 1.0 - rng.uniform();
    double magnitude = -sigma * std::log1p(v * std::expm1(-u));
    if (magnitude > ax) magnitude = ax;
    if (!(magnitude > 0.0)) magnitude = std::numeric_limits<double>::denorm_min();
    return -magnitude;
}

}  // namespace

SectorId::SectorId(int index) : index_(index) {
    if (index < 1 || index > 8) throw ConfigError("sector index must lie in 1..8");
}

int f_mill(double x, double y) {
    require_nonzero_push(x, "f_mill");
    if (x > 0.0) return (y > x || (y >= -x && y < 0.0)) ? 2 : 0;
    return (y < x || (y > 0.0 && y <= -x)) ? 2 : 0;
}

SectorId sector_of(double x, double y) noexcept {
    int s = 1;
    if (x > 0.0 && y >= 0.0) s = y > x ? 2 : 1;
    else if (x <= 0.0 && y > 0.0) s = x == 0.0 ? 2 : (y > -x ? 3 : (y < -x ? 4 : 3));
    else if (x < 0.0 && y <= 0.0) s = y == 0.0 ? 4 : (y < x ? 6 : 5);
    else if (x >= 0.0 && y < 0.0) s = x == 0.0 ? 6 : (y > -x ? 8 : 7);
    return SectorId(s);
}

double trend_branch_probability(double x, const LaplaceParams& base) noexcept {
    return std::exp(-std::abs(x) / base.sigma());
}

double mill_mean(double x, const LaplaceParams& base) noexcept {
    const double s = base.sigma();
    const double ax = std::abs(x);
    return sign_of(x) * (2.0 * std::exp(-ax / s) * (ax + s) - s);
}

double sample_mill(double x, const LaplaceParams& base, Rng& rng) {
    require_nonzero_push(x, "sample_mill");
    return sign_of(x) * sample_mill_positive(std::abs(x), base.sigma(), rng);
}

double sample_mode(StrategyMode mode, double x, const LaplaceParams& base, Rng& rng) {
    require_nonzero_push(x, "sample_mode");
    switch (mode) {
        case StrategyMode::Mill:
            return sign_of(x) * sample_mill_positive(std::abs(x), base.sigma(), rng);
        case StrategyMode::Contrarian:
            return -sign_of(x) * sample_exponential(base.sigma(), rng);
        case StrategyMode::TrendFollowing:
            return sign_of(x) * sample_exponential(base.sigma(), rng);
    }
    return 0.0;
}

double mode_density(StrategyMode mode, double x, double y, const LaplaceParams& base) {
    require_nonzero_push(x, "mode_density");
    switch (mode) {
        case StrategyMode::Mill: return f_mill(x, y) * laplace_pdf(y, base);
        case StrategyMode::Contrarian: return x * y < 0.0 ? 2.0 * laplace_pdf(y, base) : 0.0;
        case StrategyMode::TrendFollowing: return x * y > 0.0 ? 2.0 * laplace_pdf(y, base) : 0.0;
    }
    return 0.0;
}

ActivationFn step_activation(double nu0) {
    return [nu0](double x) { return x == 0.0 ? 0.0 : nu0; };
}

double sample_asym(const StrategyMix& mix, double nu, double x, const LaplaceParams& base, Rng& rng) {
    if (x == 0.0) return 0.0;
    if (!(rng.uniform() < nu)) return 0.0;
    const StrategyMode mode = mix.is_pure() ? mix.pick(0.0) : mix.pick(rng.uniform());
    return sample_mode(mode, x, base, rng);
}

double sample_asym(const StrategyMix& mix, const ActivationFn& nu, double x,
                   const LaplaceParams& base, Rng& rng) {
    return sample_asym(mix, x == 0.0 ? 0.0 : nu(x), x, base, rng);
}

double conditional_density_oracle(double y, double x, double nu, const LaplaceParams& base) {
    require_nonzero_push(x, "conditional_density_oracle");
    if (x < 0.0) return conditional_density_oracle(-y, -x, nu, base);

    using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double sigma = base.sigma();
    auto integrand = [&](double z) { return laplace_pdf(y - z, base) * 2.0 * laplace_pdf(z, base); };

    double total = 0.0;
    double error_sum = 0.0;
    double l1_sum = 0.0;
    auto integrate = [&](double a, double b) {
        if (!(b > a)) return;
        double error = 0.0;
        double l1 = 0.0;
        // On short pieces the integrand is smooth at the node spacing and the
        // adaptive error estimate is dominated by endpoint rounding.
        const unsigned depth = b - a < 0.01 * sigma ? 0 : 15;
        total += Quad::integrate(integrand, a, b, depth, 1e-11, &error, &l1);
        error_sum += error;
        l1_sum += l1;
    };
    // Split each support segment at the kink z = y of the noise density.
    auto integrate_split = [&](double a, double b) {
        if (y > a && y < b) {
            integrate(a, y);
            integrate(y, b);
        } else {
            integrate(a, b);
        }
    };
    integrate_split(-x, 0.0);
    // The trend-preserving tail, in pieces of growing length, truncated at
    // exp(-80) relative weight.
    const double tail_start = std::max(x, y);
    if (y > x) integrate(x, y);
    double a = tail_start;
    for (double k : {2.0, 6.0, 15.0, 35.0, 80.0}) {
        const double b = tail_start + k * sigma;
        integrate(a, b);
        a = b;
    }

    if (!std::isfinite(total) || error_sum > 1e-9 * std::max(l1_sum, 1.0)) {
        std::ostringstream msg;
        msg << "conditional_density_oracle: quadrature did not converge at y=" << y << " x=" << x
            << " (estimate " << total << ", error " << error_sum << ", L1 " << l1_sum << ")";
        throw NumericalError(msg.str());
    }
    return (1.0 - nu) * laplace_pdf(y, base) + nu * total;
}

}  // namespace mmill

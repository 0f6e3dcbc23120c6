#pragma once

// Independent numerical oracles used by the tests. Nothing here calls into
// the library under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace mmill::testing {

/// Composite 10-point Gauss-Legendre rule on [a, b] with subintervals no
/// wider than h. Open rule: the endpoints are never evaluated.
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b, double h) {
    static constexpr double node[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                       0.8650633666889845, 0.9739065285171717};
    static constexpr double weight[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                         0.1494513491505806, 0.0666713443086881};
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h)));
    const double step = (b - a) / n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double c = a + (i + 0.5) * step;
        const double r = 0.5 * step;
        double piece = 0.0;
        for (int k = 0; k < 5; ++k) piece += weight[k] * (f(c - r * node[k]) + f(c + r * node[k]));
        total += r * piece;
    }
    return total;
}

/// Integral over consecutive breakpoints; f must be smooth between them.
inline double integrate_pieces(const std::function<double(double)>& f, std::vector<double> breaks, double h) {
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] > breaks[i]) total += gauss_legendre(f, breaks[i], breaks[i + 1], h);
    }
    return total;
}

/// Root of a continuous f on [lo, hi] with a sign change, by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14) {
    double flo = f(lo);
    for (int i = 0; i < 200 && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if ((fmid < 0) == (flo < 0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    return d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

/// Upper tail probability of the chi-square distribution.
inline double chi2_sf(double chi2, double dof) { return boost::math::gamma_q(0.5 * dof, 0.5 * chi2); }

struct MeanStderr {
    double mean;
    double stderr_;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1) / n)};
}

/// Sector by explicit wedge inequalities (open wedges, counterclockwise
/// from the positive x-axis); 0 for points on a boundary line.
inline int sector_by_inequalities(double x, double y) {
    if (x == 0 || y == 0 || y == x || y == -x) return 0;
    if (x > 0 && y > 0 && y < x) return 1;
    if (x > 0 && y > 0 && y > x) return 2;
    if (x < 0 && y > 0 && y > -x) return 3;
    if (x < 0 && y > 0 && y < -x) return 4;
    if (x < 0 && y < 0 && y > x) return 5;
    if (x < 0 && y < 0 && y < x) return 6;
    if (x > 0 && y < 0 && y < -x) return 7;
    return 8;
}

}  // namespace mmill::testing

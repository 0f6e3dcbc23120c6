#pragma once

#include <cstdint>
#include <vector>

#include "mmill/core.hpp"

namespace mmill {

/// One mill component of a composite mill.
struct ScaleSpec {
    int index;              ///< i >= 1
    double nu;              ///< nu0 * decay^(i-1)
    int push_window;        ///< pushes sum the i most recent base increments
    DelayParams delay;      ///< P(l | i L)
    LaplaceParams response; ///< base scale sqrt(i) sigma0
};

/// Mill components of `config` after truncation at the nu floor.
std::vector<ScaleSpec> scale_specs(const MillConfig& config);

/// Per-scale counters collected during a forward pass.
struct ScaleDiagnostics {
    std::int64_t evaluations = 0;  ///< interval boundaries at which the scale was considered
    std::int64_t activations = 0;  ///< of which the scale switched on
    std::int64_t zero_pushes = 0;  ///< activations skipped because the push was exactly 0
    std::int64_t deposits = 0;     ///< responses added inside the series
    std::int64_t dropped = 0;      ///< responses that fell past the series end
};

struct SimDiagnostics {
    std::vector<ScaleDiagnostics> scales;

    void merge(const SimDiagnostics& other);
    std::int64_t total_deposits() const noexcept;
    std::int64_t total_dropped() const noexcept;
    double dropped_fraction() const noexcept;
};

/// A single deposited response, recorded when tracing is requested.
struct Deposit {
    std::int64_t push_end;  ///< index of the last interval of the push window
    int scale;
    std::int64_t target;    ///< interval receiving the response
    double amount;
};

/// i.i.d. Laplace noise of the configured base scale, drawn from the
/// stream `stream` of `config.seed`.
IncrementSeries simulate_noise(const MillConfig& config, std::uint64_t stream = 0);

/// Single-scale mill. Requires config.n_scales == 1; identical to
/// simulate_composite for that case.
IncrementSeries simulate_elementary(const MillConfig& config, std::uint64_t stream = 0,
                                    SimDiagnostics* diagnostics = nullptr);

/// Multiscale mill. Starts from simulate_noise(config, stream) and makes one
/// causal forward pass. At every interval index t >= S - 1 (S scales) each
/// scale i independently activates with probability nu_i; an active scale
/// takes the sum of the i most recent realized increments as its push x and,
/// when x != 0, adds a response drawn with base scale sqrt(i) sigma0 to the
/// interval t + l, l ~ P(l | i L). Responses past the series end are dropped.
///
/// Activations are drawn as geometric gaps between successive switch-on
/// times, which is equivalent to an independent Bernoulli(nu_i) per step.
IncrementSeries simulate_composite(const MillConfig& config, std::uint64_t stream = 0,
                                   SimDiagnostics* diagnostics = nullptr,
                                   std::vector<Deposit>* trace = nullptr);

struct SimBatch {
    MillConfig config;
    std::vector<IncrementSeries> series;
    SimDiagnostics diagnostics;

    /// Series indices [g * per_group, (g + 1) * per_group).
    std::int64_t group_of(std::int64_t series_index) const {
        return series_index / config.series_per_group();
    }
};

/// n_series independent series, series k drawn from stream k. Runs the
/// series in parallel over `threads` OpenMP threads (0 = runtime default).
/// The result does not depend on the thread count.
SimBatch simulate_batch(const MillConfig& config, int threads = 0);

/// Serial reference implementation of simulate_batch.
SimBatch simulate_batch_serial(const MillConfig& config);

}  // namespace mmill

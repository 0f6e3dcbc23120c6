#include "mmill/simulator.hpp"

#include <cmath>
#include <limits>

#include "mmill/error.hpp"
#include "mmill/mill_kernel.hpp"
#include "mmill/parallel.hpp"

namespace mmill {

namespace {

constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

// Number of steps until the next success of a Bernoulli(p) sequence, >= 1.
std::int64_t geometric_gap(double p, double log1m_p, Rng& rng) noexcept {
    if (p >= 1.0) return 1;
    if (p <= 0.0) return kNever;
    const double steps = std::floor(std::log(rng.uniform_open()) / log1m_p);
    if (steps >= 9.0e18) return kNever;
    return 1 + static_cast<std::int64_t>(steps);
}

std::int64_t advance(std::int64_t from, std::int64_t gap) noexcept {
    return gap == kNever || gap >= kNever - 1 - from ? kNever : from + gap;
}

}  // namespace

std::vector<ScaleSpec> scale_specs(const MillConfig& config) {
    const LaplaceParams base = config.base_laplace();
    std::vector<ScaleSpec> specs;
    const auto weights = config.scale_weights();
    specs.reserve(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const int i = static_cast<int>(k) + 1;
        specs.push_back(ScaleSpec{i, weights[k], i, DelayParams(i * config.l_scale),
                                  LaplaceParams(Money(std::sqrt(static_cast<double>(i)) * base.sigma()))});
    }
    return specs;
}

void SimDiagnostics::merge(const SimDiagnostics& other) {
    if (scales.size() < other.scales.size()) scales.resize(other.scales.size());
    for (std::size_t i = 0; i < other.scales.size(); ++i) {
        scales[i].evaluations += other.scales[i].evaluations;
        scales[i].activations += other.scales[i].activations;
        scales[i].zero_pushes += other.scales[i].zero_pushes;
        scales[i].deposits += other.scales[i].deposits;
        scales[i].dropped += other.scales[i].dropped;
    }
}

std::int64_t SimDiagnostics::total_deposits() const noexcept {
    std::int64_t n = 0;
    for (const auto& s : scales) n += s.deposits;
    return n;
}

std::int64_t SimDiagnostics::total_dropped() const noexcept {
    std::int64_t n = 0;
    for (const auto& s : scales) n += s.dropped;
    return n;
}

double SimDiagnostics::dropped_fraction() const noexcept {
    const auto landed = total_deposits();
    const auto dropped = total_dropped();
    return landed + dropped == 0 ? 0.0 : static_cast<double>(dropped) / static_cast<double>(landed + dropped);
}

IncrementSeries simulate_noise(const MillConfig& config, std::uint64_t stream) {
    config.validate();
    const LaplaceParams base = config.base_laplace();
    Rng rng = Rng::for_stream(config.seed, stream);
    IncrementSeries out;
    out.dt0_minutes = config.dt0_minutes;
    out.increments.resize(static_cast<std::size_t>(config.series_len));
    for (double& v : out.increments) v = sample_laplace(base, rng);
    return out;
}

IncrementSeries simulate_elementary(const MillConfig& config, std::uint64_t stream,
                                    SimDiagnostics* diagnostics) {
    if (config.n_scales != 1) throw ConfigError("simulate_elementary requires n_scales = 1");
    return simulate_composite(config, stream, diagnostics);
}

IncrementSeries simulate_composite(const MillConfig& config, std::uint64_t stream,
                                   SimDiagnostics* diagnostics, std::vector<Deposit>* trace) {
    config.validate();
    const LaplaceParams base = config.base_laplace();
    const auto specs = scale_specs(config);
    const std::int64_t n = config.series_len;
    const auto n_specs = static_cast<std::int64_t>(specs.size());

    // Noise first, then the forward pass continues on the same stream.
    Rng rng = Rng::for_stream(config.seed, stream);
    IncrementSeries out;
    out.dt0_minutes = config.dt0_minutes;
    out.increments.resize(static_cast<std::size_t>(n));
    for (double& v : out.increments) v = sample_laplace(base, rng);
    double* inc = out.increments.data();

    const StrategyMix& mix = config.strategy;
    const bool pure_mix = mix.is_pure();
    const StrategyMode pure_mode = mix.pick(0.0);

    const std::int64_t start = n_specs - 1;
    std::vector<double> log1m_nu(specs.size());
    std::vector<std::int64_t> next(specs.size());
    for (std::size_t k = 0; k < specs.size(); ++k) {
        log1m_nu[k] = std::log1p(-specs[k].nu);
        next[k] = advance(start - 1, geometric_gap(specs[k].nu, log1m_nu[k], rng));
    }

    SimDiagnostics local;
    if (diagnostics) {
        local.scales.resize(specs.size());
        for (auto& s : local.scales) s.evaluations = n - start;
    }

    for (std::int64_t t = start; t < n; ++t) {
        for (std::size_t k = 0; k < specs.size(); ++k) {
            if (next[k] != t) continue;
            next[k] = advance(t, geometric_gap(specs[k].nu, log1m_nu[k], rng));
            const ScaleSpec& spec = specs[k];

            double push = 0.0;
            for (std::int64_t j = t - spec.push_window + 1; j <= t; ++j) push += inc[j];

            if (diagnostics) ++local.scales[k].activations;
            if (push == 0.0) {
                if (diagnostics) ++local.scales[k].zero_pushes;
                continue;
            }
            const StrategyMode mode = pure_mix ? pure_mode : mix.pick(rng.uniform());
            const double response = sample_mode(mode, push, spec.response, rng);
            const std::int64_t target = t + sample_delay(spec.delay, rng);
            if (target < n) {
                inc[target] += response;
                if (diagnostics) ++local.scales[k].deposits;
                if (trace) trace->push_back(Deposit{t, spec.index, target, response});
            } else if (diagnostics) {
                ++local.scales[k].dropped;
            }
        }
    }

    if (diagnostics) diagnostics->merge(local);
    return out;
}

SimBatch simulate_batch_serial(const MillConfig& config) {
    config.validate();
    SimBatch batch;
    batch.config = config;
    batch.series.resize(static_cast<std::size_t>(config.n_series));
    for (std::int64_t k = 0; k < config.n_series; ++k) {
        batch.series[static_cast<std::size_t>(k)] =
            simulate_composite(config, static_cast<std::uint64_t>(k), &batch.diagnostics);
    }
    return batch;
}

SimBatch simulate_batch(const MillConfig& config, int threads) {
    config.validate();
    SimBatch batch;
    batch.config = config;
    const auto n = static_cast<std::size_t>(config.n_series);
    batch.series.resize(n);
    std::vector<SimDiagnostics> diags(n);

    const int n_threads = resolve_threads(threads);
#pragma omp parallel for schedule(dynamic, 1) num_threads(n_threads)
    for (std::int64_t k = 0; k < config.n_series; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        batch.series[idx] = simulate_composite(config, static_cast<std::uint64_t>(k), &diags[idx]);
    }

    for (const auto& d : diags) batch.diagnostics.merge(d);
    return batch;
}

}  // namespace mmill

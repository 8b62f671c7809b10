#include "vup/mc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "vup/error.hpp"
#include "vup/numeric.hpp"

namespace vup {

namespace {

constexpr std::size_t kBatchSize = std::size_t{1} << 16;
constexpr std::uint64_t kRetryFactor = 1000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t sampler_dimension(const SamplerSpec& sampler) {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GaussianSampler>) {
                if (s.sigma.size() != s.mean.size() || s.lower.size() != s.mean.size() ||
                    s.upper.size() != s.mean.size())
                    throw InvalidArgument("gaussian sampler: mean, sigma, lower and upper must have equal length");
                for (std::size_t d = 0; d < s.mean.size(); ++d) {
                    if (!(s.sigma[d] > 0.0)) throw InvalidArgument("gaussian sampler: sigma must be > 0");
                    if (!(s.lower[d] < s.upper[d])) throw InvalidArgument("gaussian sampler: lower must be < upper");
                }
                return s.mean.size();
            } else if constexpr (std::is_same_v<T, UniformSampler>) {
                if (s.lower.size() != s.upper.size())
                    throw InvalidArgument("uniform sampler: lower and upper must have equal length");
                for (std::size_t d = 0; d < s.lower.size(); ++d)
                    if (!(s.lower[d] < s.upper[d])) throw InvalidArgument("uniform sampler: lower must be < upper");
                return s.lower.size();
            } else {
                return s.point.size();
            }
        },
        sampler);
}

// Fills one batch of samples, row-major count x dim.
std::uint64_t draw_batch(const SamplerSpec& sampler, std::uint64_t key, std::span<double> out, std::size_t dim) {
    const std::size_t count = out.size() / dim;
    CounterRng rng(key);
    return std::visit(
        [&](const auto& s) -> std::uint64_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GaussianSampler>) {
                std::uint64_t proposals = 0;
                const std::uint64_t budget = kRetryFactor * count * dim;
                std::vector<std::normal_distribution<double>> normal;
                for (std::size_t d = 0; d < dim; ++d) normal.emplace_back(s.mean[d], s.sigma[d]);
                for (std::size_t i = 0; i < count; ++i) {
                    for (std::size_t d = 0; d < dim; ++d) {
                        double v;
                        do {
                            if (++proposals > budget) {
                                throw DegenerateDistribution(
                                    "mc: truncated gaussian rejection budget exhausted (acceptance rate " +
                                    std::to_string(static_cast<double>(i * dim + d) / static_cast<double>(proposals)) +
                                    ")");
                            }
                            v = normal[d](rng);
                        } while (v < s.lower[d] || v > s.upper[d]);
                        out[i * dim + d] = v;
                    }
                }
                return proposals;
            } else if constexpr (std::is_same_v<T, UniformSampler>) {
                std::vector<std::uniform_real_distribution<double>> uniform;
                for (std::size_t d = 0; d < dim; ++d) uniform.emplace_back(s.lower[d], s.upper[d]);
                for (std::size_t i = 0; i < count; ++i)
                    for (std::size_t d = 0; d < dim; ++d) out[i * dim + d] = uniform[d](rng);
                return count * dim;
            } else {
                for (std::size_t i = 0; i < count; ++i) std::copy(s.point.begin(), s.point.end(), out.begin() + i * dim);
                return 0;
            }
        },
        sampler);
}

struct SampledOutputs {
    std::vector<double> outputs;
    std::uint64_t proposals = 0;
    McTimings timings;
};

SampledOutputs sample_outputs(const ModelFunction& model, const SamplerSpec& sampler, std::size_t samples,
                              std::uint64_t seed, unsigned threads) {
    if (samples == 0) throw InvalidArgument("mc: sample count must be >= 1");
    const std::size_t dim = sampler_dimension(sampler);
    if (dim != model.arity())
        throw InvalidArgument("mc: sampler dimension " + std::to_string(dim) + " != model arity " +
                              std::to_string(model.arity()));

    SampledOutputs result;
    const std::size_t batches = (samples + kBatchSize - 1) / kBatchSize;
    std::vector<double> inputs(samples * dim);
    std::vector<std::uint64_t> proposals(batches, 0);

    auto start = Clock::now();
    parallel_for(
        batches,
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t b = begin; b < end; ++b) {
                const std::size_t first = b * kBatchSize;
                const std::size_t count = std::min(kBatchSize, samples - first);
                proposals[b] = draw_batch(sampler, CounterRng::derive(seed, b),
                                          std::span<double>(inputs).subspan(first * dim, count * dim), dim);
            }
        },
        threads);
    result.timings.sample_s = seconds_since(start);
    for (auto p : proposals) result.proposals += p;

    start = Clock::now();
    result.outputs.resize(samples);
    parallel_for(
        samples,
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i)
                result.outputs[i] = model(std::span<const double>(inputs).subspan(i * dim, dim));
        },
        threads);
    result.timings.eval_s = seconds_since(start);
    return result;
}

std::vector<double> bin_outputs(std::vector<double>& outputs, const OutputBinning& binning, bool sort_first) {
    if (sort_first) std::sort(outputs.begin(), outputs.end());
    std::vector<std::uint64_t> counts(binning.size(), 0);
    for (double y : outputs) ++counts[binning.locate(y)];
    std::vector<double> p(binning.size());
    const double n = static_cast<double>(outputs.size());
    for (std::size_t r = 0; r < p.size(); ++r) p[r] = static_cast<double>(counts[r]) / n;
    return p;
}

}  // namespace

GaussianSampler truncated_gaussian(const GridSpec& bounds, std::vector<double> mean, std::vector<double> sigma) {
    GaussianSampler s{std::move(mean), std::move(sigma), {}, {}};
    for (const auto& d : bounds.dims) {
        s.lower.push_back(d.lower);
        s.upper.push_back(d.upper);
    }
    return s;
}

McResult mc_propagate(const ModelFunction& model, const SamplerSpec& sampler, const McConfig& cfg,
                      unsigned threads) {
    if (cfg.bins == 0) throw InvalidArgument("mc: bin count must be >= 1");
    auto sampled = sample_outputs(model, sampler, cfg.samples, cfg.seed, threads);
    const auto start = Clock::now();
    const OutputBinning binning =
        cfg.fixed_binning ? *cfg.fixed_binning : OutputBinning::spanning(sampled.outputs, cfg.bins);
    auto p = bin_outputs(sampled.outputs, binning, cfg.sort_before_binning);
    sampled.timings.sortbin_s = seconds_since(start);
    return McResult{ProbabilityVector::from_masses(std::move(p), 1e-12), binning, sampled.timings,
                    sampled.proposals};
}

OutputProbabilityMatrix mc_propagate_many(const ModelFunction& model, const MeasurementScenario& scenario,
                                          const GridSpec& bounds, const McConfig& cfg, unsigned threads,
                                          McTimings* timings) {
    scenario.validate();
    bounds.validate();
    if (bounds.x_dimensions() != 1) throw InvalidArgument("mc: exactly one x dimension is supported");
    const std::size_t dim = bounds.dims.size();
    std::vector<double> sigma(dim, scenario.sigma_alpha);
    sigma[0] = scenario.sigma_ell;

    auto column_sampler = [&](std::size_t l) {
        std::vector<double> mean(dim, 0.0);
        mean[0] = scenario.locations[l];
        return truncated_gaussian(bounds, std::move(mean), sigma);
    };
    auto column_seed = [&](std::size_t l) { return cfg.seed ^ static_cast<std::uint64_t>(l); };

    McTimings total;
    if (cfg.fixed_binning) {
        OutputProbabilityMatrix out(*cfg.fixed_binning, scenario.locations);
        for (std::size_t l = 0; l < scenario.locations.size(); ++l) {
            McConfig column_cfg = cfg;
            column_cfg.seed = column_seed(l);
            auto r = mc_propagate(model, column_sampler(l), column_cfg, threads);
            std::copy(r.probabilities.values().begin(), r.probabilities.values().end(), out.column(l).begin());
            total += r.timings;
        }
        if (timings) *timings = total;
        return out;
    }

    if (cfg.bins == 0) throw InvalidArgument("mc: bin count must be >= 1");
    std::vector<std::vector<double>> outputs(scenario.locations.size());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t l = 0; l < outputs.size(); ++l) {
        auto sampled = sample_outputs(model, column_sampler(l), cfg.samples, column_seed(l), threads);
        const auto [mn, mx] = std::minmax_element(sampled.outputs.begin(), sampled.outputs.end());
        lo = std::min(lo, *mn);
        hi = std::max(hi, *mx);
        outputs[l] = std::move(sampled.outputs);
        total += sampled.timings;
    }
    const OutputBinning binning(lo, hi, cfg.bins);
    OutputProbabilityMatrix out(binning, scenario.locations);
    for (std::size_t l = 0; l < outputs.size(); ++l) {
        const auto start = Clock::now();
        auto p = bin_outputs(outputs[l], binning, cfg.sort_before_binning);
        std::copy(p.begin(), p.end(), out.column(l).begin());
        total.sortbin_s += seconds_since(start);
    }
    if (timings) *timings = total;
    return out;
}

double total_variation_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw InvalidArgument("total_variation_distance: length mismatch");
    CompensatedSum acc;
    for (std::size_t i = 0; i < p.size(); ++i) acc.add(std::abs(p[i] - q[i]));
    return 0.5 * acc.value();
}

}  // namespace vup

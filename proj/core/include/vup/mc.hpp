#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "vup/distribution.hpp"
#include "vup/grid.hpp"
#include "vup/model.hpp"
#include "vup/parallel.hpp"
#include "vup/propagation.hpp"

namespace vup {

/// Counter-based generator: draw i of stream `key` is mix64(key + i * gamma)
/// (SplitMix64). Streams are addressable without serial draw ordering.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ + (++counter_) * kGamma); }

    static std::uint64_t mix64(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Independent key for sub-stream `index` of `key`.
    static std::uint64_t derive(std::uint64_t key, std::uint64_t index) noexcept {
        return mix64(mix64(key) ^ mix64(index + kGamma));
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Product Gaussian truncated to the box [lower, upper] (by rejection).
struct GaussianSampler {
    std::vector<double> mean;
    std::vector<double> sigma;
    std::vector<double> lower;
    std::vector<double> upper;
};

struct UniformSampler {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct DeltaSampler {
    std::vector<double> point;
};

using SamplerSpec = std::variant<GaussianSampler, UniformSampler, DeltaSampler>;

/// Gaussian truncated to the bounds of a grid spec.
GaussianSampler truncated_gaussian(const GridSpec& bounds, std::vector<double> mean, std::vector<double> sigma);

struct McConfig {
    std::size_t samples = 1'000'000;
    std::size_t bins = 100;
    std::uint64_t seed = 0;
    /// Bin into this axis instead of the sample range.
    std::optional<OutputBinning> fixed_binning;
    /// Sort outputs before binning, matching the sort-then-bin cost profile.
    bool sort_before_binning = false;
};

struct McTimings {
    double sample_s = 0.0;
    double eval_s = 0.0;
    double sortbin_s = 0.0;

    McTimings& operator+=(const McTimings& o) {
        sample_s += o.sample_s;
        eval_s += o.eval_s;
        sortbin_s += o.sortbin_s;
        return *this;
    }
};

struct McResult {
    ProbabilityVector probabilities;
    OutputBinning binning;
    McTimings timings;
    std::uint64_t proposals = 0;
};

/// Samples cfg.samples inputs (deterministic in cfg.seed), evaluates the
/// model and bins the outputs. Sampling is done in fixed-size batches with
/// per-batch counter streams, so results do not depend on `threads`.
McResult mc_propagate(const ModelFunction& model, const SamplerSpec& sampler, const McConfig& cfg,
                      unsigned threads = default_threads());

/// Runs mc_propagate independently for every location with seed ^ l and a
/// Gaussian centered at (l, 0...) truncated to `bounds`. Without a fixed
/// binning the shared axis spans the range of all columns' samples.
OutputProbabilityMatrix mc_propagate_many(const ModelFunction& model, const MeasurementScenario& scenario,
                                          const GridSpec& bounds, const McConfig& cfg,
                                          unsigned threads = default_threads(), McTimings* timings = nullptr);

/// Half the L1 distance between two distributions on the same binning.
double total_variation_distance(std::span<const double> p, std::span<const double> q);

}  // namespace vup

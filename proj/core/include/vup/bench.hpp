#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "vup/model.hpp"

namespace vup {

struct BenchRow {
    std::string method;  // "vup" or "mc"
    std::string backend = "cpu";
    std::size_t n = 0;
    std::size_t l = 0;
    std::size_t reps = 0;
    double median_s = 0.0;
    double min_s = 0.0;
    double max_s = 0.0;
    /// Per-phase medians: matrix_build_s / pdf_build_s / propagate_s for vup,
    /// sample_s / eval_s / sortbin_s for mc.
    std::map<std::string, double> breakdown;
    /// False when min_s is under 100x the measured timer resolution.
    bool reliable = true;
    /// True when every repetition produced bitwise identical output.
    bool deterministic = true;
};

struct BenchResult {
    std::vector<BenchRow> rows;

    const BenchRow* find(const std::string& method, std::size_t n, std::size_t l) const;
};

struct SweepConfig {
    std::vector<std::size_t> grid_sizes{100'000};
    std::vector<std::size_t> l_values{1, 2, 5, 10, 20, 50, 100};
    std::size_t bins = 500;
    std::size_t reps = 3;
    std::uint64_t seed = 0;
    double sigma_ell = 0.5;
    double sigma_alpha = 0.25;
    double ell_lower = -2.0;
    double ell_upper = 2.0;
    bool mc_sort = true;
    bool run_vup = true;
    bool run_mc = true;
    unsigned threads = 1;
};

/// Times VUP and MC for every (N, L). The model must take (x, alpha); the
/// VUP grid is round(sqrt N) nodes per axis and MC draws N samples per
/// location. A VUP run counts matrix build, pdf build and propagation, so
/// the L = 1 cost includes the one-off matrix. One warm-up run per point is
/// discarded.
BenchResult run_sweep(const ModelFunction& model, const SweepConfig& cfg);

struct ComplexityThresholds {
    /// t_vup(100) / t_vup(1) must be below this.
    double vup_ratio_max = 50.0;
    double mc_ratio_min = 50.0;
    double mc_ratio_max = 200.0;
    /// Smallest L with t_vup < t_mc must not exceed this.
    std::size_t crossover_max = 20;
    /// t_vup(1) and t_mc(1) within this factor of each other.
    double single_factor = 5.0;
    std::size_t l_low = 1;
    std::size_t l_high = 100;
};

struct ComplexityCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;
    std::string detail;
};

struct ComplexityReport {
    std::vector<ComplexityCheck> checks;
    /// Non-gating: median time non-decreasing in L for each method.
    std::vector<ComplexityCheck> notes;

    bool passed() const;
};

/// Throws InvalidArgument if a required (method, N, L) point is missing.
ComplexityReport assert_complexity(const BenchResult& result, std::size_t n, const ComplexityThresholds& t = {});

/// method,N,L,reps,median_s,min_s,max_s,breakdown_json
void write_bench_csv(std::ostream& os, const BenchResult& result);

/// Smallest observable steady_clock increment, in seconds.
double timer_resolution();

}  // namespace vup

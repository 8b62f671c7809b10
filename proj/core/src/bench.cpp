#include "vup/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "vup/distribution.hpp"
#include "vup/error.hpp"
#include "vup/hash.hpp"
#include "vup/mc.hpp"
#include "vup/propagation.hpp"

namespace vup {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::uint64_t fingerprint(const OutputProbabilityMatrix& out) {
    Fnv1a h;
    for (std::size_t l = 0; l < out.cols(); ++l) {
        const auto c = out.column(l);
        h.bytes(c.data(), c.size_bytes());
    }
    h.real(out.binning().lower()).real(out.binning().upper());
    return h.digest();
}

struct Sample {
    double total = 0.0;
    std::map<std::string, double> phases;
    std::uint64_t digest = 0;
};

BenchRow summarize_runs(std::string method, std::size_t n, std::size_t l, const std::vector<Sample>& runs,
                        double resolution) {
    BenchRow row;
    row.method = std::move(method);
    row.n = n;
    row.l = l;
    row.reps = runs.size();
    std::vector<double> totals;
    for (const auto& r : runs) totals.push_back(r.total);
    row.median_s = median(totals);
    row.min_s = *std::min_element(totals.begin(), totals.end());
    row.max_s = *std::max_element(totals.begin(), totals.end());
    for (const auto& [key, _] : runs.front().phases) {
        std::vector<double> v;
        for (const auto& r : runs) v.push_back(r.phases.at(key));
        row.breakdown[key] = median(v);
    }
    row.reliable = row.min_s >= 100.0 * resolution;
    row.deterministic = std::all_of(runs.begin(), runs.end(), [&](const Sample& s) { return s.digest == runs.front().digest; });
    return row;
}

GridSpec bench_grid(std::size_t n, const SweepConfig& cfg) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (side == 0) throw InvalidArgument("bench: grid size must be >= 1");
    return GridSpec{{
        {"x", Role::x, cfg.ell_lower - 4.0 * cfg.sigma_ell, cfg.ell_upper + 4.0 * cfg.sigma_ell, side},
        {"alpha", Role::alpha, -4.0 * cfg.sigma_alpha, 4.0 * cfg.sigma_alpha, side},
    }};
}

Sample run_vup(const ModelFunction& model, const GridSpec& spec, const MeasurementScenario& scenario,
               const SweepConfig& cfg) {
    Sample s;
    auto t0 = Clock::now();
    auto grid = std::make_shared<const Grid>(spec);
    const auto matrix = build_model_matrix(model, grid, cfg.bins, cfg.threads);
    s.phases["matrix_build_s"] = seconds_since(t0);
    auto t1 = Clock::now();
    const auto pdfs = scenario_matrix(grid, scenario, PdfCentering::absolute, cfg.threads);
    s.phases["pdf_build_s"] = seconds_since(t1);
    auto t2 = Clock::now();
    const auto out = propagate_many(matrix, pdfs, cfg.threads);
    s.phases["propagate_s"] = seconds_since(t2);
    s.total = seconds_since(t0);
    s.digest = fingerprint(out);
    return s;
}

Sample run_mc(const ModelFunction& model, const GridSpec& spec, const MeasurementScenario& scenario, std::size_t n,
              const SweepConfig& cfg) {
    McConfig mc;
    mc.samples = n;
    mc.bins = cfg.bins;
    mc.seed = cfg.seed;
    mc.sort_before_binning = cfg.mc_sort;
    McTimings timings;
    Sample s;
    const auto t0 = Clock::now();
    const auto out = mc_propagate_many(model, scenario, spec, mc, cfg.threads, &timings);
    s.total = seconds_since(t0);
    s.phases = {{"sample_s", timings.sample_s}, {"eval_s", timings.eval_s}, {"sortbin_s", timings.sortbin_s}};
    s.digest = fingerprint(out);
    return s;
}

}  // namespace

const BenchRow* BenchResult::find(const std::string& method, std::size_t n, std::size_t l) const {
    for (const auto& r : rows)
        if (r.method == method && r.n == n && r.l == l) return &r;
    return nullptr;
}

double timer_resolution() {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 64; ++i) {
        const auto a = Clock::now();
        auto b = Clock::now();
        while (b == a) b = Clock::now();
        best = std::min(best, std::chrono::duration<double>(b - a).count());
    }
    return best;
}

BenchResult run_sweep(const ModelFunction& model, const SweepConfig& cfg) {
    if (cfg.reps < 3) throw InvalidArgument("bench: repetitions must be >= 3");
    if (model.arity() != 2) throw InvalidArgument("bench: model must take (x, alpha)");
    if (cfg.grid_sizes.empty() || cfg.l_values.empty()) throw InvalidArgument("bench: empty sweep");
    const double resolution = timer_resolution();
    BenchResult result;
    for (std::size_t n : cfg.grid_sizes) {
        const auto spec = bench_grid(n, cfg);
        for (std::size_t l : cfg.l_values) {
            if (l == 0) throw InvalidArgument("bench: L must be >= 1");
            const auto scenario =
                MeasurementScenario::evenly_spaced(cfg.ell_lower, cfg.ell_upper, l, cfg.sigma_ell, cfg.sigma_alpha);
            if (cfg.run_vup) {
                run_vup(model, spec, scenario, cfg);
                std::vector<Sample> runs;
                for (std::size_t r = 0; r < cfg.reps; ++r) runs.push_back(run_vup(model, spec, scenario, cfg));
                result.rows.push_back(summarize_runs("vup", n, l, runs, resolution));
            }
            if (cfg.run_mc) {
                run_mc(model, spec, scenario, n, cfg);
                std::vector<Sample> runs;
                for (std::size_t r = 0; r < cfg.reps; ++r) runs.push_back(run_mc(model, spec, scenario, n, cfg));
                result.rows.push_back(summarize_runs("mc", n, l, runs, resolution));
            }
        }
    }
    return result;
}

bool ComplexityReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ComplexityCheck& c) { return c.passed; });
}

ComplexityReport assert_complexity(const BenchResult& result, std::size_t n, const ComplexityThresholds& t) {
    auto need = [&](const char* method, std::size_t l) {
        const auto* row = result.find(method, n, l);
        if (!row)
            throw InvalidArgument(std::string("assert_complexity: missing ") + method + " row at N=" + std::to_string(n) +
                                  ", L=" + std::to_string(l) +
                                  " (thresholds l_low/l_high must be in the sweep)");
        return row->median_s;
    };
    char buf[160];
    ComplexityReport report;

    const double vup_lo = need("vup", t.l_low), vup_hi = need("vup", t.l_high);
    const double mc_lo = need("mc", t.l_low), mc_hi = need("mc", t.l_high);

    const double vup_ratio = vup_hi / vup_lo;
    std::snprintf(buf, sizeof buf, "t_vup(%zu)/t_vup(%zu) = %.3g, limit < %.3g", t.l_high, t.l_low, vup_ratio, t.vup_ratio_max);
    report.checks.push_back({"vup_sublinear", vup_ratio < t.vup_ratio_max, vup_ratio, buf});

    const double mc_ratio = mc_hi / mc_lo;
    std::snprintf(buf, sizeof buf, "t_mc(%zu)/t_mc(%zu) = %.3g, band [%.3g, %.3g]", t.l_high, t.l_low, mc_ratio,
                  t.mc_ratio_min, t.mc_ratio_max);
    report.checks.push_back({"mc_linear", mc_ratio >= t.mc_ratio_min && mc_ratio <= t.mc_ratio_max, mc_ratio, buf});

    std::vector<std::size_t> ls;
    for (const auto& r : result.rows)
        if (r.n == n && r.method == "vup" && result.find("mc", n, r.l)) ls.push_back(r.l);
    std::sort(ls.begin(), ls.end());
    std::size_t crossover = 0;
    for (std::size_t l : ls)
        if (need("vup", l) < need("mc", l)) {
            crossover = l;
            break;
        }
    if (crossover)
        std::snprintf(buf, sizeof buf, "first L with t_vup < t_mc = %zu, limit <= %zu", crossover, t.crossover_max);
    else
        std::snprintf(buf, sizeof buf, "t_vup never below t_mc over the sweep");
    report.checks.push_back(
        {"crossover", crossover != 0 && crossover <= t.crossover_max, static_cast<double>(crossover), buf});

    const double single = std::max(vup_lo / mc_lo, mc_lo / vup_lo);
    std::snprintf(buf, sizeof buf, "t_vup(%zu) vs t_mc(%zu) differ by x%.3g, limit %.3g", t.l_low, t.l_low, single,
                  t.single_factor);
    report.checks.push_back({"single_pdf_same_order", single <= t.single_factor, single, buf});

    for (const char* method : {"vup", "mc"}) {
        double prev = 0.0;
        std::size_t violations = 0;
        for (std::size_t l : ls) {
            const double m = need(method, l);
            if (m < prev) ++violations;
            prev = m;
        }
        std::snprintf(buf, sizeof buf, "%zu decreases in median time over %zu L values", violations, ls.size());
        report.notes.push_back({std::string(method) + "_monotone", violations == 0, static_cast<double>(violations), buf});
    }
    return report;
}

void write_bench_csv(std::ostream& os, const BenchResult& result) {
    os << "method,N,L,reps,median_s,min_s,max_s,breakdown_json\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return std::string(buf);
    };
    for (const auto& r : result.rows) {
        // JSON inside a quoted CSV field: inner quotes are doubled.
        std::string json = "{\"\"backend\"\":\"\"" + r.backend + "\"\"";
        for (const auto& [key, value] : r.breakdown) json += ",\"\"" + key + "\"\":" + num(value);
        json += ",\"\"reliable\"\":" + std::string(r.reliable ? "true" : "false");
        json += ",\"\"deterministic\"\":" + std::string(r.deterministic ? "true" : "false") + "}";
        os << r.method << ',' << r.n << ',' << r.l << ',' << r.reps << ',' << num(r.median_s) << ',' << num(r.min_s) << ','
           << num(r.max_s) << ",\"" << json << "\"\n";
    }
}

}  // namespace vup

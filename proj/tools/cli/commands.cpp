#include "cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/csv.hpp"
#include "vup/bench.hpp"
#include "vup/error.hpp"
#include "vup/hash.hpp"
#include "vup/ipsa.hpp"
#include "vup/matrix_io.hpp"
#include "vup/mc.hpp"
#include "vup/propagation.hpp"
#include "vup/vars.hpp"

#ifndef VUP_VERSION
#define VUP_VERSION "0.0.0"
#endif

namespace vup::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string config;
    std::string out_dir;
    unsigned threads = 1;
    std::string matrix;
    std::string fixed_binning_from;
    bool mc_sort = false;
    std::vector<double> scales;
    std::vector<std::size_t> bench_n;
    std::vector<std::size_t> bench_l;
    std::optional<std::size_t> bench_k;
    std::optional<std::size_t> bench_reps;
    std::optional<std::uint64_t> bench_seed;
    std::string bench_out;
    bool bench_check = false;
};

std::string hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json grid_json(const GridSpec& spec) {
    json dims = json::array();
    for (const auto& d : spec.dims)
        dims.push_back({{"name", d.name}, {"role", d.role == Role::x ? "x" : "alpha"}, {"lower", d.lower},
                        {"upper", d.upper}, {"count", d.count}});
    return {{"dims", dims}};
}

std::uint64_t grid_hash(const GridSpec& spec) {
    Fnv1a h;
    for (const auto& d : spec.dims)
        h.text(d.name).integer(d.role == Role::x ? 0 : 1).real(d.lower).real(d.upper).integer(d.count);
    return h.digest();
}

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

/// Shared state of one subcommand run; accumulates the manifest.
class Run {
public:
    Run(std::string command, RunConfig cfg, const Options& opt, std::ostream& out, std::ostream& err)
        : command_(std::move(command)), cfg_(std::move(cfg)), opt_(opt), out_(out), err_(err) {
        dir_ = opt.out_dir.empty() ? fs::path(cfg_.output.out_dir) : fs::path(opt.out_dir);
        fs::create_directories(dir_);
        manifest_ = {{"command", command_}, {"version", VUP_VERSION}, {"config", cfg_.raw}, {"seed", cfg_.seed},
                     {"threads", opt.threads}, {"hashes", json::object()}, {"timings", json::object()},
                     {"outputs", json::array()}};
    }

    const RunConfig& cfg() const { return cfg_; }
    const Options& opt() const { return opt_; }
    json& manifest() { return manifest_; }
    std::ostream& out() { return out_; }

    fs::path output(const std::string& name) {
        manifest_["outputs"].push_back(name);
        return dir_ / name;
    }
    void timing(const std::string& key, double seconds) { manifest_["timings"][key] = seconds; }
    void hash(const std::string& key, std::uint64_t value) { manifest_["hashes"][key] = hex(value); }
    void warn(const std::string& what) { err_ << "warning: " << what << '\n'; }

    void finish() {
        std::ofstream f(dir_ / "manifest.json");
        f << manifest_.dump(2) << '\n';
        if (!f) throw Error("cannot write manifest in '" + dir_.string() + "'");
        out_ << command_ << ": wrote " << manifest_["outputs"].size() << " file(s) to " << dir_.string() << '\n';
    }

    std::vector<MeasurementScenario> scenarios() {
        const auto& s = require_scenario(cfg_);
        std::vector<MeasurementScenario> out;
        for (double sigma : s.sigma_ell) out.push_back({s.locations, sigma, s.sigma_alpha, s.weights});
        return out;
    }

    std::string suffix(std::size_t g) const {
        return require_scenario(cfg_).sigma_ell.size() > 1 ? "_sigma" + std::to_string(g) : "";
    }

    void check_resolution(const Grid& grid, const MeasurementScenario& s) {
        for (std::size_t d = 0; d < grid.dimension(); ++d) {
            const double sigma = grid.spec().dims[d].role == Role::x ? s.sigma_ell : s.sigma_alpha;
            const double step = grid.step(d);
            if (sigma < step / 10.0) {
                std::ostringstream w;
                w << "sigma " << sigma << " for '" << grid.spec().dims[d].name << "' is below a tenth of the grid step "
                  << step << "; columns degenerate toward a single node";
                warn(w.str());
            }
        }
    }

private:
    std::string command_;
    RunConfig cfg_;
    const Options& opt_;
    std::ostream& out_;
    std::ostream& err_;
    fs::path dir_;
    json manifest_;
};

void write_output_matrix(const fs::path& path, const OutputProbabilityMatrix& m) {
    const auto centers = m.binning().centers();
    write_heatmap(path, "y", centers, m.locations(), [&](std::size_t r, std::size_t c) { return m.at(r, c); });
}

json matrix_sidecar(const SparseModelMatrix& m, const ModelFunction& model, const GridSpec& spec) {
    return {{"format_version", kMatrixFormatVersion},
            {"model", model.name()},
            {"model_source", model.source()},
            {"model_hash", hex(model.hash())},
            {"grid", grid_json(spec)},
            {"grid_hash", hex(grid_hash(spec))},
            {"inputs", m.inputs()},
            {"bins", m.outputs()},
            {"y_min", m.binning().lower()},
            {"y_max", m.binning().upper()}};
}

fs::path sidecar_path(fs::path matrix) { return matrix.replace_extension(".json"); }

SparseModelMatrix load_matching_matrix(const fs::path& path, const ModelFunction& model, std::shared_ptr<const Grid> grid) {
    auto matrix = read_model_matrix(path);
    const auto meta_path = sidecar_path(path);
    std::ifstream in(meta_path);
    if (!in) throw Error("matrix manifest '" + meta_path.string() + "' not found");
    json meta;
    try {
        meta = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("matrix manifest '" + meta_path.string() + "': " + e.what());
    }
    if (meta.value("model_hash", "") != hex(model.hash()))
        throw Error("matrix '" + path.string() + "' was built for a different model (hash mismatch)");
    if (meta.value("grid_hash", "") != hex(grid_hash(grid->spec())) || matrix.inputs() != grid->size())
        throw Error("matrix '" + path.string() + "' was built on a different grid (hash mismatch)");
    return SparseModelMatrix(std::vector<std::uint32_t>(matrix.bin_of().begin(), matrix.bin_of().end()), matrix.binning(),
                             grid, model.hash());
}

int cmd_build_matrix(Run& run) {
    Stopwatch sw;
    const auto model = make_model(run.cfg());
    auto grid = std::make_shared<const Grid>(require_grid(run.cfg()));
    const auto matrix = build_model_matrix(model, grid, run.cfg().output.bins, run.opt().threads);
    run.timing("matrix_build_s", sw.lap());
    write_model_matrix(run.output("model_matrix.vupm"), matrix);
    const auto meta = matrix_sidecar(matrix, model, grid->spec());
    std::ofstream(run.output("model_matrix.json")) << meta.dump(2) << '\n';
    run.timing("write_s", sw.lap());
    run.hash("model", model.hash());
    run.hash("grid", grid_hash(grid->spec()));
    run.manifest()["matrix"] = meta;
    run.finish();
    return 0;
}

int cmd_propagate(Run& run) {
    Stopwatch sw;
    const auto& cfg = run.cfg();
    const auto model = make_model(cfg);
    auto grid = std::make_shared<const Grid>(require_grid(cfg));
    const auto scenarios = run.scenarios();
    const bool shared = cfg.output.strategy == PropagationStrategy::shared_matrix;
    if (!run.opt().matrix.empty() && !shared)
        throw ConfigError("output.strategy: --matrix requires the shared strategy");

    std::optional<SparseModelMatrix> matrix;
    if (!run.opt().matrix.empty()) {
        matrix = load_matching_matrix(run.opt().matrix, model, grid);
        run.timing("matrix_load_s", sw.lap());
    } else if (shared) {
        matrix = build_model_matrix(model, grid, cfg.output.bins, run.opt().threads);
        run.timing("matrix_build_s", sw.lap());
    }
    for (std::size_t g = 0; g < scenarios.size(); ++g) {
        run.check_resolution(*grid, scenarios[g]);
        const auto out = matrix ? propagate_many(*matrix, scenario_matrix(grid, scenarios[g], PdfCentering::absolute,
                                                                          run.opt().threads),
                                                 run.opt().threads)
                                : output_matrix(model, grid, scenarios[g], cfg.output.bins, cfg.output.strategy,
                                                run.opt().threads);
        write_output_matrix(run.output("output" + run.suffix(g) + ".csv"), out);
    }
    run.timing("propagate_s", sw.lap());
    run.hash("model", model.hash());
    run.hash("grid", grid_hash(grid->spec()));
    run.manifest()["strategy"] = shared ? "shared" : "per-location";
    run.finish();
    return 0;
}

const char* reference_name(ReferenceKind k) {
    switch (k) {
        case ReferenceKind::mode: return "mode";
        case ReferenceKind::mean: return "mean";
        case ReferenceKind::alpha_matched: return "alpha-matched";
    }
    return "?";
}

int cmd_ipsa(Run& run) {
    Stopwatch sw;
    const auto& cfg = run.cfg();
    const auto model = make_model(cfg);
    auto grid = std::make_shared<const Grid>(require_grid(cfg));
    const auto scenarios = run.scenarios();
    const unsigned threads = run.opt().threads;
    const bool shared = cfg.output.strategy == PropagationStrategy::shared_matrix;
    std::optional<SparseModelMatrix> matrix;
    if (shared) matrix = build_model_matrix(model, grid, cfg.output.bins, threads);
    const std::vector<double> alpha_mode(model.arity() - 1, 0.0);

    for (std::size_t g = 0; g < scenarios.size(); ++g) {
        const auto& s = scenarios[g];
        run.check_resolution(*grid, s);
        const auto out = matrix ? propagate_many(*matrix, scenario_matrix(grid, s, PdfCentering::absolute, threads), threads)
                                : output_matrix(model, grid, s, cfg.output.bins, cfg.output.strategy, threads);
        const auto ipsa = [&] {
            switch (cfg.output.reference) {
                case ReferenceKind::mean: return to_deviations(out, column_means(out));
                case ReferenceKind::alpha_matched:
                    return alpha_matched_deviations(model, grid, s, out.binning().width(), threads);
                case ReferenceKind::mode: break;
            }
            return to_deviations(out, reference_curve(model, s.locations, alpha_mode));
        }();
        const auto summary = summarize(ipsa, cfg.output.level, s.location_weights(), cfg.output.interval);

        const auto sfx = run.suffix(g);
        std::vector<double> centers(ipsa.rows());
        for (std::size_t m = 0; m < centers.size(); ++m) centers[m] = ipsa.axis().center(m);
        write_heatmap(run.output("ipsa" + sfx + ".csv"), "dy", centers, ipsa.locations(),
                      [&](std::size_t r, std::size_t c) { return ipsa.column(c)[r]; });
        write_table(run.output("summary" + sfx + ".csv"), {"ell", "mean", "var", "argmax", "ci_lo", "ci_hi"},
                    {std::vector<double>(s.locations), summary.mean, summary.variance, summary.argmax, summary.ci_lower,
                     summary.ci_upper});
        write_table(run.output("marginal" + sfx + ".csv"), {"dy", "p"}, {centers, summary.global_marginal});
    }
    run.timing("ipsa_s", sw.lap());
    run.hash("model", model.hash());
    run.hash("grid", grid_hash(grid->spec()));
    run.manifest()["y_ref"] = reference_name(cfg.output.reference);
    run.manifest()["level"] = cfg.output.level;
    run.manifest()["interval"] = cfg.output.interval == IntervalKind::shortest ? "shortest" : "equal-tailed";
    run.manifest()["bins"] = cfg.output.bins;
    run.finish();
    return 0;
}

int cmd_vars(Run& run) {
    Stopwatch sw;
    const auto& cfg = run.cfg();
    const auto model = make_model(cfg);
    Dimension ell;
    if (cfg.vars.ell) {
        ell = *cfg.vars.ell;
    } else {
        ell = require_grid(cfg).dims.front();
        ell.name = "ell";
    }
    const Grid ell_grid(GridSpec{{ell}});
    const auto& alpha_ref = cfg.vars.alpha_ref;
    const double range = ell.length();
    const double limit = cfg.vars.scale_limit.value_or(0.5 * range);
    const std::size_t v_count = cfg.vars.v_count;

    const auto iv = integrated_variogram(model, ell_grid, limit, v_count, alpha_ref);
    write_table(run.output("variogram.csv"), {"v", "gamma"}, {iv.scales, iv.gamma});
    const double ivars_check = generalized_expectation(model, ivars_weights(ell_grid, limit, v_count), alpha_ref);

    const auto fractions = run.opt().scales.empty() ? cfg.vars.scale_fractions : run.opt().scales;
    std::vector<double> fv, lag, gam, big, expect;
    for (double f : fractions) {
        if (!(f > 0.0 && f < 1.0)) throw ConfigError("vars.scales: fractions must be in (0, 1), got " + format_real(f));
        const double v = f * range;
        const auto r = integrated_variogram(model, ell_grid, v, v_count, alpha_ref);
        fv.push_back(f);
        lag.push_back(v);
        gam.push_back(variogram(model, ell_grid, v, alpha_ref));
        big.push_back(r.integral);
        expect.push_back(r.expectation);
    }
    write_table(run.output("scales.csv"), {"fraction", "v", "gamma", "Gamma", "expectation"}, {fv, lag, gam, big, expect});

    if (cfg.scenario) {
        const auto grid = Grid(require_grid(cfg));
        const auto scenarios = run.scenarios();
        for (std::size_t g = 0; g < scenarios.size(); ++g) {
            std::vector<double> dsq;
            for (double l : scenarios[g].locations)
                dsq.push_back(local_square_deviation(model, l, scenarios[g], grid, PdfCentering::absolute));
            write_table(run.output("delta_sq" + run.suffix(g) + ".csv"), {"ell", "delta_sq"},
                        {scenarios[g].locations, dsq});
        }
    }
    run.timing("vars_s", sw.lap());
    run.hash("model", model.hash());
    run.manifest()["results"] = {{"scale_limit", limit},
                                 {"v_count", v_count},
                                 {"Gamma", iv.integral},
                                 {"expectation", iv.expectation},
                                 {"generalized_expectation_uniform", ivars_check}};
    run.finish();
    return 0;
}

OutputBinning binning_from_centers(const std::vector<double>& c) {
    const std::size_t k = c.size();
    if (k == 1) return OutputBinning(c[0], c[0], 1);
    const double width = (c[k - 1] - c[0]) / static_cast<double>(k - 1);
    if (!(width > 0.0)) throw FormatError("fixed binning: bin centers must increase");
    return OutputBinning(c[0] - 0.5 * width, c[k - 1] + 0.5 * width, k);
}

int cmd_mc(Run& run) {
    Stopwatch sw;
    const auto& cfg = run.cfg();
    const auto model = make_model(cfg);
    const auto& spec = require_grid(cfg);
    McConfig mc;
    mc.samples = cfg.mc.samples;
    mc.bins = cfg.output.bins;
    mc.seed = cfg.seed;
    mc.sort_before_binning = cfg.mc.sort || run.opt().mc_sort;
    if (!run.opt().fixed_binning_from.empty()) {
        mc.fixed_binning = binning_from_centers(read_row_keys(run.opt().fixed_binning_from));
        run.manifest()["fixed_binning_from"] = run.opt().fixed_binning_from;
    }
    const auto scenarios = run.scenarios();
    McTimings total;
    for (std::size_t g = 0; g < scenarios.size(); ++g) {
        McTimings t;
        const auto out = mc_propagate_many(model, scenarios[g], spec, mc, run.opt().threads, &t);
        total += t;
        write_output_matrix(run.output("mc" + run.suffix(g) + ".csv"), out);
    }
    run.timing("sample_s", total.sample_s);
    run.timing("eval_s", total.eval_s);
    run.timing("sortbin_s", total.sortbin_s);
    run.timing("total_s", sw.lap());
    run.hash("model", model.hash());
    run.manifest()["samples"] = mc.samples;
    run.finish();
    return 0;
}

int cmd_bench(Run& run) {
    const auto& cfg = run.cfg();
    const auto& opt = run.opt();
    auto model = cfg.model ? make_model(cfg) : builtin("bench2d");
    if (cfg.bench.delay_ns > 0) model = with_eval_delay(model, std::chrono::nanoseconds(cfg.bench.delay_ns));
    SweepConfig sweep = cfg.bench.sweep;
    sweep.threads = opt.threads;
    if (!opt.bench_n.empty()) sweep.grid_sizes = opt.bench_n;
    if (!opt.bench_l.empty()) sweep.l_values = opt.bench_l;
    if (opt.bench_k) sweep.bins = *opt.bench_k;
    if (opt.bench_reps) sweep.reps = *opt.bench_reps;
    if (opt.bench_seed) sweep.seed = *opt.bench_seed;
    if (sweep.reps < 3) throw ConfigError("bench.reps: must be >= 3");

    Stopwatch sw;
    const auto result = run_sweep(model, sweep);
    run.timing("sweep_s", sw.lap());
    const std::string name = opt.bench_out.empty() ? cfg.bench.out : opt.bench_out;
    const fs::path target = fs::path(name).is_absolute() ? fs::path(name) : run.output(name);
    std::ofstream csv(target);
    write_bench_csv(csv, result);
    if (!csv) throw Error("cannot write '" + target.string() + "'");

    int code = 0;
    if (opt.bench_check || cfg.bench.check) {
        json checks = json::array();
        for (std::size_t n : sweep.grid_sizes) {
            const auto report = assert_complexity(result, n, cfg.bench.thresholds);
            for (const auto& c : report.checks) {
                run.out() << (c.passed ? "PASS " : "FAIL ") << c.name << " N=" << n << ": " << c.detail << '\n';
                checks.push_back({{"name", c.name}, {"n", n}, {"passed", c.passed}, {"value", c.value}});
            }
            for (const auto& c : report.notes) run.out() << "note " << c.name << " N=" << n << ": " << c.detail << '\n';
            if (!report.passed()) code = 1;
        }
        run.manifest()["complexity"] = checks;
    }
    run.finish();
    if (code) throw Error("complexity assertions failed");
    return 0;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Vectorized uncertainty propagation and input probability sensitivity analysis", "vup"};
    app.set_version_flag("--version", VUP_VERSION);
    app.fallthrough();
    app.require_subcommand(1);
    Options opt;
    app.add_option("--config", opt.config, "Run configuration (JSON)");
    app.add_option("--out-dir", opt.out_dir, "Directory for all outputs (overrides output.out_dir)");
    app.add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);

    auto* build = app.add_subcommand("build-matrix", "Evaluate the model on the grid and write the sparse model matrix");
    auto* prop = app.add_subcommand("propagate", "Propagate every scenario column through one model matrix");
    prop->add_option("--matrix", opt.matrix, "Reuse a matrix written by build-matrix");
    auto* ipsa = app.add_subcommand("ipsa", "Deviation probability matrix, summary fields and global marginal");
    auto* vars = app.add_subcommand("vars", "Variogram, integrated variogram and local square deviation");
    std::string scales;
    vars->add_option("--scales", scales, "Comma-separated lag fractions of the location range");
    auto* mc = app.add_subcommand("mc", "Monte Carlo propagation of every scenario column");
    mc->add_option("--fixed-binning-from", opt.fixed_binning_from, "Bin on the axis of a propagate output CSV");
    mc->add_flag("--mc-sort", opt.mc_sort, "Sort outputs before binning");
    auto* bench = app.add_subcommand("bench", "Time VUP and MC across N and L");
    std::string n_list, l_list;
    std::size_t k = 0, reps = 0;
    std::uint64_t seed = 0;
    bench->add_option("--n", n_list, "Comma-separated grid sizes");
    bench->add_option("--l-values", l_list, "Comma-separated location counts");
    auto* k_opt = bench->add_option("--k", k, "Output bins")->check(CLI::PositiveNumber);
    auto* reps_opt = bench->add_option("--reps", reps, "Timed repetitions (>= 3)");
    auto* seed_opt = bench->add_option("--seed", seed, "MC seed");
    bench->add_option("--out", opt.bench_out, "CSV path (relative paths go under --out-dir)");
    bench->add_flag("--check", opt.bench_check, "Assert the complexity thresholds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << VUP_VERSION << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        auto parse_counts = [](const std::string& s, const char* flag) {
            std::vector<std::size_t> v;
            for (const auto& item : split_list(s)) {
                std::size_t used = 0;
                long long x = 0;
                try {
                    x = std::stoll(item, &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != item.size() || x <= 0) throw ConfigError(std::string(flag) + ": bad count '" + item + "'");
                v.push_back(static_cast<std::size_t>(x));
            }
            return v;
        };
        opt.bench_n = parse_counts(n_list, "--n");
        opt.bench_l = parse_counts(l_list, "--l-values");
        if (*k_opt) opt.bench_k = k;
        if (*reps_opt) opt.bench_reps = reps;
        if (*seed_opt) opt.bench_seed = seed;
        for (const auto& item : split_list(scales)) {
            std::size_t used = 0;
            double x = 0.0;
            try {
                x = std::stod(item, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != item.size()) throw ConfigError("--scales: bad fraction '" + item + "'");
            opt.scales.push_back(x);
        }

        set_default_threads(opt.threads);
        RunConfig cfg;
        if (!opt.config.empty()) cfg = load_config(opt.config);
        else if (!*bench) throw ConfigError("--config: required for this command");

        const auto* sub = app.get_subcommands().front();
        Run run(sub->get_name(), std::move(cfg), opt, out, err);
        if (sub == build) return cmd_build_matrix(run);
        if (sub == prop) return cmd_propagate(run);
        if (sub == ipsa) return cmd_ipsa(run);
        if (sub == vars) return cmd_vars(run);
        if (sub == mc) return cmd_mc(run);
        return cmd_bench(run);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace vup::cli

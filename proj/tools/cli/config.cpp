#include "cli/config.hpp"

#include <algorithm>
#include <fstream>

#include "vup/error.hpp"

namespace vup::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

double as_real(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
}

double positive_real(const json& j, const std::string& path) {
    const double v = as_real(j, path);
    if (!(v > 0.0)) fail(path, "must be > 0");
    return v;
}

std::uint64_t as_unsigned(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
    fail(path, "expected a non-negative integer");
}

std::size_t positive_count(const json& j, const std::string& path) {
    const auto v = as_unsigned(j, path);
    if (v == 0) fail(path, "must be >= 1");
    return static_cast<std::size_t>(v);
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

std::vector<double> real_list(const json& j, const std::string& path) {
    if (j.is_number()) return {as_real(j, path)};
    if (!j.is_array()) fail(path, "expected a number or an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_real(j[i], index(path, i)));
    return out;
}

std::vector<std::size_t> count_list(const json& j, const std::string& path) {
    if (!j.is_array()) return {positive_count(j, path)};
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(positive_count(j[i], index(path, i)));
    if (out.empty()) fail(path, "must not be empty");
    return out;
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
    for (const auto& [key, _] : obj.items())
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            fail(join(path, key), "unknown key");
}

ModelSection parse_model(const json& j) {
    expect_object(j, "model");
    reject_unknown(j, "model", {"builtin", "expression", "variables"});
    ModelSection m;
    const json* b = find(j, "builtin");
    const json* e = find(j, "expression");
    if (!b == !e) fail("model", "exactly one of 'builtin' or 'expression' is required");
    if (b) {
        m.builtin = as_string(*b, "model.builtin");
        const auto names = builtin_names();
        if (std::find(names.begin(), names.end(), m.builtin) == names.end()) {
            std::string list;
            for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
            fail("model.builtin", "unknown builtin '" + m.builtin + "' (available: " + list + ")");
        }
        m.variables = {"x", "alpha"};
        if (find(j, "variables")) fail("model.variables", "not allowed with a builtin");
        return m;
    }
    m.expression = as_string(*e, "model.expression");
    const json* v = find(j, "variables");
    if (!v || !v->is_array() || v->empty()) fail("model.variables", "expected a non-empty array of names");
    for (std::size_t i = 0; i < v->size(); ++i) m.variables.push_back(as_string((*v)[i], index("model.variables", i)));
    try {
        parse_expression(m.expression, m.variables);
    } catch (const ParseError& err) {
        fail("model.expression", err.what());
    }
    return m;
}

ScenarioSection parse_scenario(const json& j) {
    expect_object(j, "scenario");
    reject_unknown(j, "scenario", {"locations", "range", "count", "sigma_ell", "sigma_alpha", "weights"});
    ScenarioSection s;
    const json* sig = find(j, "sigma_ell");
    if (!sig) fail("scenario.sigma_ell", "required");
    s.sigma_ell = real_list(*sig, "scenario.sigma_ell");
    if (s.sigma_ell.empty()) fail("scenario.sigma_ell", "must not be empty");
    for (std::size_t i = 0; i < s.sigma_ell.size(); ++i)
        if (!(s.sigma_ell[i] > 0.0)) fail(index("scenario.sigma_ell", i), "must be > 0");
    if (const json* a = find(j, "sigma_alpha")) s.sigma_alpha = positive_real(*a, "scenario.sigma_alpha");

    const json* locs = find(j, "locations");
    const json* range = find(j, "range");
    if (!locs == !range) fail("scenario", "exactly one of 'locations' or 'range' is required");
    if (locs) {
        if (!locs->is_array() || locs->empty()) fail("scenario.locations", "expected a non-empty array");
        s.locations = real_list(*locs, "scenario.locations");
        if (find(j, "count")) fail("scenario.count", "only valid with 'range'");
    } else {
        const auto r = real_list(*range, "scenario.range");
        if (r.size() != 2 || !(r[0] <= r[1])) fail("scenario.range", "expected [lower, upper] with lower <= upper");
        const json* c = find(j, "count");
        if (!c) fail("scenario.count", "required with 'range'");
        s.locations = MeasurementScenario::evenly_spaced(r[0], r[1], positive_count(*c, "scenario.count"), 1.0, 1.0).locations;
    }
    if (const json* w = find(j, "weights")) {
        s.weights = real_list(*w, "scenario.weights");
        if (s.weights.size() != s.locations.size())
            fail("scenario.weights", "expected " + std::to_string(s.locations.size()) + " weights");
    }
    try {
        MeasurementScenario{s.locations, s.sigma_ell.front(), s.sigma_alpha, s.weights}.validate();
    } catch (const Error& err) {
        fail("scenario", err.what());
    }
    return s;
}

GridSpec parse_grid(const json* j, const std::optional<ModelSection>& model, const std::optional<ScenarioSection>& scenario) {
    std::size_t arity = model ? model->variables.size() : 0;
    json dims = json::array();
    if (j) {
        expect_object(*j, "grid");
        reject_unknown(*j, "grid", {"dims"});
        const json* d = find(*j, "dims");
        if (!d || !d->is_array() || d->empty()) fail("grid.dims", "expected a non-empty array");
        dims = *d;
        if (model && dims.size() != arity)
            fail("grid.dims", "model takes " + std::to_string(arity) + " inputs but " + std::to_string(dims.size()) +
                                  " dimensions are listed");
    } else {
        if (!model) fail("grid", "required when no model is configured");
        for (std::size_t i = 0; i < arity; ++i) dims.push_back(json::object());
    }

    double x_lo = 0.0, x_hi = 0.0, alpha_half = 0.0;
    if (scenario) {
        const double sig = *std::max_element(scenario->sigma_ell.begin(), scenario->sigma_ell.end());
        const auto [mn, mx] = std::minmax_element(scenario->locations.begin(), scenario->locations.end());
        x_lo = *mn - 4.0 * sig;
        x_hi = *mx + 4.0 * sig;
        alpha_half = 4.0 * scenario->sigma_alpha;
    }

    GridSpec spec;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const std::string path = index("grid.dims", i);
        const json& d = dims[i];
        expect_object(d, path);
        reject_unknown(d, path, {"name", "role", "lower", "upper", "count"});
        Dimension dim;
        dim.name = find(d, "name") ? as_string(d["name"], join(path, "name"))
                   : model           ? model->variables[i]
                                     : "v" + std::to_string(i);
        dim.role = i == 0 ? Role::x : Role::alpha;
        if (const json* r = find(d, "role")) {
            const auto role = as_string(*r, join(path, "role"));
            if (role == "x") dim.role = Role::x;
            else if (role == "alpha") dim.role = Role::alpha;
            else fail(join(path, "role"), "expected 'x' or 'alpha'");
        }
        dim.count = find(d, "count") ? positive_count(d["count"], join(path, "count")) : 100;
        const json* lo = find(d, "lower");
        const json* hi = find(d, "upper");
        if (!lo || !hi) {
            if (!scenario) fail(path, "lower and upper are required without a scenario section");
            if (dim.role == Role::x) {
                dim.lower = x_lo;
                dim.upper = x_hi;
            } else {
                dim.lower = -alpha_half;
                dim.upper = alpha_half;
            }
        }
        if (lo) dim.lower = as_real(*lo, join(path, "lower"));
        if (hi) dim.upper = as_real(*hi, join(path, "upper"));
        spec.dims.push_back(dim);
    }
    try {
        spec.validate();
    } catch (const Error& err) {
        fail("grid", err.what());
    }
    return spec;
}

OutputSection parse_output(const json& j) {
    expect_object(j, "output");
    reject_unknown(j, "output", {"bins", "level", "out_dir", "deviation", "interval", "strategy"});
    OutputSection o;
    if (const json* b = find(j, "bins")) o.bins = positive_count(*b, "output.bins");
    if (const json* l = find(j, "level")) {
        o.level = as_real(*l, "output.level");
        if (!(o.level > 0.0 && o.level < 1.0)) fail("output.level", "must be in (0, 1)");
    }
    if (const json* d = find(j, "out_dir")) o.out_dir = as_string(*d, "output.out_dir");
    if (const json* d = find(j, "deviation")) {
        expect_object(*d, "output.deviation");
        reject_unknown(*d, "output.deviation", {"reference"});
        if (const json* r = find(*d, "reference")) {
            const auto ref = as_string(*r, "output.deviation.reference");
            if (ref == "mode") o.reference = ReferenceKind::mode;
            else if (ref == "mean") o.reference = ReferenceKind::mean;
            else if (ref == "alpha-matched") o.reference = ReferenceKind::alpha_matched;
            else fail("output.deviation.reference", "expected 'mode', 'mean' or 'alpha-matched'");
        }
    }
    if (const json* i = find(j, "interval")) {
        const auto kind = as_string(*i, "output.interval");
        if (kind == "shortest") o.interval = IntervalKind::shortest;
        else if (kind == "equal-tailed") o.interval = IntervalKind::equal_tailed;
        else fail("output.interval", "expected 'shortest' or 'equal-tailed'");
    }
    if (const json* s = find(j, "strategy")) {
        const auto kind = as_string(*s, "output.strategy");
        if (kind == "shared") o.strategy = PropagationStrategy::shared_matrix;
        else if (kind == "per-location") o.strategy = PropagationStrategy::per_location;
        else fail("output.strategy", "expected 'shared' or 'per-location'");
    }
    return o;
}

McSection parse_mc(const json& j) {
    expect_object(j, "mc");
    reject_unknown(j, "mc", {"samples", "sort"});
    McSection m;
    if (const json* s = find(j, "samples")) m.samples = positive_count(*s, "mc.samples");
    if (const json* s = find(j, "sort")) m.sort = as_bool(*s, "mc.sort");
    return m;
}

VarsSection parse_vars(const json& j) {
    expect_object(j, "vars");
    reject_unknown(j, "vars", {"ell", "alpha_ref", "scale_limit", "v_count", "scales"});
    VarsSection v;
    if (const json* e = find(j, "ell")) {
        expect_object(*e, "vars.ell");
        reject_unknown(*e, "vars.ell", {"lower", "upper", "count"});
        Dimension d{"ell", Role::x, 0.0, 1.0, 100};
        if (!find(*e, "lower") || !find(*e, "upper")) fail("vars.ell", "lower and upper are required");
        d.lower = as_real((*e)["lower"], "vars.ell.lower");
        d.upper = as_real((*e)["upper"], "vars.ell.upper");
        if (const json* c = find(*e, "count")) d.count = positive_count(*c, "vars.ell.count");
        if (!(d.lower < d.upper)) fail("vars.ell", "lower must be < upper");
        v.ell = d;
    }
    if (const json* a = find(j, "alpha_ref")) v.alpha_ref = real_list(*a, "vars.alpha_ref");
    if (const json* s = find(j, "scale_limit")) v.scale_limit = positive_real(*s, "vars.scale_limit");
    if (const json* c = find(j, "v_count")) v.v_count = positive_count(*c, "vars.v_count");
    if (const json* s = find(j, "scales")) {
        v.scale_fractions = real_list(*s, "vars.scales");
        for (std::size_t i = 0; i < v.scale_fractions.size(); ++i)
            if (!(v.scale_fractions[i] >= 0.0 && v.scale_fractions[i] <= 1.0)) fail(index("vars.scales", i), "must be in [0, 1]");
    }
    return v;
}

BenchSection parse_bench(const json& j) {
    expect_object(j, "bench");
    reject_unknown(j, "bench", {"grid_sizes", "l_values", "bins", "reps", "sigma_ell", "sigma_alpha", "ell_range",
                                "mc_sort", "delay_ns", "check", "out", "thresholds"});
    BenchSection b;
    auto& s = b.sweep;
    if (const json* v = find(j, "grid_sizes")) s.grid_sizes = count_list(*v, "bench.grid_sizes");
    if (const json* v = find(j, "l_values")) s.l_values = count_list(*v, "bench.l_values");
    if (const json* v = find(j, "bins")) s.bins = positive_count(*v, "bench.bins");
    if (const json* v = find(j, "reps")) {
        s.reps = positive_count(*v, "bench.reps");
        if (s.reps < 3) fail("bench.reps", "must be >= 3");
    }
    if (const json* v = find(j, "sigma_ell")) s.sigma_ell = positive_real(*v, "bench.sigma_ell");
    if (const json* v = find(j, "sigma_alpha")) s.sigma_alpha = positive_real(*v, "bench.sigma_alpha");
    if (const json* v = find(j, "ell_range")) {
        const auto r = real_list(*v, "bench.ell_range");
        if (r.size() != 2 || !(r[0] <= r[1])) fail("bench.ell_range", "expected [lower, upper]");
        s.ell_lower = r[0];
        s.ell_upper = r[1];
    }
    if (const json* v = find(j, "mc_sort")) s.mc_sort = as_bool(*v, "bench.mc_sort");
    if (const json* v = find(j, "delay_ns")) b.delay_ns = static_cast<std::int64_t>(as_unsigned(*v, "bench.delay_ns"));
    if (const json* v = find(j, "check")) b.check = as_bool(*v, "bench.check");
    if (const json* v = find(j, "out")) b.out = as_string(*v, "bench.out");
    if (const json* t = find(j, "thresholds")) {
        expect_object(*t, "bench.thresholds");
        reject_unknown(*t, "bench.thresholds",
                       {"vup_ratio_max", "mc_ratio_min", "mc_ratio_max", "crossover_max", "single_factor", "l_low", "l_high"});
        auto& th = b.thresholds;
        if (const json* v = find(*t, "vup_ratio_max")) th.vup_ratio_max = positive_real(*v, "bench.thresholds.vup_ratio_max");
        if (const json* v = find(*t, "mc_ratio_min")) th.mc_ratio_min = positive_real(*v, "bench.thresholds.mc_ratio_min");
        if (const json* v = find(*t, "mc_ratio_max")) th.mc_ratio_max = positive_real(*v, "bench.thresholds.mc_ratio_max");
        if (const json* v = find(*t, "crossover_max")) th.crossover_max = positive_count(*v, "bench.thresholds.crossover_max");
        if (const json* v = find(*t, "single_factor")) th.single_factor = positive_real(*v, "bench.thresholds.single_factor");
        if (const json* v = find(*t, "l_low")) th.l_low = positive_count(*v, "bench.thresholds.l_low");
        if (const json* v = find(*t, "l_high")) th.l_high = positive_count(*v, "bench.thresholds.l_high");
    }
    return b;
}

}  // namespace

RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object at the top level");
    reject_unknown(j, "", {"seed", "model", "grid", "scenario", "output", "mc", "vars", "bench"});
    RunConfig cfg;
    cfg.raw = j;
    if (const json* s = find(j, "seed")) cfg.seed = as_unsigned(*s, "seed");
    if (const json* m = find(j, "model")) cfg.model = parse_model(*m);
    if (const json* s = find(j, "scenario")) cfg.scenario = parse_scenario(*s);
    if (find(j, "grid") || (cfg.model && cfg.scenario)) cfg.grid = parse_grid(find(j, "grid"), cfg.model, cfg.scenario);
    if (const json* o = find(j, "output")) cfg.output = parse_output(*o);
    if (const json* m = find(j, "mc")) cfg.mc = parse_mc(*m);
    if (const json* v = find(j, "vars")) cfg.vars = parse_vars(*v);
    if (const json* b = find(j, "bench")) cfg.bench = parse_bench(*b);
    cfg.bench.sweep.seed = cfg.seed;
    if (cfg.vars.alpha_ref.empty() && cfg.model)
        cfg.vars.alpha_ref.assign(cfg.model->variables.size() - 1, 0.0);
    if (cfg.model && cfg.vars.alpha_ref.size() + 1 != cfg.model->variables.size())
        fail("vars.alpha_ref", "expected " + std::to_string(cfg.model->variables.size() - 1) + " values");
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& err) {
        throw ConfigError("config: " + path.string() + ": " + err.what());
    }
    return parse_config(j);
}

ModelFunction make_model(const RunConfig& cfg) {
    if (!cfg.model) throw ConfigError("model: section required for this command");
    if (!cfg.model->builtin.empty()) return builtin(cfg.model->builtin);
    return parse_expression(cfg.model->expression, cfg.model->variables);
}

const GridSpec& require_grid(const RunConfig& cfg) {
    if (!cfg.grid) throw ConfigError("grid: section required (or give model and scenario for default extents)");
    return *cfg.grid;
}

const ScenarioSection& require_scenario(const RunConfig& cfg) {
    if (!cfg.scenario) throw ConfigError("scenario: section required for this command");
    return *cfg.scenario;
}

}  // namespace vup::cli

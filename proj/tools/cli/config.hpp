#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vup/bench.hpp"
#include "vup/grid.hpp"
#include "vup/ipsa.hpp"
#include "vup/model.hpp"

namespace vup::cli {

/// Invalid run configuration; the message starts with the offending key path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelSection {
    std::string builtin;
    std::string expression;
    std::vector<std::string> variables;
};

struct ScenarioSection {
    std::vector<double> locations;
    /// One entry per scenario run; several values give a batch.
    std::vector<double> sigma_ell;
    double sigma_alpha = 0.25;
    std::vector<double> weights;
};

struct OutputSection {
    std::size_t bins = 200;
    double level = 0.9;
    std::string out_dir = "out";
    ReferenceKind reference = ReferenceKind::mode;
    IntervalKind interval = IntervalKind::shortest;
    PropagationStrategy strategy = PropagationStrategy::shared_matrix;
};

struct McSection {
    std::size_t samples = 1'000'000;
    bool sort = false;
};

struct VarsSection {
    /// Location domain; defaults to the grid's x dimension.
    std::optional<Dimension> ell;
    std::vector<double> alpha_ref;
    /// Defaults to half the location range.
    std::optional<double> scale_limit;
    std::size_t v_count = 1000;
    std::vector<double> scale_fractions{0.1, 0.3, 0.5};
};

struct BenchSection {
    SweepConfig sweep;
    ComplexityThresholds thresholds;
    std::int64_t delay_ns = 0;
    bool check = false;
    std::string out = "bench.csv";
};

struct RunConfig {
    nlohmann::json raw = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::optional<ModelSection> model;
    std::optional<GridSpec> grid;
    std::optional<ScenarioSection> scenario;
    OutputSection output;
    McSection mc;
    VarsSection vars;
    BenchSection bench;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Builds the configured model. Throws ConfigError if the section is absent.
ModelFunction make_model(const RunConfig& cfg);
const GridSpec& require_grid(const RunConfig& cfg);
const ScenarioSection& require_scenario(const RunConfig& cfg);

}  // namespace vup::cli

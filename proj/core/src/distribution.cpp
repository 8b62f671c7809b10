#include "vup/distribution.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "vup/error.hpp"
#include "vup/numeric.hpp"

namespace vup {

ProbabilityVector ProbabilityVector::from_weights(std::vector<double> weights) {
    if (weights.empty()) throw InvalidArgument("probability vector must be non-empty");
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("probability weights must be finite and >= 0");
    const double total = compensated_sum(weights);
    if (!(total > 0.0)) throw DegenerateDistribution("distribution has zero mass on the grid");
    for (double& w : weights) w /= total;
    return ProbabilityVector(std::move(weights));
}

ProbabilityVector ProbabilityVector::from_masses(std::vector<double> masses, double tolerance) {
    if (masses.empty()) throw InvalidArgument("probability vector must be non-empty");
    for (double m : masses)
        if (!(m >= 0.0) || !std::isfinite(m)) throw InvalidArgument("probability masses must be finite and >= 0");
    const double total = compensated_sum(masses);
    if (std::abs(total - 1.0) > tolerance)
        throw InvalidArgument("probability masses sum to " + std::to_string(total) + ", not 1");
    return ProbabilityVector(std::move(masses));
}

double ProbabilityVector::sum() const { return compensated_sum(values_); }

ProbabilityMatrix::ProbabilityMatrix(std::shared_ptr<const Grid> grid, std::vector<double> locations)
    : grid_(std::move(grid)), rows_(grid_ ? grid_->size() : 0), locations_(std::move(locations)) {
    if (!grid_) throw InvalidArgument("probability matrix needs a grid");
    if (locations_.empty()) throw InvalidArgument("probability matrix needs at least one column");
    data_.assign(rows_ * locations_.size(), 0.0);
}

void ProbabilityMatrix::set_column(std::size_t l, const ProbabilityVector& p) {
    if (l >= cols()) throw InvalidArgument("set_column: column index out of range");
    if (p.size() != rows_) throw InvalidArgument("set_column: length mismatch");
    std::copy(p.values().begin(), p.values().end(), data_.begin() + static_cast<std::ptrdiff_t>(l * rows_));
}

MeasurementScenario MeasurementScenario::evenly_spaced(double lower, double upper, std::size_t count,
                                                       double sigma_ell, double sigma_alpha) {
    if (count == 0) throw InvalidArgument("scenario: location count must be >= 1");
    if (!(lower <= upper)) throw InvalidArgument("scenario: location range must have lower <= upper");
    MeasurementScenario s;
    s.sigma_ell = sigma_ell;
    s.sigma_alpha = sigma_alpha;
    s.locations.resize(count);
    const double step = (upper - lower) / static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i) s.locations[i] = lower + (static_cast<double>(i) + 0.5) * step;
    return s;
}

void MeasurementScenario::validate() const {
    if (locations.empty()) throw InvalidArgument("scenario.locations: at least one location is required");
    for (double l : locations)
        if (!std::isfinite(l)) throw InvalidArgument("scenario.locations: values must be finite");
    if (!(sigma_ell > 0.0) || !std::isfinite(sigma_ell)) throw InvalidArgument("scenario.sigma_ell: must be > 0");
    if (!(sigma_alpha > 0.0) || !std::isfinite(sigma_alpha))
        throw InvalidArgument("scenario.sigma_alpha: must be > 0");
    if (!weights.empty()) {
        if (weights.size() != locations.size())
            throw InvalidArgument("scenario.weights: expected " + std::to_string(locations.size()) + " entries");
        for (double w : weights)
            if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("scenario.weights: must be finite and >= 0");
        if (std::abs(compensated_sum(weights) - 1.0) > kNormalizationTolerance)
            throw InvalidArgument("scenario.weights: must sum to 1");
    }
}

std::vector<double> MeasurementScenario::location_weights() const {
    if (!weights.empty()) return weights;
    return std::vector<double>(locations.size(), 1.0 / static_cast<double>(locations.size()));
}

ProbabilityVector gaussian_on_grid(const Grid& grid, std::span<const double> mean, std::span<const double> sigma) {
    const std::size_t dim = grid.dimension();
    if (mean.size() != dim || sigma.size() != dim)
        throw InvalidArgument("gaussian_on_grid: mean and sigma must have " + std::to_string(dim) + " components");
    for (std::size_t d = 0; d < dim; ++d) {
        if (!(sigma[d] > 0.0) || !std::isfinite(sigma[d]))
            throw InvalidArgument("gaussian_on_grid: sigma components must be > 0");
        if (!std::isfinite(mean[d])) throw InvalidArgument("gaussian_on_grid: mean must be finite");
    }

    // Separable: the N-vector is the row-major outer product of 1-D factors.
    std::vector<double> weights{1.0};
    for (std::size_t d = 0; d < dim; ++d) {
        const auto axis = grid.axis(d);
        std::vector<double> factor(axis.size());
        const double inv = 1.0 / (2.0 * sigma[d] * sigma[d]);
        for (std::size_t k = 0; k < axis.size(); ++k) {
            const double z = axis[k] - mean[d];
            factor[k] = std::exp(-z * z * inv);
        }
        std::vector<double> next(weights.size() * factor.size());
        for (std::size_t i = 0; i < weights.size(); ++i)
            for (std::size_t k = 0; k < factor.size(); ++k) next[i * factor.size() + k] = weights[i] * factor[k];
        weights = std::move(next);
    }
    try {
        return ProbabilityVector::from_weights(std::move(weights));
    } catch (const DegenerateDistribution&) {
        std::ostringstream msg;
        msg << "gaussian_on_grid: every node underflows for mean (";
        for (std::size_t d = 0; d < dim; ++d) msg << (d ? ", " : "") << mean[d];
        msg << ")";
        throw DegenerateDistribution(msg.str());
    }
}

ProbabilityVector uniform_on_grid(const Grid& grid) {
    return ProbabilityVector::from_masses(std::vector<double>(grid.size(), 1.0 / static_cast<double>(grid.size())));
}

std::vector<std::size_t> nearest_node(const Grid& grid, std::span<const double> point) {
    const std::size_t dim = grid.dimension();
    if (point.size() != dim) throw InvalidArgument("delta_on_grid: point must have " + std::to_string(dim) + " components");
    std::vector<std::size_t> index(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        const auto& s = grid.spec().dims[d];
        if (!(point[d] >= s.lower && point[d] <= s.upper))
            throw InvalidArgument("delta_on_grid: point component " + std::to_string(d) + " outside [" +
                                  std::to_string(s.lower) + ", " + std::to_string(s.upper) + "]");
        // Position in node units; nearest node with ties to the lower index.
        const double t = (point[d] - s.lower) / grid.step(d) - 0.5;
        const double k = std::ceil(t - 0.5);
        index[d] = static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(s.count - 1)));
    }
    return index;
}

ProbabilityVector delta_on_grid(const Grid& grid, std::span<const double> point) {
    const auto index = nearest_node(grid, point);
    std::vector<double> masses(grid.size(), 0.0);
    masses[grid.flat_index(index)] = 1.0;
    return ProbabilityVector::from_masses(std::move(masses));
}

ProbabilityMatrix scenario_matrix(std::shared_ptr<const Grid> grid, const MeasurementScenario& scenario,
                                  PdfCentering centering, unsigned threads) {
    scenario.validate();
    if (!grid) throw InvalidArgument("scenario_matrix: null grid");
    if (grid->spec().x_dimensions() != 1)
        throw InvalidArgument("scenario_matrix: exactly one x dimension is supported");

    const std::size_t dim = grid->dimension();
    std::vector<double> sigma(dim, scenario.sigma_alpha);
    sigma[0] = scenario.sigma_ell;

    ProbabilityMatrix out(grid, scenario.locations);
    parallel_for(
        scenario.locations.size(),
        [&](std::size_t begin, std::size_t end) {
            std::vector<double> mean(dim, 0.0);
            for (std::size_t l = begin; l < end; ++l) {
                const double ell = scenario.locations[l];
                mean[0] = centering == PdfCentering::absolute ? ell : 0.0;
                try {
                    out.set_column(l, gaussian_on_grid(*grid, mean, sigma));
                } catch (const DegenerateDistribution& e) {
                    throw DegenerateDistribution("scenario column for ell = " + std::to_string(ell) + ": " + e.what());
                }
            }
        },
        threads);
    return out;
}

}  // namespace vup

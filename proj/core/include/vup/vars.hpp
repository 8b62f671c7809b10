#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vup/distribution.hpp"
#include "vup/grid.hpp"
#include "vup/model.hpp"

namespace vup {

// Variogram quantities over a 1-D location grid. The model takes (l, alpha...)
// with alpha held at `alpha_ref`. A lag v pairs every node l with l + v
// inside [lower, upper] of the grid; nodes whose partner falls outside are
// dropped rather than extrapolated.

/// Location nodes l with l + v inside the grid domain.
std::vector<std::size_t> paired_nodes(const Grid& ell_grid, double v);

/// gamma(v) = 1/2 mean over paired nodes of (M(l + v) - M(l))^2.
double variogram(const ModelFunction& model, const Grid& ell_grid, double v, std::span<const double> alpha_ref = {});

struct IntegratedVariogram {
    double scale_limit = 0.0;
    /// Gamma(V), midpoint rule over v_i = (i + 1/2) V / n.
    double integral = 0.0;
    /// Gamma(V) / V
    double expectation = 0.0;
    std::vector<double> scales;
    std::vector<double> gamma;
};

IntegratedVariogram integrated_variogram(const ModelFunction& model, const Grid& ell_grid, double scale_limit,
                                         std::size_t v_count, std::span<const double> alpha_ref = {});

/// The same double sum accumulated location-first; agrees with
/// integrated_variogram(...).integral up to rounding.
double integrated_variogram_location_first(const ModelFunction& model, const Grid& ell_grid, double scale_limit,
                                           std::size_t v_count, std::span<const double> alpha_ref = {});

/// Gamma at V = h, 2h, ..., count h using the fixed lag grid (k + 1/2) h.
/// Each entry adds a non-negative term, so the profile never decreases.
std::vector<double> cumulative_integrated_variogram(const ModelFunction& model, const Grid& ell_grid, double h,
                                                    std::size_t count, std::span<const double> alpha_ref = {});

/// rho(v, l) on scales x grid nodes, flattened scale-major.
struct JointWeights {
    std::vector<double> scales;
    std::vector<double> locations;
    std::vector<double> weights;

    double at(std::size_t v, std::size_t l) const { return weights[v * locations.size() + l]; }
};

/// rho(v, l) = p(v) / |paired(v)| for paired nodes, 0 otherwise.
JointWeights scale_weights(const Grid& ell_grid, std::span<const double> scales, std::span<const double> scale_mass);
/// Uniform over the midpoint lags of [0, V] and the paired locations.
JointWeights ivars_weights(const Grid& ell_grid, double scale_limit, std::size_t v_count);
/// All weight at lag v, uniform over the paired locations.
JointWeights delta_weights(const Grid& ell_grid, double v);

/// sum over (v, l) of rho(v, l) (M(l + v) - M(l))^2 / 2.
/// Throws InvalidArgument for negative weights or |sum - 1| > 1e-6.
double generalized_expectation(const ModelFunction& model, const JointWeights& weights,
                               std::span<const double> alpha_ref = {});

inline constexpr double kJointWeightTolerance = 1e-6;

/// Delta^2 at l: the input-pdf expectation of (M(l + x, alpha) - M(l, alpha))^2 / 2
/// over the grid. With absolute centering the grid holds l + x directly.
double local_square_deviation(const ModelFunction& model, double ell, const MeasurementScenario& scenario,
                              const Grid& grid, PdfCentering centering = PdfCentering::deviation);

}  // namespace vup

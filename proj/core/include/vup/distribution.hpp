#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "vup/grid.hpp"
#include "vup/parallel.hpp"

namespace vup {

inline constexpr double kNormalizationTolerance = 1e-9;

/// Non-negative masses summing to one.
class ProbabilityVector {
public:
    ProbabilityVector() = default;

    /// Normalizes non-negative weights with compensated summation.
    /// Throws DegenerateDistribution if the total is zero.
    static ProbabilityVector from_weights(std::vector<double> weights);

    /// Adopts masses that are already normalized; validates non-negativity
    /// and |sum - 1| <= tolerance without rescaling.
    static ProbabilityVector from_masses(std::vector<double> masses, double tolerance = kNormalizationTolerance);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }
    double sum() const;

private:
    explicit ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {}
    std::vector<double> values_;
};

/// N x L column-stochastic matrix of input pdfs on one grid, column-major.
class ProbabilityMatrix {
public:
    ProbabilityMatrix(std::shared_ptr<const Grid> grid, std::vector<double> locations);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return locations_.size(); }
    const std::shared_ptr<const Grid>& grid() const { return grid_; }
    std::span<const double> locations() const { return locations_; }

    std::span<const double> column(std::size_t l) const { return {data_.data() + l * rows_, rows_}; }
    void set_column(std::size_t l, const ProbabilityVector& p);

private:
    std::shared_ptr<const Grid> grid_;
    std::size_t rows_;
    std::vector<double> locations_;
    std::vector<double> data_;
};

/// Measurement locations with a uniform Gaussian measurement uncertainty.
struct MeasurementScenario {
    std::vector<double> locations;
    double sigma_ell = 1.0;
    double sigma_alpha = 1.0;
    /// rho(ell); empty means uniform.
    std::vector<double> weights;

    /// L evenly spaced midpoint locations on [lower, upper].
    static MeasurementScenario evenly_spaced(double lower, double upper, std::size_t count, double sigma_ell,
                                             double sigma_alpha);

    void validate() const;
    std::vector<double> location_weights() const;
};

/// Where per-location input pdfs are centered.
///  absolute:  x is an absolute coordinate, column l is centered at x = l
///             (the shared model matrix path).
///  deviation: x is the deviation from l, every column is centered at 0 and
///             the model seen by the matrix is M(l + x, alpha).
enum class PdfCentering { absolute, deviation };

/// Truncated product Gaussian sampled at the grid nodes and renormalized.
/// Exponents are not shifted, so a mean far outside the grid underflows to
/// an all-zero vector and throws DegenerateDistribution.
ProbabilityVector gaussian_on_grid(const Grid& grid, std::span<const double> mean, std::span<const double> sigma);

ProbabilityVector uniform_on_grid(const Grid& grid);

/// All mass on the node nearest to `point`; ties go to the lower index.
ProbabilityVector delta_on_grid(const Grid& grid, std::span<const double> point);

/// Per-dimension nearest node indices used by delta_on_grid.
std::vector<std::size_t> nearest_node(const Grid& grid, std::span<const double> point);

/// Column l is gaussian_on_grid with mean (l or 0, 0...) and sigma
/// (sigma_ell, sigma_alpha...). Requires exactly one x dimension.
ProbabilityMatrix scenario_matrix(std::shared_ptr<const Grid> grid, const MeasurementScenario& scenario,
                                  PdfCentering centering = PdfCentering::absolute,
                                  unsigned threads = default_threads());

}  // namespace vup

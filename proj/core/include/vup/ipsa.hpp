#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "vup/distribution.hpp"
#include "vup/grid.hpp"
#include "vup/model.hpp"
#include "vup/parallel.hpp"
#include "vup/propagation.hpp"

namespace vup {

enum class PropagationStrategy {
    /// One model matrix on the absolute grid, columns centered at each l.
    shared_matrix,
    /// A fresh matrix per location for M(l + x, alpha) on the grid shifted
    /// by -l, with every column centered at zero. No reuse; reference path.
    per_location,
};

/// Output distribution p(y | l, sigma_l) for every scenario location.
OutputProbabilityMatrix output_matrix(const ModelFunction& model, std::shared_ptr<const Grid> grid,
                                      const MeasurementScenario& scenario, std::size_t bins,
                                      PropagationStrategy strategy = PropagationStrategy::shared_matrix,
                                      unsigned threads = default_threads());

/// y_ref[l] = M(l, alpha_ref...).
std::vector<double> reference_curve(const ModelFunction& model, std::span<const double> locations,
                                    std::span<const double> alpha_ref);

/// What deviations are measured against.
///  mode:          M(l, 0), the input-pdf maximum.
///  mean:          E[y | l] of the output column.
///  alpha_matched: M(l, alpha) per input node, i.e. M(l + x, alpha) - M(l, alpha).
enum class ReferenceKind { mode, mean, alpha_matched };

/// Uniform axis of deviation bin centers.
struct DeviationAxis {
    double first_center = 0.0;
    double width = 0.0;
    std::size_t count = 1;

    double center(std::size_t m) const { return first_center + static_cast<double>(m) * width; }
    double lower_edge(std::size_t m) const { return center(m) - 0.5 * width; }
    double upper_edge(std::size_t m) const { return center(m) + 0.5 * width; }
};

/// p(dy | l, sigma_l) on an axis shared by every column, column-major.
class IpsaMatrix {
public:
    IpsaMatrix(DeviationAxis axis, std::vector<double> locations, std::vector<double> reference);

    std::size_t rows() const { return axis_.count; }
    std::size_t cols() const { return locations_.size(); }
    const DeviationAxis& axis() const { return axis_; }
    std::span<const double> locations() const { return locations_; }
    std::span<const double> reference() const { return reference_; }
    std::span<const double> column(std::size_t l) const { return {data_.data() + l * rows(), rows()}; }
    std::span<double> column(std::size_t l) { return {data_.data() + l * rows(), rows()}; }

private:
    DeviationAxis axis_;
    std::vector<double> locations_;
    std::vector<double> reference_;
    std::vector<double> data_;
};

/// Shifts column l by -y_ref[l] and re-bins onto a common axis of the same
/// bin width. Each column moves by a whole number of bins (the nearest one),
/// so mass is preserved exactly and no bin moves by more than half a width.
/// A single-point binning (constant model) has no width to share, so it
/// only accepts references that shift every column identically.
IpsaMatrix to_deviations(const OutputProbabilityMatrix& out, std::span<const double> y_ref);

/// Distribution of M(x, alpha) - M(l, alpha) under the absolute-grid
/// column centered at l, binned with the given width on an axis spanning
/// every node's deviation.
IpsaMatrix alpha_matched_deviations(const ModelFunction& model, std::shared_ptr<const Grid> grid,
                                    const MeasurementScenario& scenario, double width,
                                    unsigned threads = default_threads());

enum class IntervalKind {
    /// Shortest contiguous run of bins with mass >= level; ties to the lower start.
    shortest,
    equal_tailed,
};

struct SummaryFields {
    DeviationAxis axis;
    std::vector<double> mean;
    std::vector<double> variance;
    /// E[dy^2 | l]
    std::vector<double> second_moment;
    /// Bin center with maximum probability (lowest such bin on ties).
    std::vector<double> argmax;
    std::vector<double> ci_lower;
    std::vector<double> ci_upper;
    /// sum_l rho(l) column_l
    std::vector<double> global_marginal;
};

SummaryFields summarize(const IpsaMatrix& ipsa, double level, std::span<const double> weights,
                        IntervalKind interval = IntervalKind::shortest);

}  // namespace vup

namespace vup {

/// E[y | l] per column, for mean-referenced deviations.
std::vector<double> column_means(const OutputProbabilityMatrix& out);

}  // namespace vup

#include "vup/ipsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vup/error.hpp"
#include "vup/numeric.hpp"

namespace vup {

namespace {

ModelFunction shifted_in_x(const ModelFunction& model, double ell) {
    const std::size_t arity = model.arity();
    return ModelFunction(model.name() + "@shift", arity, [model, ell](std::span<const double> v) {
        std::vector<double> shifted(v.begin(), v.end());
        shifted[0] += ell;
        return model(shifted);
    });
}

GridSpec shifted_spec(const GridSpec& spec, double offset) {
    GridSpec out = spec;
    out.dims[0].lower += offset;
    out.dims[0].upper += offset;
    return out;
}

void check_scenario_grid(const Grid& grid, const ModelFunction& model) {
    if (grid.spec().x_dimensions() != 1) throw InvalidArgument("ipsa: exactly one x dimension is supported");
    if (model.arity() != grid.dimension())
        throw InvalidArgument("ipsa: model arity " + std::to_string(model.arity()) + " != grid dimension " +
                              std::to_string(grid.dimension()));
}

}  // namespace

OutputProbabilityMatrix output_matrix(const ModelFunction& model, std::shared_ptr<const Grid> grid,
                                      const MeasurementScenario& scenario, std::size_t bins,
                                      PropagationStrategy strategy, unsigned threads) {
    if (!grid) throw InvalidArgument("output_matrix: null grid");
    scenario.validate();
    check_scenario_grid(*grid, model);

    if (strategy == PropagationStrategy::shared_matrix) {
        const auto matrix = build_model_matrix(model, grid, bins, threads);
        const auto pdfs = scenario_matrix(grid, scenario, PdfCentering::absolute, threads);
        return propagate_many(matrix, pdfs, threads);
    }

    // Two passes: the common output range first, then one matrix per location.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double ell : scenario.locations) {
        const Grid local(shifted_spec(grid->spec(), -ell));
        const auto y = eval_on_grid(shifted_in_x(model, ell), local, threads);
        const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
        lo = std::min(lo, *mn);
        hi = std::max(hi, *mx);
    }
    const OutputBinning binning(lo, hi, bins);
    OutputProbabilityMatrix out(binning, scenario.locations);
    std::vector<double> sigma(grid->dimension(), scenario.sigma_alpha);
    sigma[0] = scenario.sigma_ell;
    const std::vector<double> mean(grid->dimension(), 0.0);
    for (std::size_t l = 0; l < scenario.locations.size(); ++l) {
        const double ell = scenario.locations[l];
        auto local = std::make_shared<const Grid>(shifted_spec(grid->spec(), -ell));
        const auto y = eval_on_grid(shifted_in_x(model, ell), *local, threads);
        const auto matrix = build_model_matrix(y, binning);
        const auto p = gaussian_on_grid(*local, mean, sigma);
        propagate_masses_into(matrix, p.values(), out.column(l));
    }
    return out;
}

std::vector<double> reference_curve(const ModelFunction& model, std::span<const double> locations,
                                    std::span<const double> alpha_ref) {
    if (alpha_ref.size() + 1 != model.arity())
        throw InvalidArgument("reference_curve: expected " + std::to_string(model.arity() - 1) +
                              " alpha reference values, got " + std::to_string(alpha_ref.size()));
    std::vector<double> input(model.arity());
    std::copy(alpha_ref.begin(), alpha_ref.end(), input.begin() + 1);
    std::vector<double> out;
    out.reserve(locations.size());
    for (double ell : locations) {
        input[0] = ell;
        out.push_back(model(input));
    }
    return out;
}

IpsaMatrix::IpsaMatrix(DeviationAxis axis, std::vector<double> locations, std::vector<double> reference)
    : axis_(axis), locations_(std::move(locations)), reference_(std::move(reference)),
      data_(axis_.count * locations_.size(), 0.0) {
    if (axis_.count == 0) throw InvalidArgument("ipsa matrix: empty deviation axis");
    if (reference_.size() != locations_.size()) throw InvalidArgument("ipsa matrix: one reference per location");
}

IpsaMatrix to_deviations(const OutputProbabilityMatrix& out, std::span<const double> y_ref) {
    const std::size_t cols = out.cols();
    if (y_ref.size() != cols)
        throw InvalidArgument("to_deviations: expected " + std::to_string(cols) + " reference values, got " +
                              std::to_string(y_ref.size()));
    const auto& binning = out.binning();
    const double width = binning.width();
    const std::size_t k = out.rows();
    std::vector<double> locations(out.locations().begin(), out.locations().end());
    std::vector<double> reference(y_ref.begin(), y_ref.end());

    // Shifted first center of each column; the common axis starts at the lowest.
    std::vector<double> start(cols);
    for (std::size_t l = 0; l < cols; ++l) start[l] = binning.center(0) - y_ref[l];
    const double first = *std::min_element(start.begin(), start.end());

    std::vector<std::size_t> offset(cols, 0);
    if (width > 0.0) {
        for (std::size_t l = 0; l < cols; ++l)
            offset[l] = static_cast<std::size_t>(std::llround((start[l] - first) / width));
    } else {
        for (double s : start)
            if (s != first)
                throw InvalidArgument("to_deviations: single-point binning cannot hold differing references");
    }
    const std::size_t rows = k + *std::max_element(offset.begin(), offset.end());

    IpsaMatrix ipsa(DeviationAxis{first, width, rows}, std::move(locations), std::move(reference));
    for (std::size_t l = 0; l < cols; ++l) {
        const auto src = out.column(l);
        auto dst = ipsa.column(l);
        for (std::size_t r = 0; r < k; ++r) dst[r + offset[l]] += src[r];
    }
    return ipsa;
}

IpsaMatrix alpha_matched_deviations(const ModelFunction& model, std::shared_ptr<const Grid> grid,
                                    const MeasurementScenario& scenario, double width, unsigned threads) {
    if (!grid) throw InvalidArgument("alpha_matched_deviations: null grid");
    scenario.validate();
    check_scenario_grid(*grid, model);
    if (!(width >= 0.0) || !std::isfinite(width))
        throw InvalidArgument("alpha_matched_deviations: width must be finite and >= 0");

    const std::size_t n = grid->size();
    const std::size_t dim = grid->dimension();
    const std::size_t x_count = grid->count(0);
    const std::size_t alpha_block = n / x_count;
    const auto y = eval_on_grid(model, *grid, threads);
    const std::size_t cols = scenario.locations.size();

    // M(l, alpha) for each alpha combination; nodes are x-major so node j
    // has alpha combination j % alpha_block.
    auto references = [&](double ell) {
        std::vector<double> ref(alpha_block);
        std::vector<double> input(dim);
        for (std::size_t a = 0; a < alpha_block; ++a) {
            const auto node = grid->node(a);
            std::copy(node.begin(), node.end(), input.begin());
            input[0] = ell;
            ref[a] = model(input);
        }
        return ref;
    };

    std::vector<std::vector<double>> column_refs(cols);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t l = 0; l < cols; ++l) {
        column_refs[l] = references(scenario.locations[l]);
        for (std::size_t j = 0; j < n; ++j) {
            const double d = y[j] - column_refs[l][j % alpha_block];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    }
    std::size_t rows = 1;
    if (hi > lo) {
        if (width == 0.0) throw InvalidArgument("alpha_matched_deviations: zero width with a non-constant deviation");
        rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
    }
    const double axis_width = hi > lo ? width : 0.0;

    std::vector<double> alpha_zero(dim - 1, 0.0);
    IpsaMatrix ipsa(DeviationAxis{lo + 0.5 * axis_width, axis_width, rows}, scenario.locations,
                    reference_curve(model, scenario.locations, alpha_zero));

    std::vector<double> sigma(dim, scenario.sigma_alpha);
    sigma[0] = scenario.sigma_ell;
    parallel_for(
        cols,
        [&](std::size_t begin, std::size_t end) {
            std::vector<double> mean(dim, 0.0);
            for (std::size_t l = begin; l < end; ++l) {
                mean[0] = scenario.locations[l];
                const auto p = gaussian_on_grid(*grid, mean, sigma);
                auto dst = ipsa.column(l);
                for (std::size_t j = 0; j < n; ++j) {
                    std::size_t m = 0;
                    if (axis_width > 0.0) {
                        const double d = y[j] - column_refs[l][j % alpha_block];
                        m = std::min(rows - 1, static_cast<std::size_t>(std::max(0.0, std::floor((d - lo) / axis_width))));
                    }
                    dst[m] += p[j];
                }
            }
        },
        threads);
    return ipsa;
}

SummaryFields summarize(const IpsaMatrix& ipsa, double level, std::span<const double> weights,
                        IntervalKind interval) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("summarize: level must be in (0, 1)");
    const std::size_t cols = ipsa.cols();
    const std::size_t rows = ipsa.rows();
    if (weights.size() != cols)
        throw InvalidArgument("summarize: expected " + std::to_string(cols) + " location weights");
    CompensatedSum weight_total;
    for (double w : weights) {
        if (!(w >= 0.0)) throw InvalidArgument("summarize: weights must be >= 0");
        weight_total.add(w);
    }
    if (std::abs(weight_total.value() - 1.0) > kNormalizationTolerance)
        throw InvalidArgument("summarize: weights must sum to 1");

    constexpr double kCoverageSlack = 1e-12;
    const auto& axis = ipsa.axis();
    SummaryFields s;
    s.axis = axis;
    s.mean.resize(cols);
    s.variance.resize(cols);
    s.second_moment.resize(cols);
    s.argmax.resize(cols);
    s.ci_lower.resize(cols);
    s.ci_upper.resize(cols);

    std::vector<double> prefix(rows + 1);
    for (std::size_t l = 0; l < cols; ++l) {
        const auto p = ipsa.column(l);
        CompensatedSum m1, m2;
        std::size_t best = 0;
        for (std::size_t m = 0; m < rows; ++m) {
            const double c = axis.center(m);
            m1.add(c * p[m]);
            m2.add(c * c * p[m]);
            if (p[m] > p[best]) best = m;
        }
        const double mean = m1.value();
        CompensatedSum var;
        for (std::size_t m = 0; m < rows; ++m) {
            const double d = axis.center(m) - mean;
            var.add(d * d * p[m]);
        }
        s.mean[l] = mean;
        s.variance[l] = var.value();
        s.second_moment[l] = m2.value();
        s.argmax[l] = axis.center(best);

        CompensatedSum running;
        prefix[0] = 0.0;
        for (std::size_t m = 0; m < rows; ++m) {
            running.add(p[m]);
            prefix[m + 1] = running.value();
        }
        std::size_t lo = 0, hi = rows - 1;
        if (interval == IntervalKind::shortest) {
            std::size_t best_len = rows + 1;
            std::size_t start = 0;
            for (std::size_t end = 0; end < rows; ++end) {
                while (start < end && prefix[end + 1] - prefix[start + 1] >= level - kCoverageSlack) ++start;
                if (prefix[end + 1] - prefix[start] >= level - kCoverageSlack) {
                    const std::size_t len = end - start + 1;
                    if (len < best_len) {
                        best_len = len;
                        lo = start;
                        hi = end;
                    }
                }
            }
        } else {
            const double tail = 0.5 * (1.0 - level);
            lo = 0;
            while (lo + 1 < rows && prefix[lo + 1] <= tail + kCoverageSlack) ++lo;
            hi = lo;
            while (hi + 1 < rows && prefix[hi + 1] < 1.0 - tail - kCoverageSlack) ++hi;
        }
        s.ci_lower[l] = axis.lower_edge(lo);
        s.ci_upper[l] = axis.upper_edge(hi);
    }

    std::vector<double> marginal(rows, 0.0);
    for (std::size_t m = 0; m < rows; ++m) {
        CompensatedSum acc;
        for (std::size_t l = 0; l < cols; ++l) acc.add(weights[l] * ipsa.column(l)[m]);
        marginal[m] = acc.value();
    }
    const auto normalized = ProbabilityVector::from_weights(std::move(marginal));
    s.global_marginal.assign(normalized.values().begin(), normalized.values().end());
    return s;
}

}  // namespace vup

namespace vup {

std::vector<double> column_means(const OutputProbabilityMatrix& out) {
    std::vector<double> means(out.cols());
    for (std::size_t l = 0; l < out.cols(); ++l) {
        CompensatedSum acc;
        const auto p = out.column(l);
        for (std::size_t r = 0; r < out.rows(); ++r) acc.add(out.binning().center(r) * p[r]);
        means[l] = acc.value();
    }
    return means;
}

}  // namespace vup

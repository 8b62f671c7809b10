#include "vup/vars.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vup/error.hpp"
#include "vup/numeric.hpp"

namespace vup {

namespace {

void check_location_grid(const Grid& grid, const ModelFunction& model, std::span<const double> alpha_ref) {
    if (grid.dimension() != 1) throw InvalidArgument("variogram: location grid must be 1-D");
    if (model.arity() != 1 + alpha_ref.size())
        throw InvalidArgument("variogram: model arity " + std::to_string(model.arity()) + " needs " +
                              std::to_string(model.arity() - 1) + " alpha reference values");
}

class Evaluator {
public:
    Evaluator(const ModelFunction& model, std::span<const double> alpha_ref) : model_(model), input_(1 + alpha_ref.size()) {
        std::copy(alpha_ref.begin(), alpha_ref.end(), input_.begin() + 1);
    }
    double operator()(double ell) {
        input_[0] = ell;
        return model_(input_);
    }

private:
    const ModelFunction& model_;
    std::vector<double> input_;
};

std::vector<double> midpoint_scales(double scale_limit, std::size_t v_count) {
    if (!(scale_limit > 0.0) || !std::isfinite(scale_limit))
        throw InvalidArgument("integrated variogram: scale limit must be finite and > 0");
    if (v_count == 0) throw InvalidArgument("integrated variogram: v_count must be >= 1");
    const double h = scale_limit / static_cast<double>(v_count);
    std::vector<double> scales(v_count);
    for (std::size_t i = 0; i < v_count; ++i) scales[i] = (static_cast<double>(i) + 0.5) * h;
    return scales;
}

}  // namespace

std::vector<std::size_t> paired_nodes(const Grid& ell_grid, double v) {
    if (!std::isfinite(v)) throw InvalidArgument("variogram: lag must be finite");
    const auto& d = ell_grid.spec().dims.at(0);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ell_grid.count(0); ++i) {
        const double partner = ell_grid.axis(0)[i] + v;
        if (partner >= d.lower && partner <= d.upper) out.push_back(i);
    }
    return out;
}

double variogram(const ModelFunction& model, const Grid& ell_grid, double v, std::span<const double> alpha_ref) {
    check_location_grid(ell_grid, model, alpha_ref);
    const auto nodes = paired_nodes(ell_grid, v);
    if (nodes.empty()) throw InvalidArgument("variogram: lag " + std::to_string(v) + " pairs no location inside the grid");
    if (v == 0.0) return 0.0;
    Evaluator eval(model, alpha_ref);
    CompensatedSum acc;
    for (std::size_t i : nodes) {
        const double ell = ell_grid.axis(0)[i];
        const double d = eval(ell + v) - eval(ell);
        acc.add(d * d);
    }
    return 0.5 * acc.value() / static_cast<double>(nodes.size());
}

IntegratedVariogram integrated_variogram(const ModelFunction& model, const Grid& ell_grid, double scale_limit,
                                         std::size_t v_count, std::span<const double> alpha_ref) {
    IntegratedVariogram out;
    out.scale_limit = scale_limit;
    out.scales = midpoint_scales(scale_limit, v_count);
    out.gamma.reserve(v_count);
    CompensatedSum acc;
    for (double v : out.scales) {
        out.gamma.push_back(variogram(model, ell_grid, v, alpha_ref));
        acc.add(out.gamma.back());
    }
    const double h = scale_limit / static_cast<double>(v_count);
    out.integral = h * acc.value();
    out.expectation = out.integral / scale_limit;
    return out;
}

double integrated_variogram_location_first(const ModelFunction& model, const Grid& ell_grid, double scale_limit,
                                           std::size_t v_count, std::span<const double> alpha_ref) {
    check_location_grid(ell_grid, model, alpha_ref);
    const auto scales = midpoint_scales(scale_limit, v_count);
    std::vector<std::size_t> paired(v_count);
    for (std::size_t k = 0; k < v_count; ++k) {
        paired[k] = paired_nodes(ell_grid, scales[k]).size();
        if (paired[k] == 0) throw InvalidArgument("variogram: lag pairs no location inside the grid");
    }
    const auto& dom = ell_grid.spec().dims[0];
    const double h = scale_limit / static_cast<double>(v_count);
    Evaluator eval(model, alpha_ref);
    CompensatedSum total;
    for (std::size_t i = 0; i < ell_grid.count(0); ++i) {
        const double ell = ell_grid.axis(0)[i];
        const double base = eval(ell);
        CompensatedSum inner;
        for (std::size_t k = 0; k < v_count; ++k) {
            const double partner = ell + scales[k];
            if (partner < dom.lower || partner > dom.upper) continue;
            const double d = eval(partner) - base;
            inner.add(d * d / static_cast<double>(paired[k]));
        }
        total.add(inner.value());
    }
    return 0.5 * h * total.value();
}

std::vector<double> cumulative_integrated_variogram(const ModelFunction& model, const Grid& ell_grid, double h,
                                                    std::size_t count, std::span<const double> alpha_ref) {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("cumulative variogram: step must be finite and > 0");
    std::vector<double> out(count);
    CompensatedSum acc;
    for (std::size_t k = 0; k < count; ++k) {
        acc.add(variogram(model, ell_grid, (static_cast<double>(k) + 0.5) * h, alpha_ref));
        out[k] = h * acc.value();
    }
    return out;
}

JointWeights scale_weights(const Grid& ell_grid, std::span<const double> scales, std::span<const double> scale_mass) {
    if (ell_grid.dimension() != 1) throw InvalidArgument("joint weights: location grid must be 1-D");
    if (scales.size() != scale_mass.size() || scales.empty())
        throw InvalidArgument("joint weights: need one mass per scale");
    JointWeights w;
    w.scales.assign(scales.begin(), scales.end());
    w.locations.assign(ell_grid.axis(0).begin(), ell_grid.axis(0).end());
    const std::size_t n = w.locations.size();
    w.weights.assign(scales.size() * n, 0.0);
    for (std::size_t k = 0; k < scales.size(); ++k) {
        if (scale_mass[k] == 0.0) continue;
        const auto nodes = paired_nodes(ell_grid, scales[k]);
        if (nodes.empty()) throw InvalidArgument("joint weights: lag pairs no location inside the grid");
        const double each = scale_mass[k] / static_cast<double>(nodes.size());
        for (std::size_t i : nodes) w.weights[k * n + i] = each;
    }
    return w;
}

JointWeights ivars_weights(const Grid& ell_grid, double scale_limit, std::size_t v_count) {
    const auto scales = midpoint_scales(scale_limit, v_count);
    const std::vector<double> mass(v_count, 1.0 / static_cast<double>(v_count));
    return scale_weights(ell_grid, scales, mass);
}

JointWeights delta_weights(const Grid& ell_grid, double v) {
    const double scale[] = {v};
    const double mass[] = {1.0};
    return scale_weights(ell_grid, scale, mass);
}

double generalized_expectation(const ModelFunction& model, const JointWeights& weights,
                               std::span<const double> alpha_ref) {
    if (model.arity() != 1 + alpha_ref.size())
        throw InvalidArgument("generalized_expectation: model arity does not match alpha reference");
    const std::size_t nv = weights.scales.size();
    const std::size_t nl = weights.locations.size();
    if (weights.weights.size() != nv * nl) throw InvalidArgument("generalized_expectation: weight shape mismatch");
    CompensatedSum total;
    for (double w : weights.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("generalized_expectation: weights must be finite and >= 0");
        total.add(w);
    }
    if (std::abs(total.value() - 1.0) > kJointWeightTolerance)
        throw InvalidArgument("generalized_expectation: weights sum to " + std::to_string(total.value()) + ", not 1");

    Evaluator eval(model, alpha_ref);
    std::vector<double> base(nl);
    std::vector<bool> have(nl, false);
    CompensatedSum acc;
    for (std::size_t k = 0; k < nv; ++k) {
        for (std::size_t i = 0; i < nl; ++i) {
            const double w = weights.weights[k * nl + i];
            if (w == 0.0) continue;
            if (!have[i]) {
                base[i] = eval(weights.locations[i]);
                have[i] = true;
            }
            const double d = eval(weights.locations[i] + weights.scales[k]) - base[i];
            acc.add(w * d * d);
        }
    }
    return 0.5 * acc.value();
}

double local_square_deviation(const ModelFunction& model, double ell, const MeasurementScenario& scenario,
                              const Grid& grid, PdfCentering centering) {
    if (grid.spec().x_dimensions() != 1) throw InvalidArgument("local_square_deviation: exactly one x dimension is supported");
    if (model.arity() != grid.dimension()) throw InvalidArgument("local_square_deviation: model arity != grid dimension");
    if (!(scenario.sigma_ell > 0.0) || !(scenario.sigma_alpha > 0.0))
        throw InvalidArgument("local_square_deviation: sigmas must be > 0");
    const std::size_t dim = grid.dimension();
    std::vector<double> mean(dim, 0.0);
    std::vector<double> sigma(dim, scenario.sigma_alpha);
    sigma[0] = scenario.sigma_ell;
    const double x_shift = centering == PdfCentering::absolute ? 0.0 : ell;
    if (centering == PdfCentering::absolute) mean[0] = ell;
    const auto p = gaussian_on_grid(grid, mean, sigma);

    std::vector<double> input(dim);
    CompensatedSum acc;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (p[j] == 0.0) continue;
        const auto node = grid.node(j);
        std::copy(node.begin(), node.end(), input.begin());
        input[0] = node[0] + x_shift;
        const double y = model(input);
        input[0] = ell;
        const double d = y - model(input);
        acc.add(p[j] * d * d);
    }
    return 0.5 * acc.value();
}

}  // namespace vup

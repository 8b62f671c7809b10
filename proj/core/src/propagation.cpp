#include "vup/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vup/error.hpp"

namespace vup {

OutputBinning::OutputBinning(double y_min, double y_max, std::size_t bins)
    : y_min_(y_min), y_max_(y_max), bins_(bins), width_(0.0) {
    if (!std::isfinite(y_min) || !std::isfinite(y_max)) throw InvalidArgument("binning: bounds must be finite");
    if (y_min > y_max) throw InvalidArgument("binning: y_min must be <= y_max");
    if (bins == 0) throw InvalidArgument("binning: bin count must be >= 1");
    if (bins > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("binning: too many bins");
    if (y_min == y_max) bins_ = 1;
    width_ = (y_max_ - y_min_) / static_cast<double>(bins_);
}

OutputBinning OutputBinning::spanning(std::span<const double> outputs, std::size_t bins) {
    if (outputs.empty()) throw InvalidArgument("binning: outputs are empty");
    double lo = outputs[0];
    double hi = outputs[0];
    for (double y : outputs) {
        if (!std::isfinite(y)) throw InvalidArgument("binning: outputs must be finite");
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    return OutputBinning(lo, hi, bins);
}

std::vector<double> OutputBinning::centers() const {
    std::vector<double> c(bins_);
    for (std::size_t r = 0; r < bins_; ++r) c[r] = center(r);
    return c;
}

std::size_t OutputBinning::locate(double y) const {
    if (!std::isfinite(y)) throw InvalidArgument("binning: cannot locate a non-finite value");
    if (bins_ == 1 || !(y > y_min_)) return 0;
    const double t = std::floor((y - y_min_) / width_);
    if (t >= static_cast<double>(bins_ - 1)) return bins_ - 1;
    return static_cast<std::size_t>(t);
}

SparseModelMatrix::SparseModelMatrix(std::vector<std::uint32_t> bin_of, OutputBinning binning,
                                     std::shared_ptr<const Grid> grid, std::uint64_t model_hash)
    : bin_of_(std::move(bin_of)), binning_(binning), grid_(std::move(grid)), model_hash_(model_hash) {
    if (bin_of_.empty()) throw InvalidArgument("model matrix: no inputs");
    if (grid_ && grid_->size() != bin_of_.size())
        throw InvalidArgument("model matrix: grid has " + std::to_string(grid_->size()) + " nodes but matrix has " +
                              std::to_string(bin_of_.size()) + " columns");
    for (auto r : bin_of_)
        if (r >= binning_.size()) throw InvalidArgument("model matrix: bin index out of range");
}

OutputProbabilityMatrix::OutputProbabilityMatrix(OutputBinning binning, std::vector<double> locations)
    : binning_(binning), locations_(std::move(locations)), data_(binning_.size() * locations_.size(), 0.0) {}

SparseModelMatrix build_model_matrix(std::span<const double> outputs, const OutputBinning& binning) {
    if (outputs.empty()) throw InvalidArgument("build_model_matrix: outputs are empty");
    if (outputs.size() > std::numeric_limits<std::uint32_t>::max())
        throw InvalidArgument("build_model_matrix: too many inputs for 32-bit indices");
    std::vector<std::uint32_t> bin_of(outputs.size());
    for (std::size_t j = 0; j < outputs.size(); ++j) {
        if (!std::isfinite(outputs[j]))
            throw InvalidArgument("build_model_matrix: output " + std::to_string(j) + " is not finite");
        bin_of[j] = static_cast<std::uint32_t>(binning.locate(outputs[j]));
    }
    return SparseModelMatrix(std::move(bin_of), binning);
}

SparseModelMatrix build_model_matrix(std::span<const double> outputs, std::size_t bins) {
    if (bins == 0) throw InvalidArgument("build_model_matrix: K must be >= 1");
    return build_model_matrix(outputs, OutputBinning::spanning(outputs, bins));
}

SparseModelMatrix build_model_matrix(const ModelFunction& model, std::shared_ptr<const Grid> grid, std::size_t bins,
                                     unsigned threads) {
    if (!grid) throw InvalidArgument("build_model_matrix: null grid");
    const auto outputs = eval_on_grid(model, *grid, threads);
    auto bare = build_model_matrix(outputs, bins);
    std::vector<std::uint32_t> bin_of(bare.bin_of().begin(), bare.bin_of().end());
    return SparseModelMatrix(std::move(bin_of), bare.binning(), std::move(grid), model.hash());
}

void propagate_masses_into(const SparseModelMatrix& matrix, std::span<const double> masses, std::span<double> out) {
    if (masses.size() != matrix.inputs())
        throw InvalidArgument("propagate: input length " + std::to_string(masses.size()) + " != N = " +
                              std::to_string(matrix.inputs()));
    if (out.size() != matrix.outputs()) throw InvalidArgument("propagate: output length != K");
    std::fill(out.begin(), out.end(), 0.0);
    const auto bin_of = matrix.bin_of();
    for (std::size_t j = 0; j < masses.size(); ++j) out[bin_of[j]] += masses[j];
}

std::vector<double> propagate_masses(const SparseModelMatrix& matrix, std::span<const double> masses) {
    std::vector<double> out(matrix.outputs());
    propagate_masses_into(matrix, masses, out);
    return out;
}

ProbabilityVector propagate(const SparseModelMatrix& matrix, const ProbabilityVector& p) {
    return ProbabilityVector::from_masses(propagate_masses(matrix, p.values()));
}

OutputProbabilityMatrix propagate_many(const SparseModelMatrix& matrix, const ProbabilityMatrix& p, unsigned threads) {
    if (p.rows() != matrix.inputs())
        throw InvalidArgument("propagate_many: probability matrix has " + std::to_string(p.rows()) +
                              " rows but model matrix has N = " + std::to_string(matrix.inputs()));
    if (matrix.grid() && p.grid() && !(matrix.grid()->spec() == p.grid()->spec()))
        throw InvalidArgument("propagate_many: probability matrix and model matrix are on different grids");
    std::vector<double> locations(p.locations().begin(), p.locations().end());
    OutputProbabilityMatrix out(matrix.binning(), std::move(locations));
    parallel_for(
        p.cols(),
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t l = begin; l < end; ++l) propagate_masses_into(matrix, p.column(l), out.column(l));
        },
        threads);
    return out;
}

InvertedModelMatrix invert(const SparseModelMatrix& matrix, const ProbabilityVector& prior) {
    if (prior.size() != matrix.inputs())
        throw InvalidArgument("invert: prior length " + std::to_string(prior.size()) + " != N = " +
                              std::to_string(matrix.inputs()));
    const std::size_t k = matrix.outputs();
    const auto bin_of = matrix.bin_of();

    InvertedModelMatrix inv;
    inv.inputs_ = matrix.inputs();
    inv.output_probability_ = propagate_masses(matrix, prior.values());

    // Counting sort of inputs by output bin, skipping zero-probability rows.
    std::vector<std::size_t> counts(k, 0);
    for (auto r : bin_of)
        if (inv.output_probability_[r] > 0.0) ++counts[r];
    inv.offsets_.assign(k + 1, 0);
    for (std::size_t r = 0; r < k; ++r) inv.offsets_[r + 1] = inv.offsets_[r] + counts[r];
    inv.entries_.resize(inv.offsets_[k]);
    std::vector<std::size_t> cursor(inv.offsets_.begin(), inv.offsets_.end() - 1);
    for (std::size_t j = 0; j < bin_of.size(); ++j) {
        const auto r = bin_of[j];
        const double out = inv.output_probability_[r];
        if (out > 0.0) inv.entries_[cursor[r]++] = {static_cast<std::uint32_t>(j), prior[j] / out};
    }
    return inv;
}

ProbabilityVector posterior(const InvertedModelMatrix& inverted, std::size_t bin) {
    if (bin >= inverted.outputs())
        throw InvalidArgument("posterior: bin " + std::to_string(bin) + " out of range [0, " +
                              std::to_string(inverted.outputs()) + ")");
    const auto row = inverted.row(bin);
    if (row.empty()) throw NoSupportError("posterior: output bin " + std::to_string(bin) + " has zero probability");
    std::vector<double> dense(inverted.inputs(), 0.0);
    for (const auto& e : row) dense[e.input] = e.probability;
    return ProbabilityVector::from_masses(std::move(dense));
}

}  // namespace vup

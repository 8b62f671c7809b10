#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "vup/distribution.hpp"
#include "vup/grid.hpp"
#include "vup/model.hpp"
#include "vup/parallel.hpp"

namespace vup {

/// K uniform output bins over [y_min, y_max].
///
/// Bin r is [y_min + r b, y_min + (r + 1) b) except the last, which is
/// closed. If y_min == y_max the binning collapses to a single bin.
class OutputBinning {
public:
    OutputBinning(double y_min, double y_max, std::size_t bins);

    /// Binning spanning exactly [min(outputs), max(outputs)].
    static OutputBinning spanning(std::span<const double> outputs, std::size_t bins);

    std::size_t size() const { return bins_; }
    double lower() const { return y_min_; }
    double upper() const { return y_max_; }
    double width() const { return width_; }
    double edge(std::size_t r) const { return r == bins_ ? y_max_ : y_min_ + static_cast<double>(r) * width_; }
    double center(std::size_t r) const { return y_min_ + (static_cast<double>(r) + 0.5) * width_; }
    std::vector<double> centers() const;

    /// floor((y - y_min) / b) clamped to [0, K - 1]. Values outside the
    /// range land in the end bins.
    std::size_t locate(double y) const;

    bool operator==(const OutputBinning&) const = default;

private:
    double y_min_;
    double y_max_;
    std::size_t bins_;
    double width_;
};

/// The discretized deterministic propagator: a K x N 0/1 matrix with one
/// nonzero per column, stored as the column -> row map `bin_of`.
class SparseModelMatrix {
public:
    SparseModelMatrix(std::vector<std::uint32_t> bin_of, OutputBinning binning,
                      std::shared_ptr<const Grid> grid = nullptr, std::uint64_t model_hash = 0);

    std::size_t inputs() const { return bin_of_.size(); }
    std::size_t outputs() const { return binning_.size(); }
    std::span<const std::uint32_t> bin_of() const { return bin_of_; }
    const OutputBinning& binning() const { return binning_; }
    const std::shared_ptr<const Grid>& grid() const { return grid_; }
    std::uint64_t model_hash() const { return model_hash_; }

private:
    std::vector<std::uint32_t> bin_of_;
    OutputBinning binning_;
    std::shared_ptr<const Grid> grid_;
    std::uint64_t model_hash_;
};

/// K x L output probabilities on one binning, column-major.
class OutputProbabilityMatrix {
public:
    OutputProbabilityMatrix(OutputBinning binning, std::vector<double> locations);

    std::size_t rows() const { return binning_.size(); }
    std::size_t cols() const { return locations_.size(); }
    const OutputBinning& binning() const { return binning_; }
    std::span<const double> locations() const { return locations_; }
    std::span<const double> column(std::size_t l) const { return {data_.data() + l * rows(), rows()}; }
    std::span<double> column(std::size_t l) { return {data_.data() + l * rows(), rows()}; }
    double at(std::size_t r, std::size_t l) const { return data_[l * rows() + r]; }

private:
    OutputBinning binning_;
    std::vector<double> locations_;
    std::vector<double> data_;
};

SparseModelMatrix build_model_matrix(std::span<const double> outputs, std::size_t bins);
SparseModelMatrix build_model_matrix(std::span<const double> outputs, const OutputBinning& binning);

/// Evaluates the model on the grid and bins the outputs (K forced to 1 for
/// constant models).
SparseModelMatrix build_model_matrix(const ModelFunction& model, std::shared_ptr<const Grid> grid,
                                     std::size_t bins, unsigned threads = default_threads());

/// Scatter-add of arbitrary non-negative masses: out[r] = sum_{bin_of[j]=r} p[j].
std::vector<double> propagate_masses(const SparseModelMatrix& matrix, std::span<const double> masses);
void propagate_masses_into(const SparseModelMatrix& matrix, std::span<const double> masses, std::span<double> out);

ProbabilityVector propagate(const SparseModelMatrix& matrix, const ProbabilityVector& p);

/// Propagates every column of P through the same matrix.
OutputProbabilityMatrix propagate_many(const SparseModelMatrix& matrix, const ProbabilityMatrix& p,
                                       unsigned threads = default_threads());

/// Row-wise Bayes posteriors p(j | r) for one input prior, in CSR layout.
class InvertedModelMatrix {
public:
    struct Entry {
        std::uint32_t input;
        double probability;
    };

    std::size_t outputs() const { return output_probability_.size(); }
    std::size_t inputs() const { return inputs_; }
    std::span<const Entry> row(std::size_t r) const {
        return {entries_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
    }
    /// p(y_r) under the prior.
    std::span<const double> output_probability() const { return output_probability_; }

private:
    friend InvertedModelMatrix invert(const SparseModelMatrix&, const ProbabilityVector&);
    std::size_t inputs_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<Entry> entries_;
    std::vector<double> output_probability_;
};

/// Row r holds (j, prior[j] / out[r]) for every j in the preimage of r;
/// rows with out[r] == 0 are empty.
InvertedModelMatrix invert(const SparseModelMatrix& matrix, const ProbabilityVector& prior);

/// Dense posterior over inputs given output bin r. Throws NoSupportError for
/// zero-probability outcomes.
ProbabilityVector posterior(const InvertedModelMatrix& inverted, std::size_t bin);

}  // namespace vup

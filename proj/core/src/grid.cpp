#include "vup/grid.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vup/error.hpp"

namespace vup {

std::size_t GridSpec::node_count() const {
    std::size_t n = 1;
    for (const auto& d : dims) n *= d.count;
    return n;
}

std::size_t GridSpec::x_dimensions() const {
    std::size_t n = 0;
    for (const auto& d : dims) n += d.role == Role::x ? 1 : 0;
    return n;
}

void GridSpec::validate() const {
    if (dims.empty()) throw InvalidArgument("grid: at least one dimension is required");
    bool seen_alpha = false;
    std::size_t total = 1;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const auto& d = dims[i];
        const std::string where = "grid.dims[" + std::to_string(i) + "] (" + d.name + ")";
        if (!std::isfinite(d.lower) || !std::isfinite(d.upper))
            throw InvalidArgument(where + ": bounds must be finite");
        if (!(d.lower < d.upper)) throw InvalidArgument(where + ": lower must be < upper");
        if (d.count == 0) throw InvalidArgument(where + ": count must be >= 1");
        if (d.role == Role::alpha) seen_alpha = true;
        else if (seen_alpha) throw InvalidArgument(where + ": x dimensions must precede alpha dimensions");
        if (total > std::numeric_limits<std::size_t>::max() / d.count)
            throw InvalidArgument("grid: node count overflows");
        total *= d.count;
    }
}

Grid::Grid(GridSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const std::size_t dim = spec_.dims.size();
    size_ = spec_.node_count();

    steps_.resize(dim);
    axes_.resize(dim);
    strides_.assign(dim, 1);
    for (std::size_t d = dim; d-- > 1;) strides_[d - 1] = strides_[d] * spec_.dims[d].count;

    for (std::size_t d = 0; d < dim; ++d) {
        const auto& s = spec_.dims[d];
        const double step = (s.upper - s.lower) / static_cast<double>(s.count);
        const double center = 0.5 * (s.lower + s.upper);
        const double half = 0.5 * static_cast<double>(s.count - 1);
        steps_[d] = step;
        cell_volume_ *= step;
        axes_[d].resize(s.count);
        for (std::size_t k = 0; k < s.count; ++k)
            axes_[d][k] = center + (static_cast<double>(k) - half) * step;
    }

    nodes_.resize(size_ * dim);
    for (std::size_t i = 0; i < size_; ++i) {
        std::size_t rest = i;
        for (std::size_t d = 0; d < dim; ++d) {
            const std::size_t k = rest / strides_[d];
            rest %= strides_[d];
            nodes_[i * dim + d] = axes_[d][k];
        }
    }
}

std::size_t Grid::flat_index(std::span<const std::size_t> multi_index) const {
    if (multi_index.size() != dimension())
        throw InvalidArgument("flat_index: expected " + std::to_string(dimension()) + " components, got " +
                              std::to_string(multi_index.size()));
    std::size_t flat = 0;
    for (std::size_t d = 0; d < dimension(); ++d) {
        if (multi_index[d] >= spec_.dims[d].count)
            throw InvalidArgument("flat_index: component " + std::to_string(d) + " = " +
                                  std::to_string(multi_index[d]) + " out of range [0, " +
                                  std::to_string(spec_.dims[d].count) + ")");
        flat += multi_index[d] * strides_[d];
    }
    return flat;
}

std::vector<std::size_t> Grid::multi_index(std::size_t flat) const {
    if (flat >= size_) throw InvalidArgument("multi_index: flat index " + std::to_string(flat) + " out of range");
    std::vector<std::size_t> out(dimension());
    for (std::size_t d = 0; d < dimension(); ++d) {
        out[d] = flat / strides_[d];
        flat %= strides_[d];
    }
    return out;
}

Grid make_grid(const GridSpec& spec) { return Grid(spec); }

}  // namespace vup

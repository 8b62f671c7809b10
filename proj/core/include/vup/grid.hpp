#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vup {

/// Data-like inputs (x) versus model-parameter-like inputs (alpha).
enum class Role { x, alpha };

struct Dimension {
    std::string name;
    Role role = Role::x;
    double lower = 0.0;
    double upper = 1.0;
    std::size_t count = 1;

    double length() const { return upper - lower; }
    bool operator==(const Dimension&) const = default;
};

/// Per-dimension bounds and counts of a uniform midpoint grid.
///
/// Dimensions are flattened row-major in the listed order, so the first
/// dimension varies slowest. All x dimensions must be listed before any
/// alpha dimension; model variables bind to dimensions by position.
struct GridSpec {
    std::vector<Dimension> dims;

    std::size_t node_count() const;
    std::size_t x_dimensions() const;

    /// Throws InvalidArgument describing the first violated invariant.
    void validate() const;

    bool operator==(const GridSpec&) const = default;
};

/// Immutable uniform grid with cell-center nodes.
///
/// Node k of dimension d sits at lower_d + (k + 0.5) * step_d. Coordinates
/// are computed as center_d + (k - (count_d - 1) / 2) * step_d, which gives
/// bitwise mirror symmetry on grids symmetric about zero.
class Grid {
public:
    explicit Grid(GridSpec spec);

    std::size_t size() const { return size_; }
    std::size_t dimension() const { return spec_.dims.size(); }
    const GridSpec& spec() const { return spec_; }

    std::span<const double> node(std::size_t flat) const {
        return {nodes_.data() + flat * dimension(), dimension()};
    }
    double coordinate(std::size_t flat, std::size_t d) const { return nodes_[flat * dimension() + d]; }

    /// The 1-D node coordinates of dimension d.
    std::span<const double> axis(std::size_t d) const { return axes_[d]; }
    std::size_t count(std::size_t d) const { return spec_.dims[d].count; }
    double step(std::size_t d) const { return steps_[d]; }
    std::span<const double> steps() const { return steps_; }
    double cell_volume() const { return cell_volume_; }

    std::size_t flat_index(std::span<const std::size_t> multi_index) const;
    std::vector<std::size_t> multi_index(std::size_t flat) const;

private:
    GridSpec spec_;
    std::size_t size_ = 0;
    std::vector<double> steps_;
    std::vector<std::size_t> strides_;
    std::vector<std::vector<double>> axes_;
    std::vector<double> nodes_;
    double cell_volume_ = 1.0;
};

Grid make_grid(const GridSpec& spec);

}  // namespace vup

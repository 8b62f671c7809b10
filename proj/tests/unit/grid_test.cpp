#include <gtest/gtest.h>

#include "vup/error.hpp"
#include "vup/grid.hpp"

using namespace vup;

namespace {

GridSpec two_d() {
    return GridSpec{{{"x", Role::x, -5.0, 5.0, 100}, {"alpha", Role::alpha, -1.0, 1.0, 50}}};
}

}  // namespace

TEST(Grid, NodesSitAtCellCenters) {
    const Grid g(GridSpec{{{"x", Role::x, 0.0, 1.0, 4}}});
    ASSERT_EQ(g.size(), 4u);
    EXPECT_DOUBLE_EQ(g.step(0), 0.25);
    EXPECT_DOUBLE_EQ(g.axis(0)[0], 0.125);
    EXPECT_DOUBLE_EQ(g.axis(0)[3], 0.875);
    EXPECT_DOUBLE_EQ(g.cell_volume(), 0.25);
}

TEST(Grid, SymmetricDomainGivesExactMirrorNodes) {
    const Grid g(GridSpec{{{"x", Role::x, -5.0, 5.0, 101}}});
    const auto a = g.axis(0);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], -a[a.size() - 1 - k]) << k;
    EXPECT_EQ(a[50], 0.0);
}

TEST(Grid, RowMajorFirstDimensionSlowest) {
    const Grid g(two_d());
    EXPECT_EQ(g.size(), 5000u);
    EXPECT_EQ(g.coordinate(0, 0), g.coordinate(49, 0));
    EXPECT_NE(g.coordinate(0, 0), g.coordinate(50, 0));
    EXPECT_EQ(g.coordinate(1, 1), g.axis(1)[1]);
    EXPECT_DOUBLE_EQ(g.cell_volume(), 0.1 * 0.04);
}

TEST(Grid, FlatAndMultiIndexRoundTrip) {
    const Grid g(GridSpec{{{"a", Role::x, 0, 1, 3}, {"b", Role::alpha, 0, 1, 4}, {"c", Role::alpha, 0, 1, 5}}});
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto m = g.multi_index(i);
        EXPECT_EQ(g.flat_index(m), i);
        for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(g.node(i)[d], g.axis(d)[m[d]]);
    }
    const std::size_t bad[] = {3, 0, 0};
    EXPECT_THROW(g.flat_index(bad), InvalidArgument);
}

TEST(Grid, ValidationRejectsBadSpecs) {
    auto spec = two_d();
    spec.dims[0].lower = 5.0;
    EXPECT_THROW(Grid{spec}, InvalidArgument);
    spec = two_d();
    spec.dims[1].count = 0;
    EXPECT_THROW(Grid{spec}, InvalidArgument);
    spec = two_d();
    spec.dims[0].upper = std::numeric_limits<double>::infinity();
    EXPECT_THROW(Grid{spec}, InvalidArgument);
    spec = two_d();
    std::swap(spec.dims[0], spec.dims[1]);
    EXPECT_THROW(Grid{spec}, InvalidArgument);
    EXPECT_THROW(Grid{GridSpec{}}, InvalidArgument);
}

TEST(Grid, SingleNodeDimension) {
    const Grid g(GridSpec{{{"x", Role::x, -1.0, 3.0, 1}}});
    EXPECT_EQ(g.size(), 1u);
    EXPECT_DOUBLE_EQ(g.axis(0)[0], 1.0);
}

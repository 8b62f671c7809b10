#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vup/error.hpp"
#include "vup/ipsa.hpp"

using namespace vup;

namespace {

std::shared_ptr<const Grid> ipsa_grid(std::size_t nx = 100, std::size_t na = 100) {
    return std::make_shared<const Grid>(GridSpec{{{"x", Role::x, -5, 5, nx}, {"alpha", Role::alpha, -1, 1, na}}});
}

double column_sum(std::span<const double> c) {
    double s = 0.0;
    for (double v : c) s += v;
    return s;
}

IpsaMatrix single_column(std::vector<double> p, double first = 0.0, double width = 1.0) {
    IpsaMatrix m(DeviationAxis{first, width, p.size()}, {0.0}, {0.0});
    std::copy(p.begin(), p.end(), m.column(0).begin());
    return m;
}

// Shortest run with mass >= level by trying every (start, end).
std::pair<std::size_t, std::size_t> brute_shortest(std::span<const double> p, double level) {
    std::size_t best_lo = 0, best_hi = p.size() - 1;
    for (std::size_t lo = 0; lo < p.size(); ++lo) {
        double mass = 0.0;
        for (std::size_t hi = lo; hi < p.size(); ++hi) {
            mass += p[hi];
            if (mass >= level - 1e-12) {
                if (hi - lo < best_hi - best_lo) {
                    best_lo = lo;
                    best_hi = hi;
                }
                break;
            }
        }
    }
    return {best_lo, best_hi};
}

}  // namespace

TEST(ReferenceCurve, Values) {
    const auto m = builtin("ipsa2d");
    const double locs[] = {0.0, 1.0};
    const double alpha[] = {0.0};
    const auto y = reference_curve(m, locs, alpha);
    EXPECT_EQ(y[0], 0.0);
    EXPECT_DOUBLE_EQ(y[1], 1.0 + 5.0 * std::sin(3.0));
    const ModelFunction id("id", 1, [](std::span<const double> v) { return v[0]; });
    const auto same = reference_curve(id, locs, {});
    EXPECT_EQ(same[1], 1.0);
    EXPECT_THROW(reference_curve(m, locs, {}), InvalidArgument);
}

TEST(OutputMatrix, TinySigmaApproachesDelta) {
    auto grid = ipsa_grid(101, 101);
    const auto model = builtin("ipsa2d");
    const MeasurementScenario s{{0.0, grid->axis(0)[70]}, 0.001, 0.001, {}};
    const auto out = output_matrix(model, grid, s, 200);
    for (std::size_t l = 0; l < 2; ++l) {
        const std::size_t want = out.binning().locate(model({s.locations[l], 0.0}));
        EXPECT_NEAR(out.at(want, l), 1.0, 1e-9) << l;
    }
}

TEST(OutputMatrix, EvenModelGivesMirroredColumns) {
    auto grid = std::make_shared<const Grid>(GridSpec{{{"x", Role::x, -4, 4, 80}, {"alpha", Role::alpha, -1, 1, 5}}});
    const ModelFunction even("even", 2, [](std::span<const double> v) { return v[0] * v[0]; });
    const MeasurementScenario s{{-1.5, 1.5}, 0.3, 0.25, {}};
    const auto out = output_matrix(even, grid, s, 60);
    for (std::size_t r = 0; r < out.rows(); ++r) EXPECT_NEAR(out.at(r, 0), out.at(r, 1), 1e-15) << r;
}

TEST(OutputMatrix, PerLocationPathAgreesWithSharedMatrix) {
    auto grid = ipsa_grid(200, 50);
    const auto model = builtin("ipsa2d");
    const MeasurementScenario s{{-1.0, 0.5, 1.0}, 0.5, 0.25, {}};
    const auto shared = output_matrix(model, grid, s, 40, PropagationStrategy::shared_matrix);
    const auto local = output_matrix(model, grid, s, 40, PropagationStrategy::per_location);
    for (std::size_t l = 0; l < 3; ++l) {
        EXPECT_NEAR(column_sum(local.column(l)), 1.0, 1e-9);
        std::vector<double> a(shared.column(l).begin(), shared.column(l).end());
        std::vector<double> b(local.column(l).begin(), local.column(l).end());
        // Different axes: compare means instead of bins.
        double ma = 0.0, mb = 0.0;
        for (std::size_t r = 0; r < 40; ++r) {
            ma += a[r] * shared.binning().center(r);
            mb += b[r] * local.binning().center(r);
        }
        EXPECT_NEAR(ma, mb, 0.5 * shared.binning().width() + 0.5 * local.binning().width());
    }
}

TEST(ToDeviations, ZeroReferenceOnlyRelabels) {
    auto grid = ipsa_grid(50, 20);
    const MeasurementScenario s{{-1.0, 0.0, 1.0}, 0.5, 0.25, {}};
    const auto out = output_matrix(builtin("ipsa2d"), grid, s, 80);
    const std::vector<double> zero(3, 0.0);
    const auto d = to_deviations(out, zero);
    ASSERT_EQ(d.rows(), out.rows());
    EXPECT_EQ(d.axis().center(0), out.binning().center(0));
    for (std::size_t l = 0; l < 3; ++l)
        for (std::size_t r = 0; r < out.rows(); ++r) EXPECT_EQ(d.column(l)[r], out.at(r, l));
}

TEST(ToDeviations, ConstantModelPutsMassAtZero) {
    auto grid = ipsa_grid(20, 10);
    const ModelFunction constant("c", 2, [](std::span<const double>) { return 3.5; });
    const MeasurementScenario s{{0.0}, 0.5, 0.25, {}};
    const auto out = output_matrix(constant, grid, s, 100);
    const double alpha[] = {0.0};
    const auto d = to_deviations(out, reference_curve(constant, s.locations, alpha));
    ASSERT_EQ(d.rows(), 1u);
    EXPECT_EQ(d.axis().center(0), 0.0);
    EXPECT_NEAR(d.column(0)[0], 1.0, 1e-12);
}

TEST(ToDeviations, ConservesMassAndIsShiftInvariant) {
    auto grid = ipsa_grid(80, 40);
    const auto model = builtin("ipsa2d");
    const ModelFunction lifted("lifted", 2, [&](std::span<const double> v) { return model(v) + 12.25; });
    const auto s = MeasurementScenario::evenly_spaced(-3, 3, 15, 0.25, 0.25);
    const double alpha[] = {0.0};
    const auto out = output_matrix(model, grid, s, 150);
    const auto up = output_matrix(lifted, grid, s, 150);
    EXPECT_NEAR(up.binning().lower() - out.binning().lower(), 12.25, 1e-12);
    const auto d = to_deviations(out, reference_curve(model, s.locations, alpha));
    const auto du = to_deviations(up, reference_curve(lifted, s.locations, alpha));
    ASSERT_EQ(d.rows(), du.rows());
    for (std::size_t l = 0; l < s.locations.size(); ++l) {
        EXPECT_NEAR(column_sum(d.column(l)), column_sum(out.column(l)), 1e-12);
        for (std::size_t m = 0; m < d.rows(); ++m) EXPECT_NEAR(d.column(l)[m], du.column(l)[m], 1e-12);
    }
}

TEST(ToDeviations, ShapeMismatch) {
    auto grid = ipsa_grid(20, 10);
    const MeasurementScenario s{{0.0, 1.0}, 0.5, 0.25, {}};
    const auto out = output_matrix(builtin("ipsa2d"), grid, s, 10);
    EXPECT_THROW(to_deviations(out, std::vector<double>{0.0}), InvalidArgument);
}

TEST(Summaries, SymmetricColumn) {
    const auto m = single_column({0.1, 0.2, 0.4, 0.2, 0.1}, -2.0, 1.0);
    const double w[] = {1.0};
    const auto s = summarize(m, 0.75, w);
    EXPECT_NEAR(s.mean[0], 0.0, 1e-12);
    EXPECT_NEAR(s.variance[0], 0.1 * 4 * 2 + 0.2 * 2, 1e-12);
    EXPECT_EQ(s.argmax[0], 0.0);
    EXPECT_EQ(s.ci_lower[0], -1.5);
    EXPECT_EQ(s.ci_upper[0], 1.5);
}

TEST(Summaries, DeltaColumn) {
    const auto m = single_column({0.0, 0.0, 1.0, 0.0}, 0.0, 0.5);
    const double w[] = {1.0};
    const auto s = summarize(m, 0.95, w);
    EXPECT_EQ(s.variance[0], 0.0);
    EXPECT_EQ(s.ci_lower[0], 0.75);
    EXPECT_EQ(s.ci_upper[0], 1.25);
}

TEST(Summaries, TiesPreferLowerStart) {
    const auto m = single_column({0.3, 0.2, 0.2, 0.3}, 0.0, 1.0);
    const double w[] = {1.0};
    const auto s = summarize(m, 0.5, w);
    EXPECT_EQ(s.ci_lower[0], -0.5);
    EXPECT_EQ(s.ci_upper[0], 1.5);
    const auto first = single_column({0.5, 0.1, 0.5}, 0.0, 1.0);
    EXPECT_EQ(summarize(first, 0.3, w).argmax[0], 0.0);
}

TEST(Summaries, ShortestIntervalMatchesBruteForce) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double w[] = {1.0};
    for (int t = 0; t < 300; ++t) {
        std::vector<double> p(1 + rng() % 40);
        for (auto& v : p) v = u(rng) < 0.3 ? 0.0 : u(rng);
        p[rng() % p.size()] += 0.01;
        const auto pv = ProbabilityVector::from_weights(p);
        const auto m = single_column({pv.values().begin(), pv.values().end()});
        const double level = 0.05 + 0.9 * u(rng);
        const auto s = summarize(m, level, w);
        const auto [lo, hi] = brute_shortest(pv.values(), level);
        EXPECT_EQ(s.ci_lower[0], m.axis().lower_edge(lo)) << t;
        EXPECT_EQ(s.ci_upper[0], m.axis().upper_edge(hi)) << t;
    }
}

TEST(Summaries, EqualTailedInterval) {
    const auto m = single_column({0.05, 0.05, 0.4, 0.4, 0.05, 0.05}, 0.0, 1.0);
    const double w[] = {1.0};
    const auto s = summarize(m, 0.8, w, IntervalKind::equal_tailed);
    EXPECT_EQ(s.ci_lower[0], 1.5);
    EXPECT_EQ(s.ci_upper[0], 3.5);
}

TEST(Summaries, GlobalMarginalIsWeightedAverage) {
    auto grid = ipsa_grid(60, 30);
    const auto model = builtin("ipsa2d");
    MeasurementScenario s = MeasurementScenario::evenly_spaced(-2, 2, 7, 0.5, 0.25);
    s.weights = {0.05, 0.1, 0.2, 0.3, 0.2, 0.1, 0.05};
    const double alpha[] = {0.0};
    const auto out = output_matrix(model, grid, s, 90);
    const auto d = to_deviations(out, reference_curve(model, s.locations, alpha));
    const auto sum = summarize(d, 0.9, s.weights);
    for (std::size_t m = 0; m < d.rows(); ++m) {
        double expect = 0.0;
        for (std::size_t l = 0; l < 7; ++l) expect += s.weights[l] * d.column(l)[m];
        EXPECT_NEAR(sum.global_marginal[m], expect, 1e-12);
    }
    EXPECT_THROW(summarize(d, 1.0, s.weights), InvalidArgument);
    EXPECT_THROW(summarize(d, 0.5, std::vector<double>(7, 0.1)), InvalidArgument);
}

TEST(AlphaMatched, ZeroSigmaAlphaMatchesModeReference) {
    auto grid = std::make_shared<const Grid>(GridSpec{{{"x", Role::x, -5, 5, 100}, {"alpha", Role::alpha, -1, 1, 1}}});
    const auto model = builtin("ipsa2d");
    const MeasurementScenario s{{0.5}, 0.5, 0.1, {}};
    const auto d = alpha_matched_deviations(model, grid, s, 0.1);
    EXPECT_NEAR(column_sum(d.column(0)), 1.0, 1e-12);
    double mean = 0.0;
    for (std::size_t m = 0; m < d.rows(); ++m) mean += d.axis().center(m) * d.column(0)[m];
    const double mean_ref = [&] {
        const double mu[] = {0.5, 0.0}, sg[] = {0.5, 0.1};
        const auto p = gaussian_on_grid(*grid, mu, sg);
        double acc = 0.0;
        for (std::size_t j = 0; j < grid->size(); ++j) acc += p[j] * (model(grid->node(j)) - model({0.5, 0.0}));
        return acc;
    }();
    EXPECT_NEAR(mean, mean_ref, 0.05 + 1e-12);
}

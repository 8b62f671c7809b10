#include <gtest/gtest.h>

#include <cmath>

#include "vup/error.hpp"
#include "vup/model.hpp"

using namespace vup;

TEST(Model, Builtins) {
    const auto ipsa = builtin("ipsa2d");
    EXPECT_EQ(ipsa.arity(), 2u);
    EXPECT_EQ(ipsa({0.0, 0.0}), 0.0);
    EXPECT_DOUBLE_EQ(ipsa({1.0, 0.0}), 1.0 + 5.0 * std::sin(3.0));
    EXPECT_DOUBLE_EQ(ipsa({1.0, 0.25}), 1.25 + 5.0 * std::sin(3.0));
    const auto bench = builtin("bench2d");
    EXPECT_DOUBLE_EQ(bench({0.5, 0.3}), 1.1 * std::sin(0.5) + 7.0 * std::sin(0.3) * std::sin(0.3));
}

TEST(Model, UnknownBuiltinListsAvailable) {
    try {
        builtin("nope");
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("ipsa2d"), std::string::npos);
    }
}

TEST(Model, ArityAndFiniteness) {
    const auto m = builtin("ipsa2d");
    EXPECT_THROW(m({1.0}), InvalidArgument);
    const ModelFunction bad("bad", 1, [](std::span<const double> v) { return 1.0 / v[0]; });
    EXPECT_THROW(bad({0.0}), EvaluationError);
}

TEST(Model, ParsedExpressionMatchesBuiltin) {
    const auto parsed = parse_expression("x^2 + 5*sin(3*x) + alpha", {"x", "alpha"});
    const auto ref = builtin("ipsa2d");
    for (double x : {-2.0, -0.3, 0.0, 1.7})
        for (double a : {-0.5, 0.0, 0.9}) EXPECT_NEAR(parsed({x, a}), ref({x, a}), 1e-13);
}

TEST(Model, HashTracksSource) {
    const auto a = parse_expression("x + alpha", {"x", "alpha"});
    const auto b = parse_expression("x + alpha", {"x", "alpha"});
    const auto c = parse_expression("x - alpha", {"x", "alpha"});
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_NE(a.hash(), c.hash());
    EXPECT_NE(builtin("ipsa2d").hash(), builtin("bench2d").hash());
}

TEST(Model, EvalOnGridReportsLowestFailingNode) {
    const Grid g(GridSpec{{{"x", Role::x, -1.0, 1.0, 20}}});
    const ModelFunction m("log", 1, [](std::span<const double> v) { return std::log(v[0]); });
    for (unsigned threads : {1u, 4u}) {
        try {
            eval_on_grid(m, g, threads);
            FAIL();
        } catch (const EvaluationError& e) {
            EXPECT_NE(std::string(e.what()).find("-0.95"), std::string::npos) << e.what();
        }
    }
}

TEST(Model, EvalOnGridIsThreadInvariant) {
    const Grid g(GridSpec{{{"x", Role::x, -5.0, 5.0, 37}, {"alpha", Role::alpha, -1.0, 1.0, 11}}});
    const auto m = builtin("ipsa2d");
    EXPECT_EQ(eval_on_grid(m, g, 1), eval_on_grid(m, g, 3));
}

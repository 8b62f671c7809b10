#include <gtest/gtest.h>

#include <cmath>

#include "vup/error.hpp"
#include "vup/expression.hpp"

using namespace vup;

namespace {

double eval(const std::string& text, std::vector<double> values = {}, std::vector<std::string> vars = {"x", "y"}) {
    values.resize(vars.size(), 0.0);
    return expr::parse(text, vars).evaluate(values);
}

ParseError::Kind parse_kind(const std::string& text, std::size_t* position = nullptr) {
    const std::vector<std::string> vars{"x"};
    try {
        expr::parse(text, vars);
    } catch (const ParseError& e) {
        if (position) *position = e.position();
        return e.kind();
    }
    ADD_FAILURE() << "no error for '" << text << "'";
    return ParseError::Kind::syntax;
}

}  // namespace

TEST(Expression, Precedence) {
    EXPECT_EQ(eval("1 + 2 * 3"), 7.0);
    EXPECT_EQ(eval("(1 + 2) * 3"), 9.0);
    EXPECT_EQ(eval("8 / 4 / 2"), 1.0);
    EXPECT_EQ(eval("10 - 4 - 3"), 3.0);
    EXPECT_EQ(eval("2 ^ 3 ^ 2"), 512.0);
    EXPECT_EQ(eval("-2 ^ 2"), -4.0);
    EXPECT_EQ(eval("2 ^ -1"), 0.5);
    EXPECT_EQ(eval("--3"), 3.0);
}

TEST(Expression, VariablesAndFunctions) {
    EXPECT_DOUBLE_EQ(eval("x^2 + 5*sin(3*x) + y", {1.0, 0.5}), 1.0 + 5.0 * std::sin(3.0) + 0.5);
    EXPECT_DOUBLE_EQ(eval("exp(x) * cos(y)", {1.0, 0.0}), std::exp(1.0));
    EXPECT_EQ(eval("abs(-x) + sqrt(16)", {2.0}), 6.0);
    EXPECT_DOUBLE_EQ(eval("1.5e-1 * 2E1"), 3.0);
    EXPECT_EQ(eval(".5 + 1."), 1.5);
}

TEST(Expression, EvaluationFailures) {
    EXPECT_THROW(eval("1 / x", {0.0}), EvaluationError);
    EXPECT_THROW(eval("sqrt(x)", {-1.0}), EvaluationError);
    EXPECT_THROW(eval("exp(x)", {1000.0}), EvaluationError);
}

TEST(Expression, ParseErrorsCarryKindAndPosition) {
    std::size_t pos = 0;
    EXPECT_EQ(parse_kind("x $ 1", &pos), ParseError::Kind::lexical);
    EXPECT_EQ(pos, 2u);
    EXPECT_EQ(parse_kind("x + y", &pos), ParseError::Kind::unbound_variable);
    EXPECT_EQ(pos, 4u);
    EXPECT_EQ(parse_kind("(x + 1"), ParseError::Kind::syntax);
    EXPECT_EQ(parse_kind("x +"), ParseError::Kind::syntax);
    EXPECT_EQ(parse_kind(""), ParseError::Kind::syntax);
    EXPECT_EQ(parse_kind("x 1"), ParseError::Kind::syntax);
    EXPECT_EQ(parse_kind("sin x"), ParseError::Kind::syntax);
}

TEST(Expression, PrintedFormReparsesIdentically) {
    const std::vector<std::string> vars{"x", "alpha"};
    for (const char* text : {"x^2 + 5*sin(3*x) + alpha", "-x^-2/3", "0.1 + 1e-300*x", "abs(x - alpha) ^ 0.5"}) {
        const auto e = expr::parse(text, vars);
        const auto again = expr::parse(e.to_string(), vars);
        EXPECT_EQ(e.to_string(), again.to_string()) << text;
        const double v[] = {0.7, -0.3};
        EXPECT_EQ(e.evaluate(v), again.evaluate(v)) << text;
    }
}

#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vup::expr {

enum class UnaryOp { neg, sin, cos, exp, abs, sqrt };
enum class BinaryOp { add, sub, mul, div, pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Constant {
    double value;
};
struct Variable {
    std::size_t index;
    std::string name;
};
struct Unary {
    UnaryOp op;
    NodePtr operand;
};
struct Binary {
    BinaryOp op;
    NodePtr lhs;
    NodePtr rhs;
};

struct Node {
    std::variant<Constant, Variable, Unary, Binary> value;
};

/// Parsed arithmetic expression.
///
/// Grammar (lowest to highest precedence):
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?          right-associative
///   primary := number | name | func '(' sum ')' | '(' sum ')'
/// with func in {sin, cos, exp, abs, sqrt}. So -x^2 = -(x^2) and
/// 2^-x = 2^(-x).
class Expression {
public:
    Expression(NodePtr root, std::vector<std::string> variables)
        : root_(std::move(root)), variables_(std::move(variables)) {}

    /// Throws vup::EvaluationError on division by zero or any non-finite
    /// intermediate result.
    double evaluate(std::span<const double> values) const;

    /// Fully parenthesized form; reparses to an identical tree.
    std::string to_string() const;

    const Node& root() const { return *root_; }
    const std::vector<std::string>& variables() const { return variables_; }

private:
    NodePtr root_;
    std::vector<std::string> variables_;
};

/// Throws vup::ParseError (lexical, syntax or unbound_variable) with the
/// offending character offset.
Expression parse(std::string_view text, std::span<const std::string> variables);

}  // namespace vup::expr

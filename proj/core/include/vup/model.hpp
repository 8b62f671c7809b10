#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vup/grid.hpp"
#include "vup/parallel.hpp"

namespace vup {

/// A deterministic scalar model y = M(v) over an n-dimensional input.
class ModelFunction {
public:
    using Evaluator = std::function<double(std::span<const double>)>;

    /// `source` identifies the model for provenance hashing (the expression
    /// text for parsed models, empty for builtins).
    ModelFunction(std::string name, std::size_t arity, Evaluator evaluator, std::string source = {});

    /// Checks arity, then evaluates. Throws EvaluationError on non-finite output.
    double operator()(std::span<const double> input) const;
    double operator()(std::initializer_list<double> input) const {
        return (*this)(std::span<const double>(input.begin(), input.size()));
    }

    const std::string& name() const { return name_; }
    const std::string& source() const { return source_; }
    std::size_t arity() const { return arity_; }
    std::uint64_t hash() const;

private:
    std::string name_;
    std::size_t arity_;
    Evaluator evaluator_;
    std::string source_;
};

/// Builtins: "bench2d" = 1.1 sin(x) + 7 sin^2(alpha), "ipsa2d" = x^2 + 5 sin(3x) + alpha.
ModelFunction builtin(std::string_view name);
std::vector<std::string> builtin_names();

/// Parses an infix expression over the given variable names.
ModelFunction parse_expression(std::string_view text, std::vector<std::string> variables);

/// output[i] = model(node_i). Fails with the node coordinates of the first
/// (lowest-index) non-finite output.
std::vector<double> eval_on_grid(const ModelFunction& model, const Grid& grid,
                                 unsigned threads = default_threads());

/// Wraps a model with a busy-wait of `delay` per evaluation, for probing
/// how model cost shifts the MC/VUP balance.
ModelFunction with_eval_delay(ModelFunction model, std::chrono::nanoseconds delay);

}  // namespace vup

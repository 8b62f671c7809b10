#include "vup/model.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

#include "vup/error.hpp"
#include "vup/expression.hpp"
#include "vup/hash.hpp"

namespace vup {

ModelFunction::ModelFunction(std::string name, std::size_t arity, Evaluator evaluator, std::string source)
    : name_(std::move(name)), arity_(arity), evaluator_(std::move(evaluator)), source_(std::move(source)) {
    if (arity_ == 0) throw InvalidArgument("model '" + name_ + "': arity must be >= 1");
    if (!evaluator_) throw InvalidArgument("model '" + name_ + "': empty evaluator");
}

double ModelFunction::operator()(std::span<const double> input) const {
    if (input.size() != arity_)
        throw InvalidArgument("model '" + name_ + "': expected " + std::to_string(arity_) + " inputs, got " +
                              std::to_string(input.size()));
    const double y = evaluator_(input);
    if (!std::isfinite(y)) throw EvaluationError("model '" + name_ + "' produced a non-finite value");
    return y;
}

std::uint64_t ModelFunction::hash() const {
    return Fnv1a().text(name_).integer(arity_).text(source_).digest();
}

ModelFunction builtin(std::string_view name) {
    if (name == "bench2d") {
        return ModelFunction("bench2d", 2, [](std::span<const double> v) {
            const double s = std::sin(v[1]);
            return 1.1 * std::sin(v[0]) + 7.0 * s * s;
        });
    }
    if (name == "ipsa2d") {
        return ModelFunction("ipsa2d", 2, [](std::span<const double> v) {
            return v[0] * v[0] + 5.0 * std::sin(3.0 * v[0]) + v[1];
        });
    }
    std::string known;
    for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown builtin model '" + std::string(name) + "' (available: " + known + ")");
}

std::vector<std::string> builtin_names() { return {"bench2d", "ipsa2d"}; }

ModelFunction parse_expression(std::string_view text, std::vector<std::string> variables) {
    if (variables.empty()) throw InvalidArgument("expression model needs at least one variable");
    auto expression = std::make_shared<const expr::Expression>(expr::parse(text, variables));
    std::string source(text);
    for (const auto& v : variables) source += "|" + v;
    const std::size_t arity = variables.size();
    return ModelFunction(
        "expression", arity, [expression](std::span<const double> v) { return expression->evaluate(v); },
        std::move(source));
}

std::vector<double> eval_on_grid(const ModelFunction& model, const Grid& grid, unsigned threads) {
    if (model.arity() != grid.dimension())
        throw InvalidArgument("eval_on_grid: model '" + model.name() + "' has arity " + std::to_string(model.arity()) +
                              " but grid has " + std::to_string(grid.dimension()) + " dimensions");
    std::vector<double> out(grid.size());
    std::mutex failure_mutex;
    std::size_t failed_at = grid.size();
    std::string failure;
    parallel_for(
        grid.size(),
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    out[i] = model(grid.node(i));
                } catch (const EvaluationError& e) {
                    std::lock_guard lock(failure_mutex);
                    if (i < failed_at) {
                        failed_at = i;
                        failure = e.what();
                    }
                    return;
                }
            }
        },
        threads);
    if (failed_at < grid.size()) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "model '" << model.name() << "' failed at node " << failed_at << " (";
        const auto node = grid.node(failed_at);
        for (std::size_t d = 0; d < node.size(); ++d) msg << (d ? ", " : "") << node[d];
        msg << "): " << failure;
        throw EvaluationError(msg.str());
    }
    return out;
}

ModelFunction with_eval_delay(ModelFunction model, std::chrono::nanoseconds delay) {
    const std::string name = model.name() + "+delay";
    const std::size_t arity = model.arity();
    const std::string source = model.source() + "|delay=" + std::to_string(delay.count());
    return ModelFunction(
        name, arity,
        [inner = std::move(model), delay](std::span<const double> v) {
            const auto until = std::chrono::steady_clock::now() + delay;
            const double y = inner(v);
            while (std::chrono::steady_clock::now() < until) {
            }
            return y;
        },
        source);
}

}  // namespace vup

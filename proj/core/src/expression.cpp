#include "vup/expression.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "vup/error.hpp"

namespace vup::expr {

namespace {

enum class TokenKind { number, name, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
    TokenKind kind;
    std::size_t position;
    std::string text;
    double number = 0.0;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            if (i < text.size() && text[i] == '.') {
                ++i;
                while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            }
            if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
                if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
                    i = j;
                    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                }
            }
            std::string literal(text.substr(start, i - start));
            if (literal == ".") throw ParseError(ParseError::Kind::lexical, start, "malformed number '.'");
            errno = 0;
            char* end = nullptr;
            const double value = std::strtod(literal.c_str(), &end);
            if (end != literal.c_str() + literal.size() || errno == ERANGE || !std::isfinite(value))
                throw ParseError(ParseError::Kind::lexical, start, "malformed or out-of-range number '" + literal + "'");
            tokens.push_back({TokenKind::number, start, std::move(literal), value});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
            tokens.push_back({TokenKind::name, start, std::string(text.substr(start, i - start))});
            continue;
        }
        TokenKind kind;
        switch (c) {
            case '+': kind = TokenKind::plus; break;
            case '-': kind = TokenKind::minus; break;
            case '*': kind = TokenKind::star; break;
            case '/': kind = TokenKind::slash; break;
            case '^': kind = TokenKind::caret; break;
            case '(': kind = TokenKind::lparen; break;
            case ')': kind = TokenKind::rparen; break;
            default:
                throw ParseError(ParseError::Kind::lexical, start, std::string("illegal character '") + c + "'");
        }
        tokens.push_back({kind, start, std::string(1, c)});
        ++i;
    }
    tokens.push_back({TokenKind::end, text.size(), ""});
    return tokens;
}

NodePtr make(auto value) { return std::make_shared<const Node>(Node{std::move(value)}); }

class Parser {
public:
    Parser(std::vector<Token> tokens, std::span<const std::string> variables)
        : tokens_(std::move(tokens)), variables_(variables) {}

    NodePtr parse_all() {
        NodePtr root = sum();
        if (peek().kind != TokenKind::end) fail("unexpected token '" + peek().text + "'");
        return root;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() { return tokens_[pos_++]; }
    bool accept(TokenKind kind) {
        if (peek().kind != kind) return false;
        ++pos_;
        return true;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(ParseError::Kind::syntax, peek().position, what);
    }
    void expect(TokenKind kind, const char* what) {
        if (!accept(kind)) {
            fail(std::string("expected ") + what + ", found " +
                 (peek().kind == TokenKind::end ? std::string("end of input") : "'" + peek().text + "'"));
        }
    }

    NodePtr sum() {
        NodePtr lhs = product();
        for (;;) {
            if (accept(TokenKind::plus)) lhs = make(Binary{BinaryOp::add, lhs, product()});
            else if (accept(TokenKind::minus)) lhs = make(Binary{BinaryOp::sub, lhs, product()});
            else return lhs;
        }
    }

    NodePtr product() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept(TokenKind::star)) lhs = make(Binary{BinaryOp::mul, lhs, unary()});
            else if (accept(TokenKind::slash)) lhs = make(Binary{BinaryOp::div, lhs, unary()});
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept(TokenKind::minus)) return make(Unary{UnaryOp::neg, unary()});
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept(TokenKind::caret)) return make(Binary{BinaryOp::pow, base, unary()});
        return base;
    }

    NodePtr primary() {
        const Token& tok = peek();
        switch (tok.kind) {
            case TokenKind::number:
                next();
                return make(Constant{tok.number});
            case TokenKind::lparen: {
                next();
                NodePtr inner = sum();
                expect(TokenKind::rparen, "')'");
                return inner;
            }
            case TokenKind::name: {
                next();
                if (accept(TokenKind::lparen)) {
                    UnaryOp op;
                    if (tok.text == "sin") op = UnaryOp::sin;
                    else if (tok.text == "cos") op = UnaryOp::cos;
                    else if (tok.text == "exp") op = UnaryOp::exp;
                    else if (tok.text == "abs") op = UnaryOp::abs;
                    else if (tok.text == "sqrt") op = UnaryOp::sqrt;
                    else throw ParseError(ParseError::Kind::syntax, tok.position, "unknown function '" + tok.text + "'");
                    NodePtr arg = sum();
                    expect(TokenKind::rparen, "')'");
                    return make(Unary{op, arg});
                }
                for (std::size_t i = 0; i < variables_.size(); ++i)
                    if (variables_[i] == tok.text) return make(Variable{i, tok.text});
                for (const char* fn : {"sin", "cos", "exp", "abs", "sqrt"})
                    if (tok.text == fn)
                        throw ParseError(ParseError::Kind::syntax, tok.position, "expected '(' after '" + tok.text + "'");
                throw ParseError(ParseError::Kind::unbound_variable, tok.position, "unbound variable '" + tok.text + "'");
            }
            default:
                fail(tok.kind == TokenKind::end ? std::string("unexpected end of input")
                                                : "unexpected token '" + tok.text + "'");
        }
    }

    std::vector<Token> tokens_;
    std::span<const std::string> variables_;
    std::size_t pos_ = 0;
};

const char* unary_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::neg: return "-";
        case UnaryOp::sin: return "sin";
        case UnaryOp::cos: return "cos";
        case UnaryOp::exp: return "exp";
        case UnaryOp::abs: return "abs";
        case UnaryOp::sqrt: return "sqrt";
    }
    return "?";
}

const char* binary_symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::add: return "+";
        case BinaryOp::sub: return "-";
        case BinaryOp::mul: return "*";
        case BinaryOp::div: return "/";
        case BinaryOp::pow: return "^";
    }
    return "?";
}

double checked(double value, const char* op) {
    if (!std::isfinite(value)) throw EvaluationError(std::string("non-finite result in '") + op + "'");
    return value;
}

double eval_node(const Node& node, std::span<const double> values) {
    struct Visitor {
        std::span<const double> values;
        double operator()(const Constant& c) const { return c.value; }
        double operator()(const Variable& v) const { return values[v.index]; }
        double operator()(const Unary& u) const {
            const double a = eval_node(*u.operand, values);
            switch (u.op) {
                case UnaryOp::neg: return -a;
                case UnaryOp::sin: return checked(std::sin(a), "sin");
                case UnaryOp::cos: return checked(std::cos(a), "cos");
                case UnaryOp::exp: return checked(std::exp(a), "exp");
                case UnaryOp::abs: return std::abs(a);
                case UnaryOp::sqrt: return checked(std::sqrt(a), "sqrt");
            }
            return a;
        }
        double operator()(const Binary& b) const {
            const double l = eval_node(*b.lhs, values);
            const double r = eval_node(*b.rhs, values);
            switch (b.op) {
                case BinaryOp::add: return checked(l + r, "+");
                case BinaryOp::sub: return checked(l - r, "-");
                case BinaryOp::mul: return checked(l * r, "*");
                case BinaryOp::div:
                    if (r == 0.0) throw EvaluationError("division by zero");
                    return checked(l / r, "/");
                case BinaryOp::pow: return checked(std::pow(l, r), "^");
            }
            return l;
        }
    };
    return std::visit(Visitor{values}, node.value);
}

void print_node(const Node& node, std::string& out) {
    struct Visitor {
        std::string& out;
        void operator()(const Constant& c) const {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", c.value);
            out += buf;
        }
        void operator()(const Variable& v) const { out += v.name; }
        void operator()(const Unary& u) const {
            if (u.op == UnaryOp::neg) {
                out += "(-";
                print_node(*u.operand, out);
                out += ")";
            } else {
                out += unary_name(u.op);
                out += "(";
                print_node(*u.operand, out);
                out += ")";
            }
        }
        void operator()(const Binary& b) const {
            out += "(";
            print_node(*b.lhs, out);
            out += binary_symbol(b.op);
            print_node(*b.rhs, out);
            out += ")";
        }
    };
    std::visit(Visitor{out}, node.value);
}

}  // namespace

double Expression::evaluate(std::span<const double> values) const { return eval_node(*root_, values); }

std::string Expression::to_string() const {
    std::string out;
    print_node(*root_, out);
    return out;
}

Expression parse(std::string_view text, std::span<const std::string> variables) {
    Parser parser(tokenize(text), variables);
    NodePtr root = parser.parse_all();
    return Expression(std::move(root), std::vector<std::string>(variables.begin(), variables.end()));
}

}  // namespace vup::expr

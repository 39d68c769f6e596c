#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "ttint/common.hpp"

namespace ttint {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t column)
        : std::runtime_error(message + " at column " + std::to_string(column)), column_(column) {}
    std::size_t column() const { return column_; }

private:
    std::size_t column_;
};

// AST over variables x1..xd, literals, named constants and elementary
// functions. Immutable once built; evaluation walks the tree.
struct ExprNode {
    enum class Op {
        constant,
        variable,
        add,
        sub,
        mul,
        div,
        pow,
        neg,
        fn_ln,
        fn_exp,
        fn_sqrt,
        fn_sin,
        fn_cos,
        fn_tanh,
        fn_abs
    };

    Op op;
    double value = 0.0;      // constant
    std::size_t var = 0;     // variable, zero-based
    std::shared_ptr<const ExprNode> lhs, rhs;
};

using ExprPtr = std::shared_ptr<const ExprNode>;

struct Expression {
    ExprPtr root;
    std::size_t max_variable = 0;  // number of variables referenced (max index + 1); 0 if none
    std::string text;

    double eval(const double* x) const { return eval_node(root.get(), x); }

    // vectorized AST walk: one pass per node over the whole batch
    void eval_batch(std::size_t count, const double* points, std::size_t dim, double* out) const {
        std::vector<double> scratch = eval_node_batch(root.get(), count, points, dim);
        for (std::size_t p = 0; p < count; ++p) out[p] = scratch[p];
    }

private:
    static double eval_node(const ExprNode* n, const double* x) {
        switch (n->op) {
            case ExprNode::Op::constant: return n->value;
            case ExprNode::Op::variable: return x[n->var];
            case ExprNode::Op::add: return eval_node(n->lhs.get(), x) + eval_node(n->rhs.get(), x);
            case ExprNode::Op::sub: return eval_node(n->lhs.get(), x) - eval_node(n->rhs.get(), x);
            case ExprNode::Op::mul: return eval_node(n->lhs.get(), x) * eval_node(n->rhs.get(), x);
            case ExprNode::Op::div: return eval_node(n->lhs.get(), x) / eval_node(n->rhs.get(), x);
            case ExprNode::Op::pow: return std::pow(eval_node(n->lhs.get(), x), eval_node(n->rhs.get(), x));
            case ExprNode::Op::neg: return -eval_node(n->lhs.get(), x);
            case ExprNode::Op::fn_ln: return std::log(eval_node(n->lhs.get(), x));
            case ExprNode::Op::fn_exp: return std::exp(eval_node(n->lhs.get(), x));
            case ExprNode::Op::fn_sqrt: return std::sqrt(eval_node(n->lhs.get(), x));
            case ExprNode::Op::fn_sin: return std::sin(eval_node(n->lhs.get(), x));
            case ExprNode::Op::fn_cos: return std::cos(eval_node(n->lhs.get(), x));
            case ExprNode::Op::fn_tanh: return std::tanh(eval_node(n->lhs.get(), x));
            case ExprNode::Op::fn_abs: return std::abs(eval_node(n->lhs.get(), x));
        }
        return 0.0;
    }

    static std::vector<double> eval_node_batch(const ExprNode* n, std::size_t count, const double* points,
                                               std::size_t dim) {
        std::vector<double> out(count);
        auto unary = [&](auto f) {
            std::vector<double> a = eval_node_batch(n->lhs.get(), count, points, dim);
            for (std::size_t p = 0; p < count; ++p) out[p] = f(a[p]);
        };
        auto binary = [&](auto f) {
            std::vector<double> a = eval_node_batch(n->lhs.get(), count, points, dim);
            std::vector<double> b = eval_node_batch(n->rhs.get(), count, points, dim);
            for (std::size_t p = 0; p < count; ++p) out[p] = f(a[p], b[p]);
        };
        switch (n->op) {
            case ExprNode::Op::constant:
                for (std::size_t p = 0; p < count; ++p) out[p] = n->value;
                break;
            case ExprNode::Op::variable:
                for (std::size_t p = 0; p < count; ++p) out[p] = points[p * dim + n->var];
                break;
            case ExprNode::Op::add: binary([](double a, double b) { return a + b; }); break;
            case ExprNode::Op::sub: binary([](double a, double b) { return a - b; }); break;
            case ExprNode::Op::mul: binary([](double a, double b) { return a * b; }); break;
            case ExprNode::Op::div: binary([](double a, double b) { return a / b; }); break;
            case ExprNode::Op::pow: binary([](double a, double b) { return std::pow(a, b); }); break;
            case ExprNode::Op::neg: unary([](double a) { return -a; }); break;
            case ExprNode::Op::fn_ln: unary([](double a) { return std::log(a); }); break;
            case ExprNode::Op::fn_exp: unary([](double a) { return std::exp(a); }); break;
            case ExprNode::Op::fn_sqrt: unary([](double a) { return std::sqrt(a); }); break;
            case ExprNode::Op::fn_sin: unary([](double a) { return std::sin(a); }); break;
            case ExprNode::Op::fn_cos: unary([](double a) { return std::cos(a); }); break;
            case ExprNode::Op::fn_tanh: unary([](double a) { return std::tanh(a); }); break;
            case ExprNode::Op::fn_abs: unary([](double a) { return std::abs(a); }); break;
        }
        return out;
    }
};

namespace detail {

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    Expression parse() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty expression", 1);
        ExprPtr root = parse_expr();
        skip_ws();
        if (pos_ < text_.size())
            throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_ + 1);
        return Expression{root, max_var_, text_};
    }

private:
    // expr := term (('+'|'-') term)*
    ExprPtr parse_expr() {
        ExprPtr lhs = parse_term();
        for (;;) {
            skip_ws();
            if (peek() == '+' || peek() == '-') {
                char op = text_[pos_++];
                ExprPtr rhs = parse_term();
                lhs = node(op == '+' ? ExprNode::Op::add : ExprNode::Op::sub, lhs, rhs);
            } else {
                return lhs;
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    ExprPtr parse_term() {
        ExprPtr lhs = parse_unary();
        for (;;) {
            skip_ws();
            if (peek() == '*' || peek() == '/') {
                char op = text_[pos_++];
                ExprPtr rhs = parse_unary();
                lhs = node(op == '*' ? ExprNode::Op::mul : ExprNode::Op::div, lhs, rhs);
            } else {
                return lhs;
            }
        }
    }

    // unary := '-' unary | power ; '^' binds tighter than unary minus
    ExprPtr parse_unary() {
        skip_ws();
        if (peek() == '-') {
            ++pos_;
            return node(ExprNode::Op::neg, parse_unary(), nullptr);
        }
        if (peek() == '+') {
            ++pos_;
            return parse_unary();
        }
        return parse_power();
    }

    // power := atom ('^' unary)? ; right-associative
    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            ExprPtr exponent = parse_unary();
            return node(ExprNode::Op::pow, base, exponent);
        }
        return base;
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_ + 1);
        char c = text_[pos_];
        if (c == '(') {
            std::size_t open = pos_++;
            ExprPtr inner = parse_expr();
            skip_ws();
            if (peek() != ')') throw ParseError("unclosed '(' opened", open + 1);
            ++pos_;
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ParseError("unexpected '" + std::string(1, c) + "'", pos_ + 1);
    }

    ExprPtr parse_number() {
        const char* start = text_.c_str() + pos_;
        char* end = nullptr;
        double value = std::strtod(start, &end);
        if (end == start) throw ParseError("malformed number", pos_ + 1);
        pos_ += static_cast<std::size_t>(end - start);
        auto n = std::make_shared<ExprNode>();
        n->op = ExprNode::Op::constant;
        n->value = value;
        return n;
    }

    ExprPtr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);

        if (name.size() >= 2 && name[0] == 'x' && std::isdigit(static_cast<unsigned char>(name[1]))) {
            bool digits = true;
            for (std::size_t q = 1; q < name.size(); ++q)
                if (!std::isdigit(static_cast<unsigned char>(name[q]))) digits = false;
            if (digits) {
                long index = std::strtol(name.c_str() + 1, nullptr, 10);
                if (index < 1) throw ParseError("variable index must start at 1", start + 1);
                auto n = std::make_shared<ExprNode>();
                n->op = ExprNode::Op::variable;
                n->var = static_cast<std::size_t>(index - 1);
                max_var_ = std::max(max_var_, static_cast<std::size_t>(index));
                return n;
            }
        }
        if (name == "pi") return constant(3.14159265358979323846);
        if (name == "e") return constant(2.71828182845904523536);

        static const std::pair<const char*, ExprNode::Op> functions[] = {
            {"ln", ExprNode::Op::fn_ln},   {"exp", ExprNode::Op::fn_exp}, {"sqrt", ExprNode::Op::fn_sqrt},
            {"sin", ExprNode::Op::fn_sin}, {"cos", ExprNode::Op::fn_cos}, {"tanh", ExprNode::Op::fn_tanh},
            {"abs", ExprNode::Op::fn_abs}};
        for (const auto& [fname, op] : functions) {
            if (name != fname) continue;
            skip_ws();
            if (peek() != '(')
                throw ParseError("function '" + name + "' expects one parenthesized argument", pos_ + 1);
            std::size_t open = pos_++;
            ExprPtr arg = parse_expr();
            skip_ws();
            if (peek() == ',') throw ParseError("function '" + name + "' takes exactly one argument", pos_ + 1);
            if (peek() != ')') throw ParseError("unclosed '(' opened", open + 1);
            ++pos_;
            return node(op, arg, nullptr);
        }
        throw ParseError("unknown identifier '" + name + "'", start + 1);
    }

    ExprPtr constant(double v) {
        auto n = std::make_shared<ExprNode>();
        n->op = ExprNode::Op::constant;
        n->value = v;
        return n;
    }

    static ExprPtr node(ExprNode::Op op, ExprPtr lhs, ExprPtr rhs) {
        auto n = std::make_shared<ExprNode>();
        n->op = op;
        n->lhs = std::move(lhs);
        n->rhs = std::move(rhs);
        return n;
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    std::size_t max_var_ = 0;
};

}  // namespace detail

inline Expression parse_expression(const std::string& text) { return detail::Parser(text).parse(); }

}  // namespace ttint

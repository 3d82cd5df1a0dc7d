#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace tsfrac {

class ExprParseError : public std::runtime_error {
  public:
    ExprParseError(const std::string& msg, size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
    size_t position;
};

namespace detail {

struct ExprNode {
    virtual ~ExprNode() = default;
    virtual double eval(double x) const = 0;
};
using NodePtr = std::shared_ptr<const ExprNode>;

struct ConstNode : ExprNode {
    double v;
    explicit ConstNode(double c) : v(c) {}
    double eval(double) const override { return v; }
};
struct VarNode : ExprNode {
    double eval(double x) const override { return x; }
};
struct UnaryNode : ExprNode {
    char op;
    NodePtr c;
    UnaryNode(char o, NodePtr n) : op(o), c(std::move(n)) {}
    double eval(double x) const override { return -c->eval(x); }
};
struct BinNode : ExprNode {
    char op;
    NodePtr l, r;
    BinNode(char o, NodePtr a, NodePtr b) : op(o), l(std::move(a)), r(std::move(b)) {}
    double eval(double x) const override {
        const double a = l->eval(x), b = r->eval(x);
        switch (op) {
            case '+': return a + b;
            case '-': return a - b;
            case '*': return a * b;
            case '/': return a / b;
            default: return std::pow(a, b);
        }
    }
};
struct FuncNode : ExprNode {
    int fn; // 0 exp, 1 sin, 2 cos, 3 abs
    NodePtr c;
    FuncNode(int f, NodePtr n) : fn(f), c(std::move(n)) {}
    double eval(double x) const override {
        const double v = c->eval(x);
        switch (fn) {
            case 0: return std::exp(v);
            case 1: return std::sin(v);
            case 2: return std::cos(v);
            default: return std::fabs(v);
        }
    }
};

// Grammar: expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)* ;
// factor := '-' factor | primary ('^' factor)? ;   (so -x^2 == -(x^2))
// primary := number | 'x' | func '(' expr ')' | '(' expr ')'
class ExprParser {
  public:
    explicit ExprParser(const std::string& s) : src_(s) {}

    NodePtr parse() {
        NodePtr n = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) throw ExprParseError("unexpected trailing input", pos_);
        return n;
    }

  private:
    const std::string& src_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_expr() {
        NodePtr n = parse_term();
        for (;;) {
            if (eat('+')) n = std::make_shared<BinNode>('+', n, parse_term());
            else if (eat('-')) n = std::make_shared<BinNode>('-', n, parse_term());
            else return n;
        }
    }
    NodePtr parse_term() {
        NodePtr n = parse_factor();
        for (;;) {
            if (eat('*')) n = std::make_shared<BinNode>('*', n, parse_factor());
            else if (eat('/')) n = std::make_shared<BinNode>('/', n, parse_factor());
            else return n;
        }
    }
    NodePtr parse_factor() {
        if (eat('-')) return std::make_shared<UnaryNode>('-', parse_factor());
        NodePtr n = parse_primary();
        if (eat('^')) return std::make_shared<BinNode>('^', n, parse_factor());
        return n;
    }
    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ExprParseError("unexpected end of expression", pos_);
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t used = 0;
            double v;
            try {
                v = std::stod(src_.substr(pos_), &used);
            } catch (const std::exception&) {
                throw ExprParseError("malformed number", pos_);
            }
            pos_ += used;
            return std::make_shared<ConstNode>(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            const std::string name = src_.substr(start, pos_ - start);
            if (name == "x") return std::make_shared<VarNode>();
            int fn = -1;
            if (name == "exp") fn = 0;
            else if (name == "sin") fn = 1;
            else if (name == "cos") fn = 2;
            else if (name == "abs") fn = 3;
            if (fn < 0) throw ExprParseError("unknown identifier '" + name + "'", start);
            if (!eat('(')) throw ExprParseError("expected '(' after function name", pos_);
            NodePtr arg = parse_expr();
            if (!eat(')')) throw ExprParseError("expected ')'", pos_);
            return std::make_shared<FuncNode>(fn, arg);
        }
        if (eat('(')) {
            NodePtr n = parse_expr();
            if (!eat(')')) throw ExprParseError("expected ')'", pos_);
            return n;
        }
        throw ExprParseError(std::string("unexpected character '") + c + "'", pos_);
    }
};

} // namespace detail

/// A parsed univariate expression over the grammar
/// {constants, x, + - * / ^, exp, sin, cos, abs}.
class Expression {
  public:
    Expression() = default;
    explicit Expression(std::string text) : text_(std::move(text)) {
        node_ = detail::ExprParser(text_).parse();
    }

    double operator()(double x) const { return node_->eval(x); }
    const std::string& text() const { return text_; }
    bool valid() const { return static_cast<bool>(node_); }

    std::function<double(double)> as_function() const {
        auto n = node_;
        return [n](double x) { return n->eval(x); };
    }

  private:
    std::string text_;
    detail::NodePtr node_;
};

} // namespace tsfrac

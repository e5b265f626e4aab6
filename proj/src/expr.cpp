#include "chainrec/expr.h"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "chainrec/errors.h"

namespace chainrec {

struct Expression::Node {
    enum class Op {
        number, var_x, var_y,
        add, sub, mul, div, pow, neg,
        sin, cos, tan, atan, exp, log, sqrt, abs,
        atan2, min, max, hypot
    };
    Op op = Op::number;
    double value = 0.0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr leaf(Node::Op op, double v = 0.0) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->value = v;
    return n;
}

NodePtr unary(Node::Op op, NodePtr a) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    return n;
}

NodePtr binary(Node::Op op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    NodePtr run() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& why) {
        throw config_error("expression '" + s_ + "': " + why + " at offset " +
                           std::to_string(pos_));
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr e = term();
        for (;;) {
            if (eat('+')) e = binary(Node::Op::add, e, term());
            else if (eat('-')) e = binary(Node::Op::sub, e, term());
            else return e;
        }
    }

    NodePtr term() {
        NodePtr e = factor();
        for (;;) {
            if (eat('*')) e = binary(Node::Op::mul, e, factor());
            else if (eat('/')) e = binary(Node::Op::div, e, factor());
            else return e;
        }
    }

    NodePtr factor() {
        if (eat('-')) return unary(Node::Op::neg, factor());
        NodePtr base = primary();
        if (eat('^')) return binary(Node::Op::pow, base, factor());   // right associative
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += end - begin;
            return leaf(Node::Op::number, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string name = s_.substr(start, pos_ - start);
            if (name == "x") return leaf(Node::Op::var_x);
            if (name == "y") return leaf(Node::Op::var_y);
            if (name == "pi") return leaf(Node::Op::number, 3.14159265358979323846);
            if (name == "e") return leaf(Node::Op::number, 2.71828182845904523536);
            return call(name);
        }
        fail("unexpected character");
    }

    NodePtr call(const std::string& name) {
        if (!eat('(')) fail("expected '(' after function " + name);
        std::vector<NodePtr> args{expr()};
        while (eat(',')) args.push_back(expr());
        if (!eat(')')) fail("expected ')'");

        auto arity = [&](std::size_t n) {
            if (args.size() != n)
                fail("function " + name + " expects " + std::to_string(n) + " arguments");
        };
        if (name == "sin") { arity(1); return unary(Node::Op::sin, args[0]); }
        if (name == "cos") { arity(1); return unary(Node::Op::cos, args[0]); }
        if (name == "tan") { arity(1); return unary(Node::Op::tan, args[0]); }
        if (name == "atan") { arity(1); return unary(Node::Op::atan, args[0]); }
        if (name == "exp") { arity(1); return unary(Node::Op::exp, args[0]); }
        if (name == "log") { arity(1); return unary(Node::Op::log, args[0]); }
        if (name == "sqrt") { arity(1); return unary(Node::Op::sqrt, args[0]); }
        if (name == "abs") { arity(1); return unary(Node::Op::abs, args[0]); }
        if (name == "atan2") { arity(2); return binary(Node::Op::atan2, args[0], args[1]); }
        if (name == "min") { arity(2); return binary(Node::Op::min, args[0], args[1]); }
        if (name == "max") { arity(2); return binary(Node::Op::max, args[0], args[1]); }
        if (name == "pow") { arity(2); return binary(Node::Op::pow, args[0], args[1]); }
        if (name == "hypot") { arity(2); return binary(Node::Op::hypot, args[0], args[1]); }
        fail("unknown function " + name);
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

double eval_node(const Node& n, double x, double y) {
    switch (n.op) {
    case Node::Op::number: return n.value;
    case Node::Op::var_x: return x;
    case Node::Op::var_y: return y;
    case Node::Op::add: return eval_node(*n.a, x, y) + eval_node(*n.b, x, y);
    case Node::Op::sub: return eval_node(*n.a, x, y) - eval_node(*n.b, x, y);
    case Node::Op::mul: return eval_node(*n.a, x, y) * eval_node(*n.b, x, y);
    case Node::Op::div: return eval_node(*n.a, x, y) / eval_node(*n.b, x, y);
    case Node::Op::pow: return std::pow(eval_node(*n.a, x, y), eval_node(*n.b, x, y));
    case Node::Op::neg: return -eval_node(*n.a, x, y);
    case Node::Op::sin: return std::sin(eval_node(*n.a, x, y));
    case Node::Op::cos: return std::cos(eval_node(*n.a, x, y));
    case Node::Op::tan: return std::tan(eval_node(*n.a, x, y));
    case Node::Op::atan: return std::atan(eval_node(*n.a, x, y));
    case Node::Op::exp: return std::exp(eval_node(*n.a, x, y));
    case Node::Op::log: return std::log(eval_node(*n.a, x, y));
    case Node::Op::sqrt: return std::sqrt(eval_node(*n.a, x, y));
    case Node::Op::abs: return std::abs(eval_node(*n.a, x, y));
    case Node::Op::atan2: return std::atan2(eval_node(*n.a, x, y), eval_node(*n.b, x, y));
    case Node::Op::min: return std::min(eval_node(*n.a, x, y), eval_node(*n.b, x, y));
    case Node::Op::max: return std::max(eval_node(*n.a, x, y), eval_node(*n.b, x, y));
    case Node::Op::hypot: return std::hypot(eval_node(*n.a, x, y), eval_node(*n.b, x, y));
    }
    return 0.0;
}

} // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.root_ = Parser(text).run();
    e.text_ = text;
    return e;
}

double Expression::operator()(double x, double y) const {
    if (!root_) throw config_error("Expression: evaluating an empty expression");
    return eval_node(*root_, x, y);
}

} // namespace chainrec

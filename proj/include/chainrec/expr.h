#pragma once

#include <memory>
#include <string>

namespace chainrec {

/// A deterministic arithmetic expression in the variables x and y.
/// Grammar: + - * / ^, unary minus, parentheses, numbers, pi, e, and the
/// functions sin cos tan atan atan2 exp log sqrt abs min max pow hypot.
class Expression {
public:
    Expression() = default;
    static Expression parse(const std::string& text);   // throws config_error

    double operator()(double x, double y) const;
    bool empty() const { return root_ == nullptr; }
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace chainrec

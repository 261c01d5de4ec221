#pragma once

#include <memory>
#include <span>
#include <string>

namespace permlim {

// Arithmetic expression in the variables x and y, compiled once and evaluated many times.
//
// Grammar: numbers, x, y, pi, e, parameters p0..p9, binary + - * / ^ (right associative),
// unary minus, parentheses, and the functions exp log sqrt abs sin cos tan sinh cosh tanh
// (one argument) and pow min max (two arguments).
class Expression {
public:
    // Throws ConfigError with the offending position on a parse failure.
    explicit Expression(std::string text, std::span<const double> params = {});

    double operator()(double x, double y) const;
    const std::string& text() const noexcept { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

}  // namespace permlim

#include "permlim/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "permlim/errors.hpp"

namespace permlim {

struct Expression::Node {
    enum class Op { constant, var_x, var_y, add, sub, mul, div, pow, neg, call1, call2 };
    Op op = Op::constant;
    double value = 0.0;
    double (*fn1)(double) = nullptr;
    double (*fn2)(double, double) = nullptr;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double x, double y) const {
        switch (op) {
        case Op::constant: return value;
        case Op::var_x: return x;
        case Op::var_y: return y;
        case Op::add: return lhs->eval(x, y) + rhs->eval(x, y);
        case Op::sub: return lhs->eval(x, y) - rhs->eval(x, y);
        case Op::mul: return lhs->eval(x, y) * rhs->eval(x, y);
        case Op::div: return lhs->eval(x, y) / rhs->eval(x, y);
        case Op::pow: return std::pow(lhs->eval(x, y), rhs->eval(x, y));
        case Op::neg: return -lhs->eval(x, y);
        case Op::call1: return fn1(lhs->eval(x, y));
        case Op::call2: return fn2(lhs->eval(x, y), rhs->eval(x, y));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

std::shared_ptr<Expression::Node> make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto node = std::make_shared<Expression::Node>();
    node->op = op;
    node->lhs = std::move(lhs);
    node->rhs = std::move(rhs);
    return node;
}

NodePtr constant(double v) {
    auto node = std::make_shared<Expression::Node>();
    node->value = v;
    return node;
}

double fmin2(double a, double b) { return std::fmin(a, b); }
double fmax2(double a, double b) { return std::fmax(a, b); }
double pow2(double a, double b) { return std::pow(a, b); }

struct Fn1 {
    const char* name;
    double (*fn)(double);
};

// Casts pick the double overloads out of <cmath>.
const Fn1 kUnary[] = {
    {"exp", static_cast<double (*)(double)>(std::exp)},
    {"log", static_cast<double (*)(double)>(std::log)},
    {"sqrt", static_cast<double (*)(double)>(std::sqrt)},
    {"abs", static_cast<double (*)(double)>(std::fabs)},
    {"sin", static_cast<double (*)(double)>(std::sin)},
    {"cos", static_cast<double (*)(double)>(std::cos)},
    {"tan", static_cast<double (*)(double)>(std::tan)},
    {"sinh", static_cast<double (*)(double)>(std::sinh)},
    {"cosh", static_cast<double (*)(double)>(std::cosh)},
    {"tanh", static_cast<double (*)(double)>(std::tanh)},
};

class Parser {
public:
    Parser(const std::string& text, std::span<const double> params) : s_(text), params_(params) {}

    NodePtr parse() {
        auto node = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return node;
    }

private:
    const std::string& s_;
    std::span<const double> params_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("expression '" + s_ + "': " + msg + " at position " + std::to_string(pos_));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    NodePtr sum() {
        auto node = product();
        for (;;) {
            if (accept('+')) node = make(Op::add, node, product());
            else if (accept('-')) node = make(Op::sub, node, product());
            else return node;
        }
    }

    NodePtr product() {
        auto node = unary();
        for (;;) {
            if (accept('*')) node = make(Op::mul, node, unary());
            else if (accept('/')) node = make(Op::div, node, unary());
            else return node;
        }
    }

    // Unary minus binds looser than ^ so that -x^2 == -(x^2).
    NodePtr unary() {
        if (accept('-')) return make(Op::neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        auto base = primary();
        if (accept('^')) return make(Op::pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto node = sum();
            expect(')');
            return node;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            return constant(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return identifier(s_.substr(start, pos_ - start));
        }
        fail("unexpected character");
    }

    NodePtr identifier(const std::string& name) {
        if (name == "x") return make(Op::var_x);
        if (name == "y") return make(Op::var_y);
        if (name == "pi") return constant(std::numbers::pi);
        if (name == "e") return constant(std::numbers::e);
        if (name.size() == 2 && name[0] == 'p' && std::isdigit(static_cast<unsigned char>(name[1]))) {
            auto idx = static_cast<std::size_t>(name[1] - '0');
            if (idx >= params_.size()) fail("parameter " + name + " not supplied");
            return constant(params_[idx]);
        }
        for (const auto& f : kUnary) {
            if (name == f.name) {
                expect('(');
                auto arg = sum();
                expect(')');
                auto node = make(Op::call1, arg);
                node->fn1 = f.fn;
                return node;
            }
        }
        if (name == "pow" || name == "min" || name == "max") {
            expect('(');
            auto a = sum();
            expect(',');
            auto b = sum();
            expect(')');
            auto node = make(Op::call2, a, b);
            node->fn2 = name == "pow" ? pow2 : name == "min" ? fmin2 : fmax2;
            return node;
        }
        fail("unknown identifier '" + name + "'");
    }
};

}  // namespace

Expression::Expression(std::string text, std::span<const double> params)
    : text_(std::move(text)) {
    root_ = Parser(text_, params).parse();
}

double Expression::operator()(double x, double y) const { return root_->eval(x, y); }

}  // namespace permlim

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "permlim/errors.hpp"
#include "permlim/expression.hpp"

using permlim::ConfigError;
using permlim::Expression;

TEST_CASE("precedence and associativity") {
    CHECK(Expression("1 + 2 * 3")(0, 0) == 7);
    CHECK(Expression("(1 + 2) * 3")(0, 0) == 9);
    CHECK(Expression("2 ^ 3 ^ 2")(0, 0) == 512);
    CHECK(Expression("-2 ^ 2")(0, 0) == -4);
    CHECK(Expression("8 / 4 / 2")(0, 0) == 1);
    CHECK(Expression("1 - 2 - 3")(0, 0) == -4);
    CHECK(Expression("1.5e2 + .5")(0, 0) == 150.5);
}

TEST_CASE("variables, constants and parameters") {
    std::vector<double> p{2.0, 0.25};
    Expression e("p0 * (x - y)^2 + p1", p);
    CHECK(e(0.75, 0.25) == doctest::Approx(0.75));
    CHECK(Expression("pi")(0, 0) == doctest::Approx(std::numbers::pi));
    CHECK(Expression("e")(0, 0) == doctest::Approx(std::numbers::e));
    CHECK(Expression("x*y")(0.5, 0.4) == doctest::Approx(0.2));
}

TEST_CASE("functions") {
    CHECK(Expression("exp(0) + log(e) + sqrt(4)")(0, 0) == doctest::Approx(4));
    CHECK(Expression("abs(x - y)")(0.2, 0.9) == doctest::Approx(0.7));
    CHECK(Expression("cos(pi*x)")(1.0, 0) == doctest::Approx(-1));
    CHECK(Expression("pow(2, 10)")(0, 0) == 1024);
    CHECK(Expression("min(x, y) + max(x, y)")(0.3, 0.6) == doctest::Approx(0.9));
    CHECK(Expression("tanh(0) + sinh(0) + cosh(0) + sin(0) + tan(0)")(0, 0) == doctest::Approx(1));
}

TEST_CASE("malformed input is a config error") {
    CHECK_THROWS_AS(Expression("1 +"), ConfigError);
    CHECK_THROWS_AS(Expression("(x"), ConfigError);
    CHECK_THROWS_AS(Expression("foo(x)"), ConfigError);
    CHECK_THROWS_AS(Expression("z"), ConfigError);
    CHECK_THROWS_AS(Expression("p3", std::vector<double>{1.0}), ConfigError);
    CHECK_THROWS_AS(Expression("x y"), ConfigError);
    CHECK_THROWS_AS(Expression("pow(1)"), ConfigError);
    CHECK_THROWS_AS(Expression(""), ConfigError);
}

TEST_CASE("error message carries the position") {
    try {
        Expression("x + * y");
        FAIL("expected a parse error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("position") != std::string::npos);
    }
}

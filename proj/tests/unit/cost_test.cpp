#include <doctest.h>

#include <cmath>
#include <sstream>

#include "permlim/cost.hpp"
#include "permlim/errors.hpp"

using namespace permlim;

TEST_CASE("built-in families evaluate in closed form") {
    CHECK(evaluate_cost(CostFunction::quadratic(1.0), 0.25, 0.75) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(evaluate_cost(CostFunction::absolute(2.0), 0.1, 0.6) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(evaluate_cost(CostFunction::quadratic(3.7), 0.3, 0.3) == 0.0);
    CHECK(evaluate_cost(CostFunction::absolute(3.7), 0.3, 0.3) == 0.0);
}

TEST_CASE("evaluation is symmetric and deterministic") {
    for (const auto& c : {CostFunction::quadratic(1.3), CostFunction::absolute(0.4),
                          CostFunction::expression("p0*(x-y)^2 + p1*x*y", {2.0, 0.5})}) {
        for (double x : {0.0, 0.17, 0.5, 0.93, 1.0})
            for (double y : {0.0, 0.31, 0.77, 1.0}) {
                CHECK(c(x, y) == c(y, x));
                CHECK(c(x, y) == c(x, y));
            }
    }
}

TEST_CASE("arguments outside the unit square are domain errors") {
    auto c = CostFunction::quadratic(1.0);
    CHECK_THROWS_AS(c(-0.01, 0.5), DomainError);
    CHECK_THROWS_AS(c(0.5, 1.0001), DomainError);
    CHECK_THROWS_AS(c(std::nan(""), 0.5), DomainError);
    CHECK_THROWS_AS(CostFunction::quadratic(-1.0), DomainError);
}

TEST_CASE("quadratic passes every check on grid 50") {
    auto report = validate_cost(CostFunction::quadratic(1.0), 50, 1e-12);
    CHECK(report.grid_size == 50);
    CHECK_FALSE(report.any_fail());
    for (const auto& c : report.checks) CHECK_MESSAGE(c.status == CheckStatus::pass, c.name);
}

TEST_CASE("each named check appears exactly once") {
    auto report = validate_cost(CostFunction::absolute(1.0), 7, 1e-12);
    for (const char* name : {"nonnegativity", "symmetry", "diagonal", "reflection", "finiteness"}) {
        int count = 0;
        for (const auto& c : report.checks) count += c.name == name;
        CHECK_MESSAGE(count == 1, name);
    }
}

TEST_CASE("symmetric families have zero violation at any grid size") {
    for (int g : {2, 3, 10, 37, 100}) {
        for (const auto& c : {CostFunction::quadratic(2.5), CostFunction::absolute(0.7)}) {
            auto report = validate_cost(c, g, 1e-12);
            CHECK(report.check("symmetry").max_violation == 0.0);
            CHECK(report.check("nonnegativity").max_violation == 0.0);
        }
    }
}

TEST_CASE("perturbed tabulated entry fails symmetry by the perturbation") {
    Eigen::MatrixXd t(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) t(i, j) = std::pow((i - j) / 5.0, 2);
    t(1, 4) += 1e-3;
    auto report = validate_cost(CostFunction::tabulated(t), 5, 1e-12);
    CHECK(report.any_fail());
    CHECK(report.check("symmetry").status == CheckStatus::fail);
    CHECK(report.check("symmetry").max_violation == doctest::Approx(1e-3).epsilon(1e-6));
    CHECK(report.check("nonnegativity").status == CheckStatus::pass);
}

TEST_CASE("constant offset only warns on the diagonal") {
    auto c = CostFunction::expression("(x-y)^2 + 0.1");
    auto report = validate_cost(c, 50, 1e-12);
    CHECK_FALSE(report.any_fail());
    CHECK(report.check("diagonal").status == CheckStatus::warn);
    CHECK(report.check("diagonal").max_violation == doctest::Approx(0.1).epsilon(1e-12));
    for (const auto& chk : report.checks)
        if (chk.name != "diagonal") CHECK_MESSAGE(chk.status == CheckStatus::pass, chk.name);
}

TEST_CASE("reflection asymmetry is a warning, negativity and infinities fail") {
    auto skew = CostFunction::expression("x + y");
    auto r1 = validate_cost(skew, 10, 1e-12);
    CHECK(r1.check("reflection").status == CheckStatus::warn);
    CHECK_FALSE(r1.any_fail());

    auto negative = CostFunction::expression("(x-y)^2 - 0.5");
    CHECK(validate_cost(negative, 10, 1e-12).check("nonnegativity").status == CheckStatus::fail);

    auto blowup = CostFunction::expression("1/(x-y)^2");
    auto r3 = validate_cost(blowup, 10, 1e-12);
    CHECK(r3.check("finiteness").status == CheckStatus::fail);
}

TEST_CASE("tabulated cost interpolates bilinearly on its nodes") {
    Eigen::MatrixXd t(3, 3);
    t << 0, 1, 4, 1, 0, 1, 4, 1, 0;
    auto c = CostFunction::tabulated(t);
    CHECK(c(0.0, 1.0) == 4.0);
    CHECK(c(0.5, 0.5) == 0.0);
    CHECK(c(0.25, 0.0) == doctest::Approx(0.5));
    CHECK(c(0.25, 0.75) == doctest::Approx(0.25 * 1 + 0.25 * 4 + 0.25 * 0 + 0.25 * 1));
}

TEST_CASE("cost table reader") {
    std::istringstream ok("2\n0 1\n1 0\n");
    auto t = read_cost_table(ok);
    CHECK(t.rows() == 2);
    CHECK(t(0, 1) == 1.0);
    std::istringstream short_table("3\n0 1 2\n");
    CHECK_THROWS_AS(read_cost_table(short_table), ConfigError);
}

TEST_CASE("absolute family advertises C0") {
    CHECK(CostFunction::absolute(1.0).smoothness() == Smoothness::C0);
    CHECK(CostFunction::quadratic(1.0).smoothness() == Smoothness::C2);
    auto report = validate_cost(CostFunction::absolute(1.0), 10, 1e-12);
    CHECK(report.check("smoothness").status == CheckStatus::warn);
}

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "permlim/errors.hpp"
#include "permlim/lab.hpp"
#include "support.hpp"

using namespace permlim;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return read_run_config(IniFile::parse(in, "test"));
}

std::string data(const std::string& name) { return std::string(PERMLIM_TEST_DATA) + "/" + name; }

std::vector<std::string> lines_of(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("rate fit recovers a clean power law") {
    std::vector<int> ns{4, 8, 16, 32, 64};
    std::vector<double> errs;
    for (int n : ns) errs.push_back(3.0 * std::pow(n, -1.25));
    auto fit = fit_rate(ns, errs);
    CHECK(fit.status == RateFit::Status::fitted);
    CHECK(fit.alpha == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(fit.log_c == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(fit.min_n == 16);
    CHECK(fit.points == 3);
}

TEST_CASE("rate fit uses the upper half of n_list") {
    std::vector<int> ns{8, 16, 24};
    std::vector<double> errs{1.0, 0.2, 0.1};
    auto fit = fit_rate(ns, errs);
    CHECK(fit.min_n == 16);
    CHECK(fit.alpha == doctest::Approx(std::log(2.0) / std::log(1.5)));
}

TEST_CASE("rate fit degenerate cases") {
    CHECK(fit_rate({2, 4, 8}, {0.0, 1e-13, 0.0}).status == RateFit::Status::exact);
    CHECK(fit_rate({2, 4}, {0.1, 0.05}).status == RateFit::Status::fitted);
    CHECK(fit_rate({2, 4, 8}, {0.1, 0.05, 0.0}).status == RateFit::Status::skipped);
    CHECK(fit_rate({}, {}).status == RateFit::Status::skipped);
}

TEST_CASE("config parsing") {
    auto cfg = parse(R"(
        ; comment
        [Cost]
        family = quadratic
        params = 2.5
        [bridge]
        m = 64
        damping = 1
        [study]
        n_list = 4, 8,16
        workers = 3
        permanent_method = ryser
        [output]
        csv_path = out.csv
        eigen_dump = yes
    )");
    REQUIRE(cfg.cost);
    CHECK(cfg.cost->family == "quadratic");
    CHECK(cfg.cost->params == std::vector<double>{2.5});
    CHECK(cfg.bridge.m == 64);
    CHECK(cfg.bridge.damping == 1.0);
    CHECK(cfg.study.n_list == std::vector<int>{4, 8, 16});
    CHECK(cfg.study.workers == 3);
    CHECK(cfg.study.permanent_method == PermanentMethod::ryser);
    CHECK(cfg.output.eigen_dump);
    CHECK(cfg.output.eigen_dump_path == "out.csv.eigen");
    CHECK(make_cost(*cfg.cost)(0.0, 1.0) == 2.5);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse("[study]\nn_list = 4, 4\n"), ConfigError);
    CHECK_THROWS_AS(parse("[study]\nn_list = 8, 4\n"), ConfigError);
    CHECK_THROWS_AS(parse("[study]\nn_list = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse("[study]\nnystrom_m = 16\n"), ConfigError);
    CHECK_THROWS_AS(parse("[bridge]\ndamping = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse("[bridge]\nm = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse("[bogus]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[cost]\nfamily = quadratic\nbeta = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[cost]\n[cost]\n"), ConfigError);
    CHECK_THROWS_AS(parse("[cost]\nfamily = a\nfamily = b\n"), ConfigError);
    CHECK_THROWS_AS(parse("key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[study]\nbalance_tol = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse("[cost]\nparams = 1\n"), ConfigError);
    CHECK_THROWS_AS(make_cost(*parse("[cost]\nfamily = cubic\n").cost), ConfigError);
    CHECK_THROWS_AS(make_kernel_source(*parse("[kernel]\nkind = cosine\nepsilon = 1\n").kernel), ConfigError);
}

TEST_CASE("constant kernel study is exact") {
    auto cfg = parse("[kernel]\nkind = constant\n[study]\nn_list = 2, 4, 8\nnystrom_m = 64\n"
                     "[output]\ncsv_path = lab_constant.csv\n");
    std::ostringstream out;
    ConvergenceStudy study;
    CHECK(run_converge(cfg, out, &study) == 0);
    REQUIRE(study.records.size() == 3);
    for (const auto& r : study.records) {
        CHECK(std::abs(r.D_n - 1.0) <= 1e-11);
        CHECK(r.err_Dn <= 1e-11);
        CHECK(std::isnan(r.L_n_scaled));
        CHECK(r.fredholm_limit == 1.0);
    }
    CHECK(study.rate.status == RateFit::Status::exact);
    CHECK(out.str().find("rate: exact") != std::string::npos);

    auto lines = lines_of("lab_constant.csv");
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == kConvergeCsvHeader);
    CHECK(lines[1].rfind("2,1,1,nan,", 0) == 0);
}

TEST_CASE("converge records are internally consistent") {
    auto cfg = parse("[cost]\nfamily = quadratic\n[bridge]\nm = 200\n[study]\nn_list = 5, 7\nnystrom_m = 64\n");
    std::ostringstream out;
    ConvergenceStudy study;
    run_converge(cfg, out, &study);
    REQUIRE(study.gamma0);
    for (const auto& r : study.records) {
        CHECK(r.err_Dn == std::abs(r.D_n - r.fredholm_limit));
        CHECK(r.err_ratio_mcc == std::abs(r.mccullagh / r.D_n_hat - 1.0));
        CHECK(std::isfinite(r.L_n_scaled));
        CHECK(std::abs(r.D_n_hat / (r.D_n * r.diagnostics.prod_u_sq) - 1.0) <= 1e-10);
    }
}

TEST_CASE("n beyond the permanent cap is a config error") {
    auto cfg = parse("[kernel]\nkind = constant\n[study]\nn_list = 4, 30\n");
    std::ostringstream out;
    CHECK_THROWS_AS(run_converge(cfg, out), ConfigError);
}

TEST_CASE("a failing n aborts the CSV with a marker") {
    auto cfg = load_run_config(data("holed_kernel.ini"));
    cfg.output.csv_path = "lab_holed.csv";
    std::ostringstream out;
    testing::WarningCapture quiet;
    CHECK_THROWS_AS(run_converge(cfg, out), BalanceError);
    auto lines = lines_of("lab_holed.csv");
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == kConvergeCsvHeader);
    CHECK(lines[1].rfind("1,", 0) == 0);
    CHECK(lines[2] == "# aborted at n=2");
}

TEST_CASE("balance study on synthetic kernels") {
    std::ostringstream out;
    BalanceStudy flat;
    run_balance_study(parse("[kernel]\nkind = constant\n[study]\nn_list = 10, 50\n"), out, &flat);
    for (const auto& row : flat.rows) {
        CHECK(row.diagnostics.norm_inf_h == 0.0);
        CHECK(row.diagnostics.sum_log == 0.0);
        CHECK(row.diagnostics.m_n == 0.0);
    }
    for (double r : flat.ratios) CHECK(r == 1.0);

    BalanceStudy cos;
    run_balance_study(load_run_config(data("cosine.ini")), out, &cos);
    CHECK(cos.ratios[3] <= 8.0);
    CHECK(out.str().find("max/min ratio") != std::string::npos);
}

TEST_CASE("worker count does not change converge output") {
    auto base = "[kernel]\nkind = cosine\nepsilon = 0.4\n[study]\nn_list = 6, 9, 12, 14\nnystrom_m = 64\n";
    auto one = parse(base), many = parse(base);
    many.study.workers = 3;
    std::ostringstream o1, o2;
    ConvergenceStudy s1, s2;
    run_converge(one, o1, &s1);
    run_converge(many, o2, &s2);
    for (std::size_t i = 0; i < s1.records.size(); ++i) {
        CHECK(s1.records[i].D_n == s2.records[i].D_n);
        CHECK(s1.records[i].D_n_hat == s2.records[i].D_n_hat);
        CHECK(s1.records[i].mccullagh == s2.records[i].mccullagh);
    }
}

TEST_CASE("dispatch maps failures to exit codes") {
    std::ostringstream out, err;
    CHECK(dispatch("validate-cost", data("quadratic.ini"), out, err) == 0);
    CHECK(dispatch("validate-cost", data("asymmetric.ini"), out, err) == 2);
    CHECK(dispatch("validate-cost", data("no_cost.ini"), out, err) == 1);
    CHECK(err.str().find("[cost]") != std::string::npos);
    CHECK(dispatch("solve-bridge", data("stalled_bridge.ini"), out, err) == 3);
    CHECK(dispatch("validate-cost", data("bad_key.ini"), out, err) == 1);
    CHECK(dispatch("validate-cost", data("missing.ini"), out, err) == 1);
    CHECK(dispatch("frobnicate", data("quadratic.ini"), out, err) == 1);
}

TEST_CASE("solve-bridge reports a zero gamma0 for the zero cost") {
    std::ostringstream out, err;
    CHECK(dispatch("solve-bridge", data("zero_cost.ini"), out, err) == 0);
    CHECK(out.str().find("gamma0: 0\n") != std::string::npos);
}

TEST_CASE("eigenvalue dump is one ascending value per line") {
    auto cfg = parse("[kernel]\nkind = cosine\n[study]\nn_list = 6\nnystrom_m = 40\n"
                     "[output]\neigen_dump = true\neigen_dump_path = lab_eigs.txt\n");
    std::ostringstream out;
    run_converge(cfg, out);
    auto nystrom = lines_of("lab_eigs.txt");
    auto bn = lines_of("lab_eigs.txt.n6");
    CHECK(nystrom.size() == 40);
    CHECK(bn.size() == 6);
    for (std::size_t i = 1; i < nystrom.size(); ++i) CHECK(std::stod(nystrom[i - 1]) <= std::stod(nystrom[i]));
    CHECK(std::stod(nystrom.back()) == doctest::Approx(0.5));
}

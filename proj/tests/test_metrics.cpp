#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "tdqn/metrics.hpp"

using namespace tdqn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const std::vector<double> kReturns = {0.01, -0.005, 0.02, 0.0, 0.005};

Trajectory make_traj(double initial, const std::vector<std::pair<double, long long>>& steps) {
    Trajectory traj;
    traj.initial_value = initial;
    for (const auto& [value, shares] : steps) {
        StepRecord rec;
        rec.value = value;
        rec.shares = shares;
        traj.records.push_back(rec);
    }
    return traj;
}

void check_same(const Indicator& a, const Indicator& b) {
    REQUIRE(a.kind == b.kind);
    if (a.defined()) CHECK_THAT(a.value, WithinRel(b.value, 1e-12) || WithinAbs(b.value, 1e-15));
}

}  // namespace

TEST_CASE("daily returns are simple relative changes") {
    std::vector<double> r = daily_returns({100.0, 110.0, 99.0});
    REQUIRE(r.size() == 2);
    CHECK_THAT(r[0], WithinRel(0.1, 1e-12));
    CHECK_THAT(r[1], WithinRel(-0.1, 1e-12));

    CHECK_THROWS_AS(daily_returns({100.0}), Error);
    CHECK_THROWS_AS(daily_returns({100.0, 0.0}), Error);
    CHECK_THROWS_AS(daily_returns({100.0, -5.0}), Error);
}

TEST_CASE("mean and sample standard deviation") {
    CHECK(mean_of({1.0, 2.0, 3.0, 4.0}) == 2.5);
    CHECK_THAT(sample_sd({1.0, 2.0, 3.0, 4.0}), WithinRel(1.2909944487358056, 1e-12));
    CHECK(sample_sd({3.0, 3.0}) == 0.0);
    CHECK_THROWS_AS(sample_sd({3.0}), InvariantError);
}

TEST_CASE("sharpe ratio reproduces the reference value") {
    Indicator s = sharpe_ratio(kReturns);
    REQUIRE(s.defined());
    CHECK_THAT(s.value, WithinRel(9.903316397837427, 1e-12));
}

TEST_CASE("sharpe ratio is undefined without dispersion") {
    CHECK_FALSE(sharpe_ratio({0.01}).defined());
    CHECK_FALSE(sharpe_ratio({}).defined());
    CHECK(sharpe_ratio({0.02, 0.02, 0.02}).kind == Indicator::Kind::Undefined);
}

TEST_CASE("sortino ratio reproduces the reference value") {
    Indicator s = sortino_ratio(kReturns);
    REQUIRE(s.defined());
    CHECK_THAT(s.value, WithinRel(19.049409439665055, 1e-12));
}

TEST_CASE("sortino ratio is undefined without losing days") {
    CHECK_FALSE(sortino_ratio({}).defined());
    CHECK(sortino_ratio({0.01, 0.0, 0.02}).kind == Indicator::Kind::Undefined);
}

TEST_CASE("drawdown finds the deepest peak-to-trough loss") {
    DrawdownResult dd = drawdown({100.0, 120.0, 90.0, 110.0, 80.0});
    CHECK_THAT(dd.max_drawdown, WithinRel(1.0 / 3.0, 1e-12));
    CHECK(dd.duration == 3);  // peak at index 1, trough at index 4
}

TEST_CASE("drawdown of a rising curve is zero") {
    DrawdownResult dd = drawdown({100.0, 101.0, 102.0});
    CHECK(dd.max_drawdown == 0.0);
    CHECK(dd.duration == 0);
    DrawdownResult one = drawdown({100.0});
    CHECK(one.max_drawdown == 0.0);
    CHECK_THROWS_AS(drawdown({}), Error);
}

TEST_CASE("drawdown keeps the first of equal drops") {
    DrawdownResult dd = drawdown({100.0, 50.0, 100.0, 50.0});
    CHECK_THAT(dd.max_drawdown, WithinRel(0.5, 1e-12));
    CHECK(dd.duration == 1);  // not the later, longer-running repeat
}

TEST_CASE("indicator text and parsing round trip") {
    CHECK(Indicator::of(1.5).text() == "1.5");
    CHECK(Indicator::of(-20.0).text() == "-20");
    CHECK(Indicator::undefined().text() == "undefined");
    CHECK(Indicator::infinite().text() == "inf");

    CHECK(parse_indicator("1.5").value == 1.5);
    CHECK(parse_indicator("undefined").kind == Indicator::Kind::Undefined);
    CHECK(parse_indicator("inf").kind == Indicator::Kind::Infinite);
    CHECK_THROWS_AS(parse_indicator("banana"), Error);

    CHECK(Indicator::of(7.0).value_or(0.0) == 7.0);
    CHECK(Indicator::undefined().value_or(-1.0) == -1.0);
}

TEST_CASE("indicator names are nine and distinct") {
    const auto& names = indicator_names();
    REQUIRE(names.size() == 9);
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = i + 1; j < names.size(); ++j) CHECK(names[i] != names[j]);
}

TEST_CASE("value curve starts at the initial capital") {
    Trajectory traj = make_traj(1000.0, {{1010.0, 5}, {995.0, 5}});
    std::vector<double> values = value_curve(traj);
    CHECK(values == std::vector<double>{1000.0, 1010.0, 995.0});
}

TEST_CASE("full report reproduces the reference statistics") {
    Trajectory traj = make_traj(
        100.0, {{101.0, 1}, {100.5, 1}, {102.3, 1}, {101.9, 1}, {103.0, 1}});
    PerformanceReport rep = full_report(traj);

    REQUIRE(rep.annualised_return.defined());
    CHECK_THAT(rep.annualised_return.value, WithinRel(3.4360468598701486, 1e-12));
    REQUIRE(rep.annualised_volatility.defined());
    CHECK_THAT(rep.annualised_volatility.value, WithinRel(0.15854012197905556, 1e-12));
    REQUIRE(rep.pnl.defined());
    CHECK_THAT(rep.pnl.value, WithinRel(3.0, 1e-12));
    REQUIRE(rep.max_drawdown.defined());
    CHECK_THAT(rep.max_drawdown.value, WithinRel(0.5 / 101.0, 1e-12));
    CHECK(rep.max_drawdown_duration.value == 1.0);

    // a single always-long winning trade
    CHECK(rep.profitability_ratio.value == 1.0);
    CHECK(rep.pnl_ratio.kind == Indicator::Kind::Infinite);
    CHECK(rep.sharpe.defined());
    CHECK(rep.sortino.defined());
}

TEST_CASE("full report splits trades at position changes") {
    Trajectory traj = make_traj(1000.0, {{1010.0, 1}, {990.0, -1}, {1020.0, 1}});
    PerformanceReport rep = full_report(traj);
    // trades: +10 (long), -20 (short), +30 (long)
    REQUIRE(rep.profitability_ratio.defined());
    CHECK_THAT(rep.profitability_ratio.value, WithinRel(2.0 / 3.0, 1e-12));
    REQUIRE(rep.pnl_ratio.defined());
    CHECK_THAT(rep.pnl_ratio.value, WithinRel(1.0, 1e-12));  // avg win 20 vs avg loss 20
}

TEST_CASE("full report with one flat trade has no pnl ratio") {
    Trajectory traj = make_traj(1000.0, {{1000.0, 1}});
    PerformanceReport rep = full_report(traj);
    CHECK(rep.profitability_ratio.value == 0.0);
    CHECK(rep.pnl_ratio.kind == Indicator::Kind::Undefined);
    CHECK_FALSE(rep.sharpe.defined());
    CHECK_FALSE(rep.annualised_volatility.defined());
    CHECK_FALSE(rep.sortino.defined());
    CHECK(rep.annualised_return.value == 0.0);
    CHECK(rep.pnl.value == 0.0);
}

TEST_CASE("full report rejects an empty trajectory") {
    Trajectory traj;
    traj.initial_value = 1000.0;
    CHECK_THROWS_AS(full_report(traj), Error);
}

TEST_CASE("scale-free indicators ignore the account size") {
    Trajectory small = make_traj(
        100.0, {{103.0, 2}, {99.0, -1}, {104.0, -1}, {108.0, 3}, {105.0, 3}});
    Trajectory big = small;
    big.initial_value *= 7.0;
    for (StepRecord& r : big.records) r.value *= 7.0;

    PerformanceReport a = full_report(small);
    PerformanceReport b = full_report(big);
    check_same(a.sharpe, b.sharpe);
    check_same(a.sortino, b.sortino);
    check_same(a.annualised_return, b.annualised_return);
    check_same(a.annualised_volatility, b.annualised_volatility);
    check_same(a.profitability_ratio, b.profitability_ratio);
    check_same(a.pnl_ratio, b.pnl_ratio);
    check_same(a.max_drawdown, b.max_drawdown);
    check_same(a.max_drawdown_duration, b.max_drawdown_duration);
    CHECK_THAT(b.pnl.value, WithinRel(7.0 * a.pnl.value, 1e-12));
}

TEST_CASE("report json uses null and inf markers") {
    PerformanceReport rep;
    rep.sharpe = Indicator::of(1.5);
    rep.pnl = Indicator::of(-20.0);
    rep.annualised_return = Indicator::undefined();
    rep.annualised_volatility = Indicator::of(0.25);
    rep.profitability_ratio = Indicator::of(0.5);
    rep.pnl_ratio = Indicator::infinite();
    rep.sortino = Indicator::undefined();
    rep.max_drawdown = Indicator::of(0.1);
    rep.max_drawdown_duration = Indicator::of(3.0);

    nlohmann::json j = report_to_json(rep);
    CHECK(j.size() == 9);
    CHECK(j.at("sharpe_ratio") == 1.5);
    CHECK(j.at("annualised_return").is_null());
    CHECK(j.at("profit_and_loss_ratio") == "inf");

    PerformanceReport back = report_from_json(j);
    auto a = rep.ordered();
    auto b = back.ordered();
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i]->kind == b[i]->kind);
        CHECK(a[i]->value == b[i]->value);
    }

    j.erase("sortino_ratio");
    CHECK_THROWS_AS(report_from_json(j), Error);
    nlohmann::json bad = report_to_json(rep);
    bad["sharpe_ratio"] = "huge";
    CHECK_THROWS_AS(report_from_json(bad), Error);
}

TEST_CASE("report csv cells follow the indicator order") {
    PerformanceReport rep;
    rep.sharpe = Indicator::of(1.5);
    rep.pnl = Indicator::of(-20.0);
    rep.annualised_return = Indicator::undefined();
    rep.annualised_volatility = Indicator::of(0.25);
    rep.profitability_ratio = Indicator::of(0.5);
    rep.pnl_ratio = Indicator::infinite();
    rep.sortino = Indicator::undefined();
    rep.max_drawdown = Indicator::of(0.1);
    rep.max_drawdown_duration = Indicator::of(3.0);
    CHECK(report_csv_cells(rep) == "1.5,-20,undefined,0.25,0.5,inf,undefined,0.1,3");
}

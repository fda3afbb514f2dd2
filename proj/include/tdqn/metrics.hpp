#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdqn/env.hpp"
#include "tdqn/error.hpp"
#include "tdqn/numfmt.hpp"

namespace tdqn {

// One performance indicator. Ratios over empty denominators are reported as
// explicit markers instead of fabricated numbers: "undefined" when the
// defining quantity does not exist (zero variance, no losing trade to divide
// by and no winning one either), "inf" when profits exist and losses do not.
struct Indicator {
    enum class Kind { Value, Undefined, Infinite };
    Kind kind = Kind::Undefined;
    double value = 0.0;

    static Indicator of(double v) { return {Kind::Value, v}; }
    static Indicator undefined() { return {Kind::Undefined, 0.0}; }
    static Indicator infinite() { return {Kind::Infinite, 0.0}; }

    bool defined() const { return kind == Kind::Value; }
    double value_or(double fallback) const { return defined() ? value : fallback; }

    std::string text() const {
        switch (kind) {
            case Kind::Value: return format_double(value);
            case Kind::Infinite: return "inf";
            default: return "undefined";
        }
    }
};

inline Indicator parse_indicator(std::string_view text) {
    if (text == "undefined") return Indicator::undefined();
    if (text == "inf") return Indicator::infinite();
    return Indicator::of(parse_double(text, "indicator"));
}

inline constexpr double kTradingDaysPerYear = 252.0;

inline std::vector<double> daily_returns(const std::vector<double>& values) {
    require(values.size() >= 2, "need at least 2 portfolio values, have ", values.size());
    for (double v : values) require(v > 0.0, "portfolio values must be positive");
    std::vector<double> out;
    out.reserve(values.size() - 1);
    for (std::size_t i = 1; i < values.size(); ++i)
        out.push_back((values[i] - values[i - 1]) / values[i - 1]);
    return out;
}

inline double mean_of(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

// Sample standard deviation (n - 1 denominator).
inline double sample_sd(const std::vector<double>& xs) {
    TDQN_INVARIANT(xs.size() >= 2, "sample sd needs at least 2 points");
    const double m = mean_of(xs);
    double sq = 0.0;
    for (double x : xs) sq += (x - m) * (x - m);
    return std::sqrt(sq / static_cast<double>(xs.size() - 1));
}

inline Indicator sharpe_ratio(const std::vector<double>& returns) {
    if (returns.size() < 2) return Indicator::undefined();
    const double sd = sample_sd(returns);
    if (sd == 0.0) return Indicator::undefined();
    return Indicator::of(std::sqrt(kTradingDaysPerYear) * mean_of(returns) / sd);
}

inline Indicator sortino_ratio(const std::vector<double>& returns) {
    if (returns.empty()) return Indicator::undefined();
    double down_sq = 0.0;
    std::size_t down_count = 0;
    for (double r : returns)
        if (r < 0.0) {
            down_sq += r * r;
            ++down_count;
        }
    if (down_count == 0) return Indicator::undefined();
    const double downside = std::sqrt(down_sq / static_cast<double>(down_count));
    if (downside == 0.0) return Indicator::undefined();
    return Indicator::of(std::sqrt(kTradingDaysPerYear) * mean_of(returns) / downside);
}

struct DrawdownResult {
    double max_drawdown = 0.0;       // fraction of the peak lost
    std::size_t duration = 0;        // trading days from that peak to the trough
};

inline DrawdownResult drawdown(const std::vector<double>& values) {
    require(!values.empty(), "drawdown needs at least one value");
    DrawdownResult res;
    std::size_t peak_index = 0;
    double peak = values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > peak) {
            peak = values[i];
            peak_index = i;
            continue;
        }
        const double dd = (peak - values[i]) / peak;
        if (dd > res.max_drawdown) {
            res.max_drawdown = dd;
            res.duration = i - peak_index;
        }
    }
    return res;
}

inline const std::vector<std::string>& indicator_names() {
    static const std::vector<std::string> names = {
        "sharpe_ratio",        "profit_and_loss",     "annualised_return",
        "annualised_volatility", "profitability_ratio", "profit_and_loss_ratio",
        "sortino_ratio",       "max_drawdown",        "max_drawdown_duration"};
    return names;
}

struct PerformanceReport {
    Indicator sharpe;
    Indicator pnl;
    Indicator annualised_return;
    Indicator annualised_volatility;
    Indicator profitability_ratio;
    Indicator pnl_ratio;
    Indicator sortino;
    Indicator max_drawdown;
    Indicator max_drawdown_duration;

    std::vector<const Indicator*> ordered() const {
        return {&sharpe,        &pnl,       &annualised_return, &annualised_volatility,
                &profitability_ratio, &pnl_ratio, &sortino,           &max_drawdown,
                &max_drawdown_duration};
    }
    std::vector<Indicator*> ordered() {
        return {&sharpe,        &pnl,       &annualised_return, &annualised_volatility,
                &profitability_ratio, &pnl_ratio, &sortino,           &max_drawdown,
                &max_drawdown_duration};
    }
};

namespace detail {

inline nlohmann::json indicator_json(const Indicator& ind) {
    switch (ind.kind) {
        case Indicator::Kind::Value: return ind.value;
        case Indicator::Kind::Infinite: return "inf";
        default: return nullptr;
    }
}

inline Indicator indicator_from_json(const nlohmann::json& j) {
    if (j.is_null()) return Indicator::undefined();
    if (j.is_string()) {
        require(j.get<std::string>() == "inf", "bad indicator value '", j.get<std::string>(), "'");
        return Indicator::infinite();
    }
    return Indicator::of(j.get<double>());
}

}  // namespace detail

inline nlohmann::json report_to_json(const PerformanceReport& report) {
    nlohmann::json j = nlohmann::json::object();
    const auto& names = indicator_names();
    auto inds = report.ordered();
    for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = detail::indicator_json(*inds[i]);
    return j;
}

inline PerformanceReport report_from_json(const nlohmann::json& j) {
    PerformanceReport report;
    const auto& names = indicator_names();
    auto inds = report.ordered();
    for (std::size_t i = 0; i < names.size(); ++i) {
        require(j.contains(names[i]), "report missing indicator '", names[i], "'");
        *inds[i] = detail::indicator_from_json(j.at(names[i]));
    }
    return report;
}

// One CSV cell per indicator, in the indicator_names order.
inline std::string report_csv_cells(const PerformanceReport& report) {
    std::string out;
    bool first = true;
    for (const Indicator* ind : report.ordered()) {
        if (!first) out += ',';
        first = false;
        out += ind->text();
    }
    return out;
}

// Portfolio value sequence of a trajectory: starting value then the value
// after each step.
inline std::vector<double> value_curve(const Trajectory& traj) {
    std::vector<double> values;
    values.reserve(traj.records.size() + 1);
    values.push_back(traj.initial_value);
    for (const StepRecord& r : traj.records) values.push_back(r.value);
    return values;
}

// The nine indicators of a full trajectory. A trade is the stretch between
// consecutive position changes; its result is the portfolio-value change
// over that stretch.
inline PerformanceReport full_report(const Trajectory& traj) {
    require(!traj.records.empty(), "cannot report on an empty trajectory");
    const std::vector<double> values = value_curve(traj);
    const std::vector<double> returns = daily_returns(values);

    PerformanceReport report;
    report.sharpe = sharpe_ratio(returns);
    report.sortino = sortino_ratio(returns);
    report.pnl = Indicator::of(values.back() - values.front());

    const double ratio = values.back() / values.front();
    const double years = static_cast<double>(returns.size()) / kTradingDaysPerYear;
    if (ratio > 0.0 && years > 0.0)
        report.annualised_return = Indicator::of(std::pow(ratio, 1.0 / years) - 1.0);
    else
        report.annualised_return = Indicator::of(-1.0);  // wiped out

    report.annualised_volatility =
        returns.size() >= 2
            ? Indicator::of(std::sqrt(kTradingDaysPerYear) * sample_sd(returns))
            : Indicator::undefined();

    DrawdownResult dd = drawdown(values);
    report.max_drawdown = Indicator::of(dd.max_drawdown);
    report.max_drawdown_duration = Indicator::of(static_cast<double>(dd.duration));

    // Trade segmentation by position sign after each step.
    std::vector<double> trade_results;
    std::size_t segment_start = 0;  // index into values[]
    auto position_of = [&](std::size_t step) { return traj.records[step].shares >= 0; };
    for (std::size_t step = 1; step <= traj.records.size(); ++step) {
        const bool boundary =
            step == traj.records.size() || position_of(step) != position_of(step - 1);
        if (!boundary) continue;
        trade_results.push_back(values[step] - values[segment_start]);
        segment_start = step;
    }

    double win_sum = 0.0, loss_sum = 0.0;
    std::size_t wins = 0, losses = 0;
    for (double r : trade_results) {
        if (r > 0.0) {
            win_sum += r;
            ++wins;
        } else if (r < 0.0) {
            loss_sum += -r;
            ++losses;
        }
    }
    report.profitability_ratio =
        Indicator::of(static_cast<double>(wins) / static_cast<double>(trade_results.size()));
    if (losses > 0) {
        const double avg_win = wins > 0 ? win_sum / static_cast<double>(wins) : 0.0;
        const double avg_loss = loss_sum / static_cast<double>(losses);
        report.pnl_ratio = Indicator::of(avg_win / avg_loss);
    } else if (wins > 0) {
        report.pnl_ratio = Indicator::infinite();
    } else {
        report.pnl_ratio = Indicator::undefined();
    }
    return report;
}

}  // namespace tdqn

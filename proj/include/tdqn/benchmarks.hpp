#pragma once

#include <string>
#include <string_view>

#include "tdqn/env.hpp"

namespace tdqn {

enum class StrategyKind { BuyHold, SellHold, TrendFollowing, MeanReversion };

struct StrategySpec {
    StrategyKind kind = StrategyKind::BuyHold;
    std::size_t short_window = 5;
    std::size_t long_window = 20;

    void validate() const {
        if (kind == StrategyKind::TrendFollowing || kind == StrategyKind::MeanReversion) {
            require(short_window >= 1, "short window must be at least 1");
            require(short_window < long_window, "short window must be below long window");
        }
    }
};

inline std::string strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::BuyHold: return "buy-hold";
        case StrategyKind::SellHold: return "sell-hold";
        case StrategyKind::TrendFollowing: return "trend-following";
        default: return "mean-reversion";
    }
}

inline StrategyKind parse_strategy(std::string_view name) {
    if (name == "buy-hold") return StrategyKind::BuyHold;
    if (name == "sell-hold") return StrategyKind::SellHold;
    if (name == "trend-following") return StrategyKind::TrendFollowing;
    if (name == "mean-reversion") return StrategyKind::MeanReversion;
    fail("unknown strategy '", std::string(name),
         "' (expected buy-hold, sell-hold, trend-following or mean-reversion)");
}

inline Policy passive_policy(StrategyKind kind) {
    require(kind == StrategyKind::BuyHold || kind == StrategyKind::SellHold,
            "passive_policy expects buy-hold or sell-hold");
    const int action = kind == StrategyKind::BuyHold ? kActionLong : kActionShort;
    return [action](const PolicyView&) { return action; };
}

// Simple moving average of the last `window` closes including today's.
inline double trailing_close_mean(const PolicyView& view, std::size_t window) {
    double sum = 0.0;
    for (std::size_t k = 0; k < window; ++k) sum += view.close(k);
    return sum / static_cast<double>(window);
}

inline Policy moving_average_policy(StrategyKind kind, std::size_t short_window,
                                    std::size_t long_window) {
    require(kind == StrategyKind::TrendFollowing || kind == StrategyKind::MeanReversion,
            "moving_average_policy expects trend-following or mean-reversion");
    StrategySpec spec{kind, short_window, long_window};
    spec.validate();
    const bool follow = kind == StrategyKind::TrendFollowing;
    return [=](const PolicyView& view) {
        if (view.t() + 1 < long_window) {
            // Not enough closes yet: keep whatever position is on.
            return view.prev_action() == kActionShort ? kActionShort : kActionLong;
        }
        const double short_ma = trailing_close_mean(view, short_window);
        const double long_ma = trailing_close_mean(view, long_window);
        const bool rising = short_ma > long_ma;
        if (follow) return rising ? kActionLong : kActionShort;
        return rising ? kActionShort : kActionLong;
    };
}

inline Policy make_policy(const StrategySpec& spec) {
    spec.validate();
    if (spec.kind == StrategyKind::BuyHold || spec.kind == StrategyKind::SellHold)
        return passive_policy(spec.kind);
    return moving_average_policy(spec.kind, spec.short_window, spec.long_window);
}

}  // namespace tdqn

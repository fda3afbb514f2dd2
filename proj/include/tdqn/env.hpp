#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tdqn/features.hpp"
#include "tdqn/numfmt.hpp"
#include "tdqn/ohlcv.hpp"

namespace tdqn {

inline constexpr int kActionShort = 0;
inline constexpr int kActionLong = 1;
inline constexpr int kActionNone = -1;  // before the first trade of an episode

enum class Position { Short, Long };

struct EnvConfig {
    double cost_rate = 0.001;     // fraction of traded money lost per trade
    double epsilon_bound = 0.1;   // assumed maximum relative daily price move
    double initial_cash = 100000.0;
    std::size_t tau = 30;         // observation history length

    void validate() const {
        require(cost_rate >= 0.0, "cost rate must be non-negative");
        require(epsilon_bound > 0.0, "epsilon bound must be positive");
        require(initial_cash > 0.0, "initial cash must be positive");
        require(tau >= 1, "tau must be at least 1");
    }
};

struct AgentState {
    double cash = 0.0;
    long long shares = 0;
    int prev_action = kActionNone;

    Position position() const { return shares >= 0 ? Position::Long : Position::Short; }
    double position_sign() const { return shares >= 0 ? 1.0 : -1.0; }
    double value(double price) const { return cash + static_cast<double>(shares) * price; }
};

// Largest number of shares purchasable without driving cash negative.
inline double action_upper_bound(const AgentState& state, double price, const EnvConfig& cfg) {
    return state.cash / (price * (1.0 + cfg.cost_rate));
}

// Smallest trade keeping the short position coverable at the worst assumed
// next price p·(1+ε). Positive when the current state already needs a
// buy-back to get coverable again.
inline double action_lower_bound(const AgentState& state, double price, const EnvConfig& cfg) {
    const double c = cfg.cost_rate;
    const double eps = cfg.epsilon_bound;
    double delta = -state.cash - static_cast<double>(state.shares) * price * (1.0 + eps) * (1.0 + c);
    if (delta >= 0.0) return delta / (price * eps * (1.0 + c));
    return delta / (price * (2.0 * c + eps * (1.0 + c)));
}

inline long long q_long(const AgentState& state, double price, int previous_action,
                        const EnvConfig& cfg) {
    if (previous_action == kActionLong) return 0;
    return static_cast<long long>(std::floor(action_upper_bound(state, price, cfg)));
}

// Returns the trade quantity plus whether the feasibility clamp fired.
struct ShortDecision {
    long long quantity = 0;
    bool clamped_low = false;   // lower bound bit (price ran up since entry)
    bool clamped_high = false;  // cash cap bit, only reachable from states
                                // that already broke the coverage assumption
};

inline ShortDecision q_short_decision(const AgentState& state, double price, int previous_action,
                                      const EnvConfig& cfg) {
    ShortDecision out;
    if (previous_action == kActionShort) return out;
    long long cash_cap = static_cast<long long>(std::floor(action_upper_bound(state, price, cfg)));
    long long candidate = -2 * state.shares - cash_cap;
    long long lo = static_cast<long long>(std::ceil(action_lower_bound(state, price, cfg)));
    out.quantity = candidate;
    if (out.quantity < lo) {
        out.quantity = lo;
        out.clamped_low = true;
    }
    if (out.quantity > cash_cap) {
        out.quantity = cash_cap;
        out.clamped_high = true;
    }
    return out;
}

inline long long q_short(const AgentState& state, double price, int previous_action,
                         const EnvConfig& cfg) {
    return q_short_decision(state, price, previous_action, cfg).quantity;
}

// State constraints, checked with the price the last trade was decided at.
inline bool cash_ok(const AgentState& state, double tol = 1e-9) { return state.cash >= -tol; }

inline bool coverage_ok(const AgentState& state, double decision_price, const EnvConfig& cfg,
                        double tol_scale = 1.0) {
    double floor_value = -static_cast<double>(state.shares) * decision_price *
                         (1.0 + cfg.epsilon_bound) * (1.0 + cfg.cost_rate);
    return state.cash >= floor_value - 1e-9 * tol_scale;
}

struct StepResult {
    AgentState next;
    long long quantity = 0;
    double reward = 0.0;
    bool clamped = false;
};

// One transition: trade at price_now, mark to market at price_next.
inline StepResult step(const AgentState& state, int action, double price_now, double price_next,
                       const EnvConfig& cfg) {
    TDQN_INVARIANT(price_now > 0.0 && price_next > 0.0, "prices must be positive");
    TDQN_INVARIANT(action == kActionShort || action == kActionLong, "bad action index");

    StepResult res;
    if (action == kActionLong) {
        res.quantity = q_long(state, price_now, state.prev_action, cfg);
    } else {
        ShortDecision d = q_short_decision(state, price_now, state.prev_action, cfg);
        res.quantity = d.quantity;
        res.clamped = d.clamped_low || d.clamped_high;
    }

    const double traded = static_cast<double>(res.quantity) * price_now;
    res.next.cash = state.cash - traded - cfg.cost_rate * std::abs(traded);
    res.next.shares = state.shares + res.quantity;
    res.next.prev_action = action;

    const double value_now = state.value(price_now);
    const double value_next = res.next.value(price_next);
    res.reward = value_now == 0.0 ? 0.0 : (value_next - value_now) / value_now;
    return res;
}

// Flat network input: feature rows [t - tau, t] then the position slot.
inline std::size_t observation_dim(std::size_t tau) { return (tau + 1) * kFeaturesPerBar + 1; }

struct ObsRef {
    const FeatureMatrix* features = nullptr;
    std::size_t t = 0;
    double position = 1.0;  // +1 long, -1 short
};

inline void materialize_observation(const ObsRef& ref, std::size_t tau, double* out) {
    TDQN_INVARIANT(ref.features != nullptr, "observation without features");
    TDQN_INVARIANT(ref.t >= tau && ref.t >= ref.features->first_valid + tau &&
                       ref.t < ref.features->rows(),
                   "incomplete observation window");
    const Matrix& v = ref.features->values;
    const double* src = v.row(ref.t - tau);
    const std::size_t count = (tau + 1) * kFeaturesPerBar;
    for (std::size_t i = 0; i < count; ++i) out[i] = src[i];
    out[count] = ref.position;
}

inline std::vector<double> build_observation(const ObsRef& ref, std::size_t tau) {
    std::vector<double> out(observation_dim(tau));
    materialize_observation(ref, tau, out.data());
    return out;
}

struct StepRecord {
    Date date;           // trade date (bar t)
    double price = 0.0;  // close used for the trade
    int action = kActionLong;
    long long quantity = 0;
    double cash = 0.0;       // after the trade
    long long shares = 0;    // after the trade
    double value = 0.0;      // marked at the next close
    double reward = 0.0;
};

struct Trajectory {
    std::vector<StepRecord> records;
    double initial_value = 0.0;

    std::size_t steps() const { return records.size(); }
    double final_value() const { return records.empty() ? initial_value : records.back().value; }
};

// Simulator over one price series. Copies are cheap and independent: the
// series and feature matrix are shared read-only.
class Environment {
public:
    Environment(const OhlcvSeries* series, const FeatureMatrix* features, const EnvConfig& cfg)
        : series_(series), features_(features), cfg_(cfg) {
        cfg_.validate();
        TDQN_INVARIANT(series_ && features_, "environment needs series and features");
        TDQN_INVARIANT(features_->rows() == series_->size(), "features misaligned with series");
        first_t_ = cfg_.tau + features_->first_valid;
        require(series_->size() >= first_t_ + 2, "series too short: need at least ",
                first_t_ + 2, " bars, have ", series_->size());
        reset();
    }

    void reset() {
        t_ = first_t_;
        state_ = AgentState{cfg_.initial_cash, 0, kActionNone};
        eps_violations_ = 0;
        clamp_events_ = 0;
    }

    const EnvConfig& config() const { return cfg_; }
    const OhlcvSeries& series() const { return *series_; }
    const FeatureMatrix& features() const { return *features_; }
    const AgentState& state() const { return state_; }
    std::size_t t() const { return t_; }
    std::size_t first_t() const { return first_t_; }
    bool done() const { return t_ + 1 >= series_->size(); }
    double price() const { return (*series_)[t_].close; }
    double portfolio_value() const { return state_.value(price()); }
    std::size_t eps_violations() const { return eps_violations_; }
    std::size_t clamp_events() const { return clamp_events_; }

    // Steps remaining until the terminal bar.
    std::size_t steps_total() const { return series_->size() - 1 - first_t_; }

    ObsRef obs_ref() const { return ObsRef{features_, t_, state_.position_sign()}; }

    StepRecord step_action(int action) {
        TDQN_INVARIANT(!done(), "step on finished environment");
        const double p_now = (*series_)[t_].close;
        const double p_next = (*series_)[t_ + 1].close;

        const bool pre_feasible = cash_ok(state_) && coverage_ok(state_, p_now, cfg_, tol_scale());
        StepResult res = step(state_, action, p_now, p_next, cfg_);
        if (res.clamped) ++clamp_events_;
        if (std::abs(p_next / p_now - 1.0) > cfg_.epsilon_bound) ++eps_violations_;

        if (pre_feasible) {
            TDQN_INVARIANT(cash_ok(res.next, 1e-9 * tol_scale()),
                           "trade drove cash negative from a feasible state");
            TDQN_INVARIANT(coverage_ok(res.next, p_now, cfg_, tol_scale()),
                           "trade broke the coverage bound from a feasible state");
        }

        StepRecord rec;
        rec.date = (*series_)[t_].date;
        rec.price = p_now;
        rec.action = action;
        rec.quantity = res.quantity;
        rec.cash = res.next.cash;
        rec.shares = res.next.shares;
        rec.value = res.next.value(p_next);
        rec.reward = res.reward;

        state_ = res.next;
        ++t_;
        return rec;
    }

private:
    double tol_scale() const {
        return cfg_.initial_cash + std::abs(static_cast<double>(state_.shares)) * price() + 1.0;
    }

    const OhlcvSeries* series_;
    const FeatureMatrix* features_;
    EnvConfig cfg_;
    std::size_t first_t_ = 0;
    std::size_t t_ = 0;
    AgentState state_;
    std::size_t eps_violations_ = 0;
    std::size_t clamp_events_ = 0;
};

// What a policy is allowed to look at when choosing the next action.
struct PolicyView {
    const Environment* env = nullptr;

    std::size_t t() const { return env->t(); }
    std::size_t tau() const { return env->config().tau; }
    double close(std::size_t back = 0) const { return env->series()[env->t() - back].close; }
    Position position() const { return env->state().position(); }
    int prev_action() const { return env->state().prev_action; }
    ObsRef observation() const { return env->obs_ref(); }
};

using Policy = std::function<int(const PolicyView&)>;

struct TrajectoryPair {
    Trajectory main;
    std::optional<Trajectory> mirrored;
};

// Plays the policy over the whole series. With mirror set, each step also
// branches a copy of the pre-state and executes the opposite action on it,
// recording that one-step outcome in the mirrored trajectory. Prices are
// historical and unaffected by either branch.
inline TrajectoryPair run_trajectory(const OhlcvSeries& series, const FeatureMatrix& features,
                                     const EnvConfig& cfg, const Policy& policy,
                                     bool mirror = false) {
    Environment env(&series, &features, cfg);
    TrajectoryPair out;
    out.main.initial_value = env.portfolio_value();
    if (mirror) {
        out.mirrored.emplace();
        out.mirrored->initial_value = out.main.initial_value;
    }
    while (!env.done()) {
        int action = policy(PolicyView{&env});
        TDQN_INVARIANT(action == kActionShort || action == kActionLong, "policy returned bad action");
        if (mirror) {
            Environment branch = env;
            out.mirrored->records.push_back(branch.step_action(1 - action));
        }
        out.main.records.push_back(env.step_action(action));
    }
    return out;
}

inline const char* action_name(int action) {
    switch (action) {
        case kActionShort: return "short";
        case kActionLong: return "long";
        default: return "none";
    }
}

inline int parse_action(std::string_view text) {
    if (text == "short") return kActionShort;
    if (text == "long") return kActionLong;
    fail("bad action '", std::string(text), "'");
}

inline constexpr std::string_view kTrajectoryHeader =
    "date,price,action,quantity,cash,shares,value,reward";

namespace detail {

inline void append_record_row(std::string& out, const StepRecord& r, const char* action) {
    out += to_string(r.date);
    out += ',';
    out += format_double(r.price);
    out += ',';
    out += action;
    out += ',';
    out += std::to_string(r.quantity);
    out += ',';
    out += format_double(r.cash);
    out += ',';
    out += std::to_string(r.shares);
    out += ',';
    out += format_double(r.value);
    out += ',';
    out += format_double(r.reward);
    out += '\n';
}

}  // namespace detail

// First data row is the pre-trade state (action "none", value = starting
// portfolio value); every following row is one executed step. Numbers use
// shortest round-trip formatting, so parsing the file back reproduces the
// trajectory bit for bit.
inline std::string write_trajectory_csv(const Trajectory& traj) {
    std::string out(kTrajectoryHeader);
    out += '\n';
    if (!traj.records.empty()) {
        StepRecord initial;
        initial.date = traj.records.front().date;
        initial.price = traj.records.front().price;
        initial.quantity = 0;
        initial.cash = traj.initial_value;
        initial.shares = 0;
        initial.value = traj.initial_value;
        initial.reward = 0.0;
        detail::append_record_row(out, initial, "none");
    }
    for (const StepRecord& r : traj.records)
        detail::append_record_row(out, r, action_name(r.action));
    return out;
}

inline Trajectory read_trajectory_csv(std::string_view text) {
    Trajectory traj;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool saw_header = false;
    bool saw_initial = false;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            (eol == std::string_view::npos) ? text.substr(pos) : text.substr(pos, eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!saw_header) {
            require(line == kTrajectoryHeader, "trajectory csv line 1: bad header");
            saw_header = true;
            continue;
        }
        auto fields = detail::split_fields(line);
        require(fields.size() == 8, "trajectory csv line ", line_no, ": expected 8 fields");
        StepRecord r;
        r.date = parse_date(fields[0]);
        r.price = parse_double(fields[1], "price");
        r.quantity = parse_int(fields[3], "quantity");
        r.cash = parse_double(fields[4], "cash");
        r.shares = parse_int(fields[5], "shares");
        r.value = parse_double(fields[6], "value");
        r.reward = parse_double(fields[7], "reward");
        if (fields[2] == "none") {
            require(!saw_initial && traj.records.empty(),
                    "trajectory csv line ", line_no, ": misplaced initial row");
            saw_initial = true;
            traj.initial_value = r.value;
            continue;
        }
        r.action = parse_action(fields[2]);
        traj.records.push_back(r);
    }
    require(saw_header, "trajectory csv: missing header");
    return traj;
}

}  // namespace tdqn

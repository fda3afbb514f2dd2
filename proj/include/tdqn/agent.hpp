#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "tdqn/augment.hpp"
#include "tdqn/dataset.hpp"
#include "tdqn/env.hpp"
#include "tdqn/metrics.hpp"
#include "tdqn/net.hpp"
#include "tdqn/replay.hpp"

namespace tdqn {

struct Hyperparams {
    double gamma = 0.4;
    double eps_start = 1.0;
    double eps_end = 0.01;
    std::size_t eps_decay_steps = 10000;  // environment steps
    std::size_t batch_size = 32;
    std::size_t learn_every = 1;          // environment steps per gradient update
    std::size_t target_sync = 1000;       // gradient updates per hard target copy
    std::size_t episodes = 50;
    std::size_t replay_capacity = 100000;
    double learning_rate = 1e-4;
    std::size_t patience = 10;            // validation checks without improvement
    double clip_threshold = 1.0;

    void validate() const {
        require(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0, 1]");
        require(eps_start >= 0.0 && eps_start <= 1.0 && eps_end >= 0.0 && eps_end <= 1.0,
                "epsilon range must be within [0, 1]");
        require(eps_end <= eps_start, "epsilon end must not exceed epsilon start");
        require(eps_decay_steps >= 1, "epsilon decay steps must be at least 1");
        require(batch_size >= 1, "batch size must be at least 1");
        require(learn_every >= 1, "learn-every period must be at least 1");
        require(target_sync >= 1, "target sync period must be at least 1");
        require(episodes >= 1, "episode count must be at least 1");
        require(replay_capacity >= batch_size, "replay capacity must hold one batch");
        require(learning_rate > 0.0, "learning rate must be positive");
        require(patience >= 1, "patience must be at least 1");
        require(clip_threshold > 0.0, "clip threshold must be positive");
    }
};

// Data-pipeline knobs that sit in front of the environment.
struct PipelineConfig {
    std::size_t filter_window = 5;
    AugmentSpec augment;
};

inline double annealed_epsilon(const Hyperparams& hp, std::uint64_t env_steps) {
    if (env_steps >= hp.eps_decay_steps) return hp.eps_end;
    const double frac = static_cast<double>(env_steps) / static_cast<double>(hp.eps_decay_steps);
    return hp.eps_start + (hp.eps_end - hp.eps_start) * frac;
}

// ε-greedy over two Q-values; greedy ties resolve to Long.
inline int select_action(const double q[kNumActions], double epsilon, Rng& rng) {
    TDQN_INVARIANT(epsilon >= 0.0 && epsilon <= 1.0, "epsilon out of range");
    if (epsilon > 0.0 && rng.uniform01() < epsilon)
        return static_cast<int>(rng.uniform_int(0, 1));
    return q[kActionLong] >= q[kActionShort] ? kActionLong : kActionShort;
}

// Double-DQN targets: the main network picks the next action, the target
// network prices it.
inline std::vector<double> compute_targets(const std::vector<Experience>& batch,
                                           NetworkParams& main, NetworkParams& target,
                                           double gamma, std::size_t tau) {
    require(!batch.empty(), "empty target batch");
    const std::size_t dim = observation_dim(tau);
    std::vector<double> targets(batch.size(), 0.0);

    std::vector<std::size_t> open;  // indices of non-terminal samples
    for (std::size_t i = 0; i < batch.size(); ++i) {
        targets[i] = batch[i].reward;
        if (!batch[i].terminal) open.push_back(i);
    }
    if (open.empty() || gamma == 0.0) return targets;

    Matrix next_inputs(open.size(), dim);
    for (std::size_t k = 0; k < open.size(); ++k)
        materialize_observation(batch[open[k]].next_obs(), tau, next_inputs.row(k));

    ForwardCache cache;
    Matrix q_main = forward(main, next_inputs, Mode::Eval, cache);
    const Matrix& q_target = forward(target, next_inputs, Mode::Eval, cache);
    for (std::size_t k = 0; k < open.size(); ++k) {
        const int best = q_main(k, kActionLong) >= q_main(k, kActionShort) ? kActionLong
                                                                           : kActionShort;
        targets[open[k]] += gamma * q_target(k, static_cast<std::size_t>(best));
    }
    return targets;
}

// Greedy policy over a frozen parameter set (eval-mode forward, ε = 0).
inline Policy greedy_policy(NetworkParams& params) {
    auto buffer = std::make_shared<std::vector<double>>();
    NetworkParams* p = &params;
    return [p, buffer](const PolicyView& view) {
        const std::size_t tau = view.tau();
        buffer->resize(observation_dim(tau));
        materialize_observation(view.observation(), tau, buffer->data());
        double q[kNumActions];
        qvalues(*p, buffer->data(), q);
        return q[kActionLong] >= q[kActionShort] ? kActionLong : kActionShort;
    };
}

struct EpisodeStats {
    std::size_t episode = 0;
    Indicator train_sharpe;
    Indicator validation_sharpe;
    Indicator test_sharpe;
    double mean_loss = 0.0;
    double epsilon = 0.0;          // exploration rate at episode end
    std::string variant;           // augmented series trained on
};

struct TrainingRun {
    std::uint64_t seed = 0;
    std::vector<EpisodeStats> curve;
    NetworkParams best_params;     // checkpoint with the best validation Sharpe
    std::size_t best_episode = 0;
    Indicator best_validation_sharpe;
    NetworkParams final_params;
    NetworkParams final_target;
    AdamState adam;
    std::string rng_state;         // master rng at the end of training
    std::uint64_t env_steps = 0;
    std::uint64_t gradient_updates = 0;
    std::uint64_t replay_inserted = 0;
    std::size_t eps_violations = 0;
    std::size_t clamp_events = 0;
    bool stopped_early = false;
    double wall_seconds = 0.0;     // informational only, never serialized
    FeatureStats stats;            // normalization captured on the training set
};

using EpisodeLogger = std::function<void(const EpisodeStats&)>;

namespace detail {

inline Indicator trajectory_sharpe(const Trajectory& traj) {
    if (traj.records.size() < 2) return Indicator::undefined();
    return sharpe_ratio(daily_returns(value_curve(traj)));
}

struct EvalSlot {
    OhlcvSeries series;
    FeatureMatrix features;
    bool usable = false;
};

inline EvalSlot make_eval_slot(OhlcvSeries series, std::size_t filter_window,
                               const FeatureStats& stats, const EnvConfig& cfg) {
    EvalSlot slot;
    slot.series = std::move(series);
    if (slot.series.size() >= cfg.tau + filter_window + 2) {
        slot.features = make_features(slot.series, filter_window, stats);
        slot.usable = true;
    }
    return slot;
}

inline Indicator eval_sharpe(EvalSlot& slot, const EnvConfig& cfg, const Policy& policy) {
    if (!slot.usable) return Indicator::undefined();
    TrajectoryPair run = run_trajectory(slot.series, slot.features, cfg, policy);
    return trajectory_sharpe(run.main);
}

}  // namespace detail

// Algorithm core: double DQN over mirrored artificial trajectories, replay
// memory, ε-greedy exploration annealed per environment step, periodic hard
// target sync, per-episode greedy evaluation, early stopping on validation
// Sharpe.
inline TrainingRun train(const DatasetSplit& split, const EnvConfig& env_cfg,
                         const NetworkSpec& net_spec_in, const Hyperparams& hp,
                         std::uint64_t seed, const PipelineConfig& pipeline = {},
                         const EpisodeLogger& log = {}) {
    const auto wall_start = std::chrono::steady_clock::now();
    env_cfg.validate();
    hp.validate();
    pipeline.augment.validate();
    require(!split.train.empty(), "empty training series");

    NetworkSpec net_spec = net_spec_in;
    net_spec.input_dim = observation_dim(env_cfg.tau);
    net_spec.validate();

    const std::size_t w = pipeline.filter_window;
    const std::size_t warmup = env_cfg.tau + w;
    require(split.train.size() >= warmup + 2, "training series too short: need at least ",
            warmup + 2, " bars, have ", split.train.size());

    TrainingRun run;
    run.seed = seed;

    // Normalization is fitted once on the raw training series and reused for
    // every augmented variant and evaluation span.
    FeatureMatrix train_raw = compute_raw_features(split.train, w);
    run.stats = fit_stats(train_raw);

    AugmentResult augmented = augment(split.train, pipeline.augment, seed);
    std::vector<OhlcvSeries> variant_series = std::move(augmented.variants);
    std::vector<FeatureMatrix> variant_features;
    variant_features.reserve(variant_series.size());
    for (const OhlcvSeries& s : variant_series) {
        require(s.size() >= warmup + 2, "augmented variant '", s.name, "' too short");
        variant_features.push_back(make_features(s, w, run.stats));
    }

    // Greedy evaluation spans: full training series, validation suffix and
    // test span, the latter two with warm-up bars glued in front.
    detail::EvalSlot eval_train = detail::make_eval_slot(split.train, w, run.stats, env_cfg);
    detail::EvalSlot eval_val;
    if (!split.validation.empty() && split.train.size() >= split.validation.size()) {
        const std::size_t val_start = split.train.size() - split.validation.size();
        if (val_start >= warmup) {
            OhlcvSeries head = slice_by_index(split.train, 0, val_start);
            eval_val = detail::make_eval_slot(with_warmup(head, split.validation, warmup), w,
                                              run.stats, env_cfg);
        }
    }
    detail::EvalSlot eval_test;
    if (!split.test.empty())
        eval_test = detail::make_eval_slot(with_warmup(split.train, split.test, warmup), w,
                                           run.stats, env_cfg);

    NetworkParams params = init_xavier(net_spec, seed);
    NetworkParams target = params;
    AdamState adam = make_adam_state(params);
    ReplayMemory replay(hp.replay_capacity);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);

    Policy greedy = greedy_policy(params);

    double best_val = -std::numeric_limits<double>::infinity();
    bool has_best = false;
    std::size_t stale_checks = 0;
    std::uint64_t env_steps = 0;
    std::uint64_t updates = 0;

    std::vector<double> obs_buffer(net_spec.input_dim);
    Matrix batch_inputs;

    for (std::size_t episode = 0; episode < hp.episodes; ++episode) {
        const std::size_t variant_idx = episode % variant_series.size();
        Environment env(&variant_series[variant_idx], &variant_features[variant_idx], env_cfg);
        double loss_sum = 0.0;
        std::uint64_t loss_count = 0;

        while (!env.done()) {
            const ObsRef obs = env.obs_ref();
            materialize_observation(obs, env_cfg.tau, obs_buffer.data());
            double q[kNumActions];
            qvalues(params, obs_buffer.data(), q);
            const double eps = annealed_epsilon(hp, env_steps);
            const int action = select_action(q, eps, rng);

            // Opposite action on a copy of the same pre-state.
            Environment branch = env;
            const StepRecord mirror_rec = branch.step_action(1 - action);
            const StepRecord rec = env.step_action(action);
            const bool terminal = env.done();

            Experience main_exp;
            main_exp.features = obs.features;
            main_exp.t = static_cast<std::uint32_t>(obs.t);
            main_exp.position = static_cast<std::int8_t>(obs.position >= 0 ? 1 : -1);
            main_exp.next_position = static_cast<std::int8_t>(rec.shares >= 0 ? 1 : -1);
            main_exp.action = static_cast<std::int8_t>(action);
            main_exp.reward = rec.reward;
            main_exp.terminal = terminal;
            replay.push(main_exp);

            Experience mirror_exp = main_exp;
            mirror_exp.next_position = static_cast<std::int8_t>(mirror_rec.shares >= 0 ? 1 : -1);
            mirror_exp.action = static_cast<std::int8_t>(1 - action);
            mirror_exp.reward = mirror_rec.reward;
            replay.push(mirror_exp);

            ++env_steps;
            if (env_steps % hp.learn_every == 0 && replay.size() >= hp.batch_size) {
                const std::vector<Experience> batch = replay.sample(hp.batch_size, rng);
                const std::vector<double> targets =
                    compute_targets(batch, params, target, hp.gamma, env_cfg.tau);

                batch_inputs.resize(batch.size(), net_spec.input_dim);
                std::vector<int> actions(batch.size());
                for (std::size_t i = 0; i < batch.size(); ++i) {
                    materialize_observation(batch[i].obs(), env_cfg.tau, batch_inputs.row(i));
                    actions[i] = batch[i].action;
                }
                QLearningLossResult step_loss =
                    qlearning_loss(params, batch_inputs, actions, targets, rng);
                require(std::isfinite(step_loss.loss), "training loss became non-finite at update ",
                        updates, " (episode ", episode, ")");
                clip_gradients(step_loss.grads, hp.clip_threshold);
                adam_step(params, step_loss.grads, adam, hp.learning_rate);
                loss_sum += step_loss.loss;
                ++loss_count;
                ++updates;
                if (updates % hp.target_sync == 0) target = params;
            }
        }

        run.eps_violations += env.eps_violations();
        run.clamp_events += env.clamp_events();

        EpisodeStats stats;
        stats.episode = episode;
        stats.variant = variant_series[variant_idx].name;
        stats.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        stats.epsilon = annealed_epsilon(hp, env_steps);
        stats.train_sharpe = detail::eval_sharpe(eval_train, env_cfg, greedy);
        stats.validation_sharpe = detail::eval_sharpe(eval_val, env_cfg, greedy);
        stats.test_sharpe = detail::eval_sharpe(eval_test, env_cfg, greedy);
        run.curve.push_back(stats);
        if (log) log(stats);

        const double val = stats.validation_sharpe.value_or(
            -std::numeric_limits<double>::infinity());
        if (!has_best || val > best_val) {
            best_val = val;
            has_best = true;
            run.best_params = params;
            run.best_episode = episode;
            run.best_validation_sharpe = stats.validation_sharpe;
            stale_checks = 0;
        } else if (++stale_checks >= hp.patience) {
            run.stopped_early = true;
            break;
        }
    }

    if (!has_best) run.best_params = params;
    run.final_params = std::move(params);
    run.final_target = std::move(target);
    run.adam = std::move(adam);
    run.rng_state = rng.save_state();
    run.env_steps = env_steps;
    run.gradient_updates = updates;
    run.replay_inserted = replay.inserted();
    run.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return run;
}

// Greedy rollout of a frozen parameter set over one series.
struct EvaluationResult {
    Trajectory trajectory;
    PerformanceReport report;
};

inline EvaluationResult evaluate(NetworkParams params, const OhlcvSeries& series,
                                 const EnvConfig& cfg, std::size_t filter_window,
                                 const FeatureStats& stats) {
    require(params.spec.input_dim == observation_dim(cfg.tau),
            "checkpoint expects input dimension ", params.spec.input_dim,
            ", environment produces ", observation_dim(cfg.tau));
    FeatureMatrix features = make_features(series, filter_window, stats);
    Policy policy = greedy_policy(params);
    EvaluationResult result;
    result.trajectory = std::move(run_trajectory(series, features, cfg, policy).main);
    result.report = full_report(result.trajectory);
    return result;
}

// Per-episode aggregate over independently seeded runs.
struct CurvePoint {
    std::size_t episode = 0;
    double train_mean = 0.0, train_sd = 0.0;
    double test_mean = 0.0, test_sd = 0.0;
    std::size_t n = 0;  // runs that reached this episode with defined Sharpe
};

struct ExpectedPerformance {
    std::vector<CurvePoint> curve;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> failures;  // one message per failed run
    std::vector<TrainingRun> runs;      // completed runs, aligned with seeds minus failures
};

inline ExpectedPerformance expected_performance(const DatasetSplit& split,
                                                const EnvConfig& env_cfg,
                                                const NetworkSpec& net_spec,
                                                const Hyperparams& hp, std::uint64_t base_seed,
                                                std::size_t n_runs,
                                                const PipelineConfig& pipeline = {},
                                                const EpisodeLogger& log = {}) {
    require(n_runs >= 2, "expected-performance study needs at least 2 runs");
    ExpectedPerformance out;
    for (std::size_t i = 0; i < n_runs; ++i) {
        const std::uint64_t seed = base_seed + i;
        out.seeds.push_back(seed);
        try {
            out.runs.push_back(train(split, env_cfg, net_spec, hp, seed, pipeline, log));
        } catch (const std::exception& e) {
            out.failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
        }
    }
    require(!out.runs.empty(), "all runs failed; first failure: ",
            out.failures.empty() ? "(none)" : out.failures.front());

    std::size_t longest = 0;
    for (const TrainingRun& r : out.runs) longest = std::max(longest, r.curve.size());
    for (std::size_t e = 0; e < longest; ++e) {
        std::vector<double> train_vals, test_vals;
        for (const TrainingRun& r : out.runs) {
            if (e >= r.curve.size()) continue;
            if (r.curve[e].train_sharpe.defined() && r.curve[e].test_sharpe.defined()) {
                train_vals.push_back(r.curve[e].train_sharpe.value);
                test_vals.push_back(r.curve[e].test_sharpe.value);
            }
        }
        CurvePoint pt;
        pt.episode = e;
        pt.n = train_vals.size();
        if (!train_vals.empty()) {
            pt.train_mean = mean_of(train_vals);
            pt.test_mean = mean_of(test_vals);
            pt.train_sd = train_vals.size() >= 2 ? sample_sd(train_vals) : 0.0;
            pt.test_sd = test_vals.size() >= 2 ? sample_sd(test_vals) : 0.0;
        }
        out.curve.push_back(pt);
    }
    return out;
}

}  // namespace tdqn

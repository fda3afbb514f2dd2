// Command-line front end: fetch, train, backtest, expected, testbench,
// cost-sweep. Every command resolves one RunConfig (defaults, then config
// file, then flags), works from it alone and writes a manifest next to its
// outputs so the run can be reproduced bit for bit.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdqn/agent.hpp"
#include "tdqn/checkpoint.hpp"
#include "tdqn/config.hpp"
#include "tdqn/svg_plot.hpp"

namespace {

using namespace tdqn;

int g_verbosity = 1;

void info(const std::string& msg) {
    if (g_verbosity >= 1) std::fprintf(stderr, "%s\n", msg.c_str());
}

void debug(const std::string& msg) {
    if (g_verbosity >= 2) std::fprintf(stderr, "%s\n", msg.c_str());
}

// Options whose presence on the command line matters beyond their value.
struct FlagPresence {
    CLI::Option* output = nullptr;
    CLI::Option* cost_rate = nullptr;
    CLI::Option* epsilon_bound = nullptr;
    CLI::Option* initial_cash = nullptr;
    CLI::Option* tau = nullptr;
};

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

OhlcvSeries load_data(const RunConfig& cfg) {
    LoadResult loaded =
        load_series(cfg.resolved_source(), cfg.ticker, cfg.start, cfg.end, cfg.http);
    for (const std::string& w : loaded.warnings) info("warning: " + w);
    info(cfg.ticker + ": " + std::to_string(loaded.series.size()) + " bars, " +
         to_string(loaded.series.bars.front().date) + " to " +
         to_string(loaded.series.bars.back().date));
    return std::move(loaded.series);
}

void print_report(const PerformanceReport& report) {
    const auto& names = indicator_names();
    const auto vals = report.ordered();
    for (std::size_t i = 0; i < names.size(); ++i)
        std::printf("  %-26s %s\n", names[i].c_str(), vals[i]->text().c_str());
}

std::string episode_line(const EpisodeStats& e, std::size_t total) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "[ep %3zu/%zu] loss=%.6f eps=%.3f train=%s val=%s test=%s  (%s)",
                  e.episode + 1, total, e.mean_loss, e.epsilon, e.train_sharpe.text().c_str(),
                  e.validation_sharpe.text().c_str(), e.test_sharpe.text().c_str(),
                  e.variant.c_str());
    return buf;
}

std::string curve_csv(const std::vector<EpisodeStats>& curve) {
    std::string out = "episode,variant,epsilon,mean_loss,train_sharpe,validation_sharpe,test_sharpe\n";
    for (const EpisodeStats& e : curve) {
        out += std::to_string(e.episode) + ',' + e.variant + ',' + format_double(e.epsilon) +
               ',' + format_double(e.mean_loss) + ',' + e.train_sharpe.text() + ',' +
               e.validation_sharpe.text() + ',' + e.test_sharpe.text() + '\n';
    }
    return out;
}

json curve_json(const std::vector<EpisodeStats>& curve) {
    json arr = json::array();
    for (const EpisodeStats& e : curve) arr.push_back(to_json(e));
    return arr;
}

// Test-period series with warm-up history glued in front, so the first
// tradable day is the first test day.
OhlcvSeries test_eval_series(const DatasetSplit& split, const EnvConfig& env,
                             std::size_t filter_window) {
    require(!split.test.empty(), "no test data after the train-end date");
    return with_warmup(split.train, split.test, env.tau + filter_window);
}

void write_backtest_outputs(const std::string& dir, const EvaluationResult& result,
                            const std::string& title) {
    ensure_dir(dir);
    write_file(join_path(dir, "report.json"), dump_json(report_to_json(result.report)));
    write_file(join_path(dir, "trajectory.csv"), write_trajectory_csv(result.trajectory));
    write_file(join_path(dir, "plot.svg"), plot_trajectory_svg(result.trajectory, title));
}

// Benchmark rollout on the test span; the normalization statistics are fitted
// on the training span even though the classical policies ignore features.
EvaluationResult run_benchmark(const RunConfig& cfg, const DatasetSplit& split) {
    const StrategySpec spec = cfg.strategy_spec();
    const std::size_t w = cfg.pipeline.filter_window;
    FeatureStats stats = fit_stats(compute_raw_features(split.train, w));
    OhlcvSeries eval_series = test_eval_series(split, cfg.env, w);
    FeatureMatrix features = make_features(eval_series, w, stats);
    EvaluationResult result;
    result.trajectory =
        std::move(run_trajectory(eval_series, features, cfg.env, make_policy(spec)).main);
    result.report = full_report(result.trajectory);
    return result;
}

// ---- fetch ----

int cmd_fetch(const RunConfig& cfg, const FlagPresence& flags) {
    OhlcvSeries series = load_data(cfg);
    std::string path = join_path(cfg.data_dir, cfg.ticker + ".csv");
    if (flags.output->count() > 0) {
        const std::string& out = cfg.output_dir;
        path = out.size() > 4 && out.substr(out.size() - 4) == ".csv"
                   ? out
                   : join_path(out, cfg.ticker + ".csv");
    }
    const std::string parent = std::filesystem::path(path).parent_path().string();
    if (!parent.empty()) ensure_dir(parent);
    save_csv_file(series, path);
    info("wrote " + path + " (fingerprint " + hex64(fingerprint(series)) + ")");
    return 0;
}

// ---- train ----

int cmd_train(const RunConfig& cfg) {
    require(cfg.strategy == "tdqn", "train only applies to the tdqn strategy");
    OhlcvSeries series = load_data(cfg);
    DatasetSplit split = split_series(series, cfg.train_end, cfg.validation_fraction);
    debug("split: train=" + std::to_string(split.train.size()) +
          " validation=" + std::to_string(split.validation.size()) +
          " test=" + std::to_string(split.test.size()));

    EpisodeLogger logger = [&](const EpisodeStats& e) { info(episode_line(e, cfg.hp.episodes)); };
    TrainingRun run = train(split, cfg.env, cfg.net, cfg.hp, cfg.seed, cfg.pipeline, logger);
    info("training done: " + std::to_string(run.curve.size()) + " episodes, best validation " +
         run.best_validation_sharpe.text() + " at episode " + std::to_string(run.best_episode) +
         (run.stopped_early ? " (stopped early)" : ""));
    char timing[64];
    std::snprintf(timing, sizeof(timing), "wall time %.1fs", run.wall_seconds);
    debug(timing);

    ensure_dir(cfg.output_dir);

    Checkpoint ckpt;
    ckpt.params = run.best_params;
    ckpt.target = run.final_target;
    ckpt.adam = run.adam;
    ckpt.rng_state = run.rng_state;
    ckpt.env = cfg.env;
    ckpt.filter_window = cfg.pipeline.filter_window;
    ckpt.stats = run.stats;
    ckpt.seed = cfg.seed;
    ckpt.data_fingerprint = fingerprint(series);
    const std::string ckpt_path = join_path(cfg.output_dir, "checkpoint.bin");
    save_checkpoint(ckpt, ckpt_path);

    write_file(join_path(cfg.output_dir, "curve.csv"), curve_csv(run.curve));

    json results{{"episodes", run.curve.size()},
                 {"best_episode", run.best_episode},
                 {"best_validation_sharpe", to_json(run.best_validation_sharpe)},
                 {"stopped_early", run.stopped_early},
                 {"env_steps", run.env_steps},
                 {"gradient_updates", run.gradient_updates},
                 {"replay_inserted", run.replay_inserted},
                 {"eps_violations", run.eps_violations},
                 {"clamp_events", run.clamp_events},
                 {"curve", curve_json(run.curve)}};

    if (!split.test.empty()) {
        EvaluationResult eval =
            evaluate(ckpt.params, test_eval_series(split, cfg.env, cfg.pipeline.filter_window),
                     cfg.env, cfg.pipeline.filter_window, run.stats);
        write_backtest_outputs(cfg.output_dir, eval, cfg.ticker + " tdqn");
        results["test_report"] = report_to_json(eval.report);
        std::printf("test performance (%s, tdqn):\n", cfg.ticker.c_str());
        print_report(eval.report);
    }

    write_file(join_path(cfg.output_dir, "manifest.json"),
               dump_json(manifest_json("train", cfg, data_summary_json(series), results)));
    info("wrote " + cfg.output_dir + "/{manifest.json, checkpoint.bin, curve.csv}");
    return 0;
}

// ---- backtest ----

int cmd_backtest(RunConfig cfg, const FlagPresence& flags) {
    OhlcvSeries series = load_data(cfg);
    DatasetSplit split = split_series(series, cfg.train_end, cfg.validation_fraction);

    EvaluationResult result;
    if (cfg.strategy == "tdqn") {
        require(!cfg.checkpoint.empty(), "tdqn backtest needs --checkpoint");
        Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
        EnvConfig env = ckpt.env;
        if (flags.cost_rate->count() > 0) env.cost_rate = cfg.env.cost_rate;
        if (flags.epsilon_bound->count() > 0) env.epsilon_bound = cfg.env.epsilon_bound;
        if (flags.initial_cash->count() > 0) env.initial_cash = cfg.env.initial_cash;
        if (flags.tau->count() > 0) env.tau = cfg.env.tau;
        cfg.env = env;
        cfg.pipeline.filter_window = ckpt.filter_window;
        if (ckpt.data_fingerprint != fingerprint(series))
            info("warning: data fingerprint differs from the checkpoint's training data");
        result = evaluate(ckpt.params, test_eval_series(split, env, ckpt.filter_window), env,
                          ckpt.filter_window, ckpt.stats);
    } else {
        result = run_benchmark(cfg, split);
    }

    write_backtest_outputs(cfg.output_dir, result, cfg.ticker + " " + cfg.strategy);
    json results{{"report", report_to_json(result.report)},
                 {"steps", result.trajectory.steps()},
                 {"final_value", result.trajectory.final_value()}};
    write_file(join_path(cfg.output_dir, "manifest.json"),
               dump_json(manifest_json("backtest", cfg, data_summary_json(series), results)));

    std::printf("test performance (%s, %s):\n", cfg.ticker.c_str(), cfg.strategy.c_str());
    print_report(result.report);
    info("wrote " + cfg.output_dir + "/{manifest.json, report.json, trajectory.csv, plot.svg}");
    return 0;
}

// ---- expected ----

int cmd_expected(const RunConfig& cfg) {
    require(cfg.strategy == "tdqn", "expected only applies to the tdqn strategy");
    require(cfg.runs >= 2, "expected needs --runs of at least 2");
    OhlcvSeries series = load_data(cfg);
    DatasetSplit split = split_series(series, cfg.train_end, cfg.validation_fraction);

    std::size_t done = 0;
    EpisodeLogger logger = [&](const EpisodeStats& e) {
        debug("run " + std::to_string(done + 1) + " " + episode_line(e, cfg.hp.episodes));
    };
    ExpectedPerformance perf;
    {
        // Per-run progress at normal verbosity, per-episode detail at debug.
        ExpectedPerformance tmp = expected_performance(split, cfg.env, cfg.net, cfg.hp, cfg.seed,
                                                       cfg.runs, cfg.pipeline, logger);
        perf = std::move(tmp);
        done = perf.runs.size();
    }
    for (const std::string& f : perf.failures) info("run failed: " + f);
    info(std::to_string(perf.runs.size()) + "/" + std::to_string(cfg.runs) + " runs completed");

    ensure_dir(cfg.output_dir);
    json curve = json::array();
    std::string csv = "episode,n,train_mean,train_sd,test_mean,test_sd\n";
    ExpectedCurveView train_view, test_view;
    for (const CurvePoint& p : perf.curve) {
        curve.push_back(to_json(p));
        csv += std::to_string(p.episode) + ',' + std::to_string(p.n) + ',' +
               format_double(p.train_mean) + ',' + format_double(p.train_sd) + ',' +
               format_double(p.test_mean) + ',' + format_double(p.test_sd) + '\n';
        train_view.mean.push_back(p.train_mean);
        train_view.lo.push_back(p.train_mean - p.train_sd);
        train_view.hi.push_back(p.train_mean + p.train_sd);
        test_view.mean.push_back(p.test_mean);
        test_view.lo.push_back(p.test_mean - p.test_sd);
        test_view.hi.push_back(p.test_mean + p.test_sd);
    }
    json runs = json::array();
    for (const TrainingRun& r : perf.runs)
        runs.push_back(json{{"seed", r.seed},
                            {"episodes", r.curve.size()},
                            {"best_episode", r.best_episode},
                            {"best_validation_sharpe", to_json(r.best_validation_sharpe)},
                            {"stopped_early", r.stopped_early}});
    json results{{"curve", curve},
                 {"seeds", perf.seeds},
                 {"failures", perf.failures},
                 {"runs", runs}};

    write_file(join_path(cfg.output_dir, "expected.json"), dump_json(results));
    write_file(join_path(cfg.output_dir, "expected.csv"), csv);
    write_file(join_path(cfg.output_dir, "expected.svg"),
               plot_expected_svg(train_view, test_view,
                                 cfg.ticker + " expected Sharpe, " +
                                     std::to_string(perf.runs.size()) + " runs"));
    write_file(join_path(cfg.output_dir, "manifest.json"),
               dump_json(manifest_json("expected", cfg, data_summary_json(series), results)));
    info("wrote " + cfg.output_dir + "/{manifest.json, expected.json, expected.csv, expected.svg}");

    if (!perf.curve.empty()) {
        const CurvePoint& last = perf.curve.back();
        std::printf("final episode %zu over %zu runs: train %s +- %s, test %s +- %s\n",
                    last.episode, last.n, format_double(last.train_mean).c_str(),
                    format_double(last.train_sd).c_str(), format_double(last.test_mean).c_str(),
                    format_double(last.test_sd).c_str());
    }
    return 0;
}

// ---- testbench ----

int cmd_testbench(const RunConfig& cfg) {
    std::vector<TestbenchEntry> instruments = cfg.testbench_file.empty()
                                                  ? default_testbench()
                                                  : load_testbench_file(cfg.testbench_file);
    std::vector<std::string> strategies = {"buy-hold", "sell-hold", "trend-following",
                                           "mean-reversion"};
    if (cfg.testbench_with_tdqn) strategies.push_back("tdqn");

    ensure_dir(cfg.output_dir);
    std::string csv = "instrument,strategy";
    for (const std::string& n : indicator_names()) csv += ',' + n;
    csv += '\n';

    // Per strategy, mean over instruments of each finite indicator.
    struct Accum {
        std::array<double, 9> sum{};
        std::array<std::size_t, 9> n{};
    };
    std::vector<Accum> accum(strategies.size());
    json data_used = json::array();
    std::vector<std::string> skipped;

    for (const TestbenchEntry& inst : instruments) {
        RunConfig local = cfg;
        local.ticker = inst.ticker;
        OhlcvSeries series;
        DatasetSplit split;
        try {
            series = load_data(local);
            split = split_series(series, local.train_end, local.validation_fraction);
            require(!split.test.empty(), "no test data");
        } catch (const Error& e) {
            info("skipping " + inst.ticker + ": " + e.what());
            skipped.push_back(inst.ticker + ": " + e.what());
            continue;
        }
        data_used.push_back(data_summary_json(series));

        for (std::size_t s = 0; s < strategies.size(); ++s) {
            local.strategy = strategies[s];
            PerformanceReport report;
            if (strategies[s] == "tdqn") {
                TrainingRun run = train(split, local.env, local.net, local.hp,
                                        local.seed, local.pipeline, {});
                report = evaluate(run.best_params,
                                  test_eval_series(split, local.env, local.pipeline.filter_window),
                                  local.env, local.pipeline.filter_window, run.stats)
                             .report;
            } else {
                report = run_benchmark(local, split).report;
            }
            csv += inst.ticker + ',' + strategies[s] + ',' + report_csv_cells(report) + '\n';
            const auto vals = report.ordered();
            for (std::size_t i = 0; i < vals.size(); ++i) {
                if (!vals[i]->defined()) continue;
                accum[s].sum[i] += vals[i]->value;
                ++accum[s].n[i];
            }
            info(inst.ticker + " " + strategies[s] + ": sharpe " + report.sharpe.text());
        }
    }

    for (std::size_t s = 0; s < strategies.size(); ++s) {
        csv += "Average," + strategies[s];
        for (std::size_t i = 0; i < 9; ++i)
            csv += ',' + (accum[s].n[i] > 0
                              ? format_double(accum[s].sum[i] / static_cast<double>(accum[s].n[i]))
                              : std::string("undefined"));
        csv += '\n';
    }

    write_file(join_path(cfg.output_dir, "testbench.csv"), csv);
    json results{{"instruments", instruments.size()},
                 {"skipped", skipped},
                 {"strategies", strategies}};
    write_file(join_path(cfg.output_dir, "manifest.json"),
               dump_json(manifest_json("testbench", cfg, data_used, results)));
    info("wrote " + cfg.output_dir + "/{manifest.json, testbench.csv}");
    return skipped.size() == instruments.size() ? 1 : 0;
}

// ---- cost sweep ----

std::string cost_label(double c) {
    std::string s = format_double(c);
    for (char& ch : s)
        if (ch == '.') ch = 'p';
    return s;
}

int cmd_cost_sweep(const RunConfig& cfg) {
    OhlcvSeries series = load_data(cfg);
    DatasetSplit split = split_series(series, cfg.train_end, cfg.validation_fraction);
    ensure_dir(cfg.output_dir);

    std::string csv = "cost_rate";
    for (const std::string& n : indicator_names()) csv += ',' + n;
    csv += '\n';
    std::vector<double> costs_done, sharpe_values;
    json per_cost = json::array();

    for (double c : cfg.sweep_costs) {
        RunConfig local = cfg;
        local.env.cost_rate = c;
        local.output_dir = join_path(cfg.output_dir, "cost_" + cost_label(c));
        info("cost rate " + format_double(c));

        EvaluationResult result;
        if (cfg.strategy == "tdqn") {
            TrainingRun run = train(split, local.env, local.net, local.hp, local.seed,
                                    local.pipeline, {});
            result = evaluate(run.best_params,
                              test_eval_series(split, local.env, local.pipeline.filter_window),
                              local.env, local.pipeline.filter_window, run.stats);
        } else {
            result = run_benchmark(local, split);
        }
        write_backtest_outputs(local.output_dir, result,
                               cfg.ticker + " " + cfg.strategy + " C=" + format_double(c));
        csv += format_double(c) + ',' + report_csv_cells(result.report) + '\n';
        per_cost.push_back(json{{"cost_rate", c}, {"report", report_to_json(result.report)}});
        costs_done.push_back(c);
        sharpe_values.push_back(result.report.sharpe.value_or(0.0));
        info("  sharpe " + result.report.sharpe.text());
    }

    write_file(join_path(cfg.output_dir, "sweep.csv"), csv);
    write_file(join_path(cfg.output_dir, "sweep.svg"),
               plot_cost_sweep_svg(costs_done, sharpe_values,
                                   cfg.ticker + " " + cfg.strategy + " vs trading cost"));
    json results{{"sweep", per_cost}};
    write_file(join_path(cfg.output_dir, "manifest.json"),
               dump_json(manifest_json("cost-sweep", cfg, data_summary_json(series), results)));
    info("wrote " + cfg.output_dir + "/{manifest.json, sweep.csv, sweep.svg}");
    return 0;
}

std::optional<std::string> find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        if (auto path = find_config_arg(argc, argv)) cfg = load_config_file(*path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    CLI::App app{"tdqn: deep Q-network stock trading"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    FlagPresence flags;
    app.add_option("--config", config_path, "JSON config file, applied before other flags");
    app.add_option("--data-dir", cfg.data_dir, "directory holding <ticker>.csv files");
    app.add_option("--source", cfg.source,
                   "data source template; {ticker}/{start}/{end} are substituted");
    app.add_option("--ticker", cfg.ticker, "instrument symbol");
    auto add_date = [&](const char* name, Date& target, const char* desc) {
        app.add_option_function<std::string>(
               name, [&target](const std::string& s) { target = parse_date(s); }, desc)
            ->check([](const std::string& s) -> std::string {
                try {
                    parse_date(s);
                    return {};
                } catch (const std::exception& e) {
                    return e.what();
                }
            });
    };
    add_date("--start", cfg.start, "first bar date (YYYY-MM-DD)");
    add_date("--train-end", cfg.train_end, "last training bar date");
    add_date("--end", cfg.end, "last bar date");
    app.add_option("--validation-fraction", cfg.validation_fraction,
                   "trailing fraction of the training span used for validation");
    flags.cost_rate = app.add_option("--cost-rate", cfg.env.cost_rate, "trading cost rate C");
    flags.epsilon_bound =
        app.add_option("--epsilon-bound", cfg.env.epsilon_bound, "assumed max daily move");
    flags.initial_cash = app.add_option("--initial-cash", cfg.env.initial_cash, "starting cash");
    flags.tau = app.add_option("--tau", cfg.env.tau, "observation history length");
    app.add_option("--episodes", cfg.hp.episodes, "training episodes");
    app.add_option("--learning-rate", cfg.hp.learning_rate, "ADAM learning rate");
    app.add_option("--gamma", cfg.hp.gamma, "discount factor");
    app.add_option("--batch-size", cfg.hp.batch_size, "replay batch size");
    app.add_option("--patience", cfg.hp.patience, "early-stopping patience");
    app.add_option("--hidden", cfg.net.hidden, "hidden layer sizes")->delimiter(',');
    app.add_option("--filter-window", cfg.pipeline.filter_window, "smoothing window");
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--runs", cfg.runs, "independent runs for expected");
    app.add_option("--strategy", cfg.strategy,
                   "tdqn, buy-hold, sell-hold, trend-following or mean-reversion");
    app.add_option("--ma-short", cfg.ma_short, "short moving-average window");
    app.add_option("--ma-long", cfg.ma_long, "long moving-average window");
    app.add_option("--checkpoint", cfg.checkpoint, "checkpoint file for tdqn backtests");
    flags.output = app.add_option("--output", cfg.output_dir, "output directory");
    app.add_option("--costs", cfg.sweep_costs, "cost rates for cost-sweep")->delimiter(',');
    app.add_option("--testbench-file", cfg.testbench_file, "JSON list of instruments");
    app.add_flag("--with-tdqn", cfg.testbench_with_tdqn, "include tdqn in the testbench");
    app.add_flag_callback("-q,--quiet", [] { g_verbosity = 0; }, "suppress progress output");
    app.add_flag_callback("-v,--verbose", [] { g_verbosity = 2; }, "per-step detail");

    CLI::App* sub_fetch = app.add_subcommand("fetch", "download or copy data to canonical CSV");
    CLI::App* sub_train = app.add_subcommand("train", "train one agent and write a checkpoint");
    CLI::App* sub_backtest =
        app.add_subcommand("backtest", "evaluate a strategy on the test period");
    CLI::App* sub_expected =
        app.add_subcommand("expected", "aggregate Sharpe curves over independent runs");
    CLI::App* sub_testbench =
        app.add_subcommand("testbench", "run every strategy over the instrument list");
    CLI::App* sub_sweep = app.add_subcommand("cost-sweep", "repeat a strategy across cost rates");

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.validate(!sub_fetch->parsed());
        if (sub_fetch->parsed()) return cmd_fetch(cfg, flags);
        if (sub_train->parsed()) return cmd_train(cfg);
        if (sub_backtest->parsed()) return cmd_backtest(cfg, flags);
        if (sub_expected->parsed()) return cmd_expected(cfg);
        if (sub_testbench->parsed()) return cmd_testbench(cfg);
        if (sub_sweep->parsed()) return cmd_cost_sweep(cfg);
        std::fprintf(stderr, "error: no command given\n");
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
}

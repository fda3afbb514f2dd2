#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include "tdqn/data_source.hpp"
#include "tdqn/fsutil.hpp"
#include "tdqn/json_io.hpp"

namespace tdqn {

inline constexpr const char* kDataDirEnvVar = "TDQN_DATA_DIR";

// Fully resolved settings for one command invocation: config-file values
// overridden by flags, everything else at documented defaults. The manifest
// of every run embeds this verbatim.
struct RunConfig {
    std::string data_dir;                 // $TDQN_DATA_DIR, else "data"
    std::string source = "{ticker}.csv";  // path or http template
    std::string ticker = "AAPL";
    Date start{2012, 1, 1};
    Date train_end{2017, 12, 31};
    Date end{2019, 12, 31};
    double validation_fraction = 0.2;
    HttpConfig http;
    EnvConfig env;
    PipelineConfig pipeline;
    NetworkSpec net;
    Hyperparams hp;
    std::string strategy = "tdqn";  // tdqn or a benchmark name
    std::size_t ma_short = 5;
    std::size_t ma_long = 20;
    std::string checkpoint;         // backtest input
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    std::size_t runs = 50;
    std::vector<double> sweep_costs = {0.0, 0.001, 0.002};
    std::string testbench_file;     // empty = built-in list
    bool testbench_with_tdqn = false;
    int verbosity = 1;

    RunConfig() {
        net.hidden = {512, 512, 512, 512, 512};
        if (const char* dir = std::getenv(kDataDirEnvVar); dir && *dir)
            data_dir = dir;
        else
            data_dir = "data";
    }

    // Source template resolved against the data directory.
    std::string resolved_source() const {
        if (is_http_source(source) || source.empty() || source.front() == '/') return source;
        return join_path(data_dir, source);
    }

    // needs_split is false for commands that never partition the data.
    void validate(bool needs_split = true) const {
        std::vector<std::string> problems;
        auto check = [&](auto&& fn) {
            try {
                fn();
            } catch (const Error& e) {
                problems.push_back(e.what());
            }
        };
        check([&] { env.validate(); });
        check([&] { hp.validate(); });
        check([&] {
            NetworkSpec probe = net;
            probe.input_dim = observation_dim(env.tau);
            probe.validate();
        });
        check([&] { pipeline.augment.validate(); });
        check([&] {
            require(pipeline.filter_window >= 1, "filter window must be at least 1");
        });
        check([&] {
            require(validation_fraction > 0.0 && validation_fraction < 1.0,
                    "validation fraction must be in (0, 1), got ", validation_fraction);
        });
        check([&] {
            require(!(end < start), "data end before data start");
            if (!needs_split) return;
            require(!(train_end < start), "train end before data start");
            require(train_end < end, "train end must precede data end");
        });
        check([&] {
            if (strategy != "tdqn") parse_strategy(strategy);
        });
        check([&] {
            require(ma_short >= 1 && ma_short < ma_long,
                    "moving-average windows must satisfy 1 <= short < long");
        });
        check([&] { require(runs >= 1, "runs must be at least 1"); });
        check([&] {
            require(!sweep_costs.empty(), "cost sweep needs at least one cost rate");
            for (double c : sweep_costs) require(c >= 0.0, "cost rates must be non-negative");
        });
        raise_config_problems(problems);
    }

    StrategySpec strategy_spec() const {
        StrategySpec spec;
        spec.kind = parse_strategy(strategy);
        spec.short_window = ma_short;
        spec.long_window = ma_long;
        return spec;
    }
};

inline json config_to_json(const RunConfig& c) {
    return json{{"data_dir", c.data_dir},
                {"source", c.source},
                {"ticker", c.ticker},
                {"start", to_string(c.start)},
                {"train_end", to_string(c.train_end)},
                {"end", to_string(c.end)},
                {"validation_fraction", c.validation_fraction},
                {"http", json{{"timeout_seconds", c.http.timeout_seconds},
                              {"retries", c.http.retries}}},
                {"env", to_json(c.env)},
                {"pipeline", to_json(c.pipeline)},
                {"net", to_json(c.net)},
                {"hyperparams", to_json(c.hp)},
                {"strategy", c.strategy},
                {"ma_short", c.ma_short},
                {"ma_long", c.ma_long},
                {"checkpoint", c.checkpoint},
                {"output_dir", c.output_dir},
                {"seed", c.seed},
                {"runs", c.runs},
                {"sweep_costs", c.sweep_costs},
                {"testbench_file", c.testbench_file},
                {"testbench_with_tdqn", c.testbench_with_tdqn}};
}

inline void config_from_json(const json& j, RunConfig& c) {
    ConfigReader r(j, "config");
    r.read("data_dir", c.data_dir);
    r.read("source", c.source);
    r.read("ticker", c.ticker);
    r.read_date("start", c.start);
    r.read_date("train_end", c.train_end);
    r.read_date("end", c.end);
    r.read("validation_fraction", c.validation_fraction);
    r.read("strategy", c.strategy);
    r.read("ma_short", c.ma_short);
    r.read("ma_long", c.ma_long);
    r.read("checkpoint", c.checkpoint);
    r.read("output_dir", c.output_dir);
    r.read("seed", c.seed);
    r.read("runs", c.runs);
    r.read("sweep_costs", c.sweep_costs);
    r.read("testbench_file", c.testbench_file);
    r.read("testbench_with_tdqn", c.testbench_with_tdqn);

    std::vector<std::string> problems;
    if (j.contains("http")) {
        const json http = r.child("http");
        ConfigReader h(http, "config.http");
        h.read("timeout_seconds", c.http.timeout_seconds);
        h.read("retries", c.http.retries);
        h.finish();
        r.absorb(h.problems());
    }
    if (j.contains("env")) r.absorb(env_from_json(r.child("env"), c.env, "config.env"));
    if (j.contains("pipeline"))
        r.absorb(pipeline_from_json(r.child("pipeline"), c.pipeline, "config.pipeline"));
    if (j.contains("net")) r.absorb(net_from_json(r.child("net"), c.net, "config.net"));
    if (j.contains("hyperparams"))
        r.absorb(hp_from_json(r.child("hyperparams"), c.hp, "config.hyperparams"));
    r.finish();
    raise_config_problems(r.problems());
}

inline RunConfig load_config_file(const std::string& path) {
    RunConfig c;
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail("config file ", path, ": ", e.what());
    }
    config_from_json(j, c);
    return c;
}

// ---- Testbench instrument list (Table 2 of the reference results) ----

struct TestbenchEntry {
    std::string ticker;
    std::string display_name;
    std::string region;
    std::string sector;
};

inline std::vector<TestbenchEntry> default_testbench() {
    return {
        {"DIA", "Dow Jones (DIA)", "American", "Index"},
        {"SPY", "S&P 500 (SPY)", "American", "Index"},
        {"QQQ", "NASDAQ 100 (QQQ)", "American", "Index"},
        {"EZU", "FTSE 100 (EZU)", "European", "Index"},
        {"EWJ", "Nikkei 225 (EWJ)", "Asian", "Index"},
        {"GOOGL", "Google (GOOGL)", "American", "Technology"},
        {"AAPL", "Apple (AAPL)", "American", "Technology"},
        {"FB", "Facebook (FB)", "American", "Technology"},
        {"AMZN", "Amazon (AMZN)", "American", "Technology"},
        {"MSFT", "Microsoft (MSFT)", "American", "Technology"},
        {"TWTR", "Twitter (TWTR)", "American", "Technology"},
        {"NOK", "Nokia (NOK)", "European", "Technology"},
        {"PHIA.AS", "Philips (PHIA.AS)", "European", "Technology"},
        {"SIE.DE", "Siemens (SIE.DE)", "European", "Technology"},
        {"BIDU", "Baidu (BIDU)", "Asian", "Technology"},
        {"BABA", "Alibaba (BABA)", "Asian", "Technology"},
        {"0700.HK", "Tencent (0700.HK)", "Asian", "Technology"},
        {"6758.T", "Sony (6758.T)", "Asian", "Technology"},
        {"JPM", "JPMorgan Chase (JPM)", "American", "Financial services"},
        {"HSBC", "HSBC (HSBC)", "European", "Financial services"},
        {"0939.HK", "CCB (0939.HK)", "Asian", "Financial services"},
        {"XOM", "ExxonMobil (XOM)", "American", "Energy"},
        {"RDSA.AS", "Shell (RDSA.AS)", "European", "Energy"},
        {"PTR", "PetroChina (PTR)", "Asian", "Energy"},
        {"TSLA", "Tesla (TSLA)", "American", "Automotive"},
        {"VOW3.DE", "Volkswagen (VOW3.DE)", "European", "Automotive"},
        {"7203.T", "Toyota (7203.T)", "Asian", "Automotive"},
        {"KO", "Coca Cola (KO)", "American", "Food"},
        {"ABI.BR", "AB InBev (ABI.BR)", "European", "Food"},
        {"2503.T", "Kirin (2503.T)", "Asian", "Food"},
    };
}

inline std::vector<TestbenchEntry> load_testbench_file(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail("testbench file ", path, ": ", e.what());
    }
    require(j.is_array(), "testbench file must be a JSON array");
    std::vector<TestbenchEntry> out;
    for (const json& row : j) {
        TestbenchEntry e;
        require(row.contains("ticker"), "testbench entry missing 'ticker'");
        e.ticker = row.at("ticker").get<std::string>();
        e.display_name = row.value("name", e.ticker);
        e.region = row.value("region", "");
        e.sector = row.value("sector", "");
        out.push_back(e);
    }
    require(!out.empty(), "testbench file lists no instruments");
    return out;
}

// ---- Manifest assembly ----

inline json data_summary_json(const OhlcvSeries& series) {
    return json{{"name", series.name},
                {"rows", series.size()},
                {"first_date", series.empty() ? "" : to_string(series.bars.front().date)},
                {"last_date", series.empty() ? "" : to_string(series.bars.back().date)},
                {"fingerprint", hex64(fingerprint(series))}};
}

// Wall-clock and host facts are deliberately absent: rerunning a command
// with the same config and seed must reproduce this file byte for byte.
inline json manifest_json(const std::string& command, const RunConfig& config,
                          const json& data_summary, const json& results) {
    return json{{"command", command},
                {"config", config_to_json(config)},
                {"data", data_summary},
                {"results", results}};
}

}  // namespace tdqn

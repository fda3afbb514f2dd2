#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <set>
#include <string>

#include "tdqn/config.hpp"

using namespace tdqn;
using Catch::Matchers::ContainsSubstring;

namespace {

// Keeps the data-dir environment variable out of the assertions and restores
// whatever the test runner had set.
class EnvVarGuard {
public:
    explicit EnvVarGuard(const char* name) : name_(name) {
        const char* v = std::getenv(name);
        if (v) saved_ = v;
        had_ = v != nullptr;
    }
    ~EnvVarGuard() {
        if (had_)
            setenv(name_, saved_.c_str(), 1);
        else
            unsetenv(name_);
    }

private:
    const char* name_;
    std::string saved_;
    bool had_ = false;
};

OhlcvSeries tiny_series() {
    OhlcvSeries s;
    s.name = "TS";
    for (int i = 0; i < 5; ++i) {
        Bar b;
        b.date = Date{2018, 3, 1 + i};
        b.open = b.high = b.low = b.close = 50.0 + i;
        b.volume = 100.0;
        s.bars.push_back(b);
    }
    return s;
}

}  // namespace

TEST_CASE("run config defaults") {
    EnvVarGuard guard(kDataDirEnvVar);
    unsetenv(kDataDirEnvVar);
    RunConfig c;
    CHECK(c.data_dir == "data");
    CHECK(c.ticker == "AAPL");
    CHECK(to_string(c.start) == "2012-01-01");
    CHECK(to_string(c.train_end) == "2017-12-31");
    CHECK(to_string(c.end) == "2019-12-31");
    CHECK(c.validation_fraction == 0.2);
    CHECK(c.net.hidden == std::vector<std::size_t>(5, 512));
    CHECK(c.env.tau == 30);
    CHECK(c.env.cost_rate == 0.001);
    CHECK(c.hp.gamma == 0.4);
    CHECK(c.strategy == "tdqn");
    CHECK(c.seed == 1);
    CHECK(c.sweep_costs == std::vector<double>{0.0, 0.001, 0.002});
    CHECK_NOTHROW(c.validate());

    setenv(kDataDirEnvVar, "/srv/bars", 1);
    RunConfig d;
    CHECK(d.data_dir == "/srv/bars");
}

TEST_CASE("source resolution joins the data directory for bare names") {
    RunConfig c;
    c.data_dir = "bars";
    c.source = "{ticker}.csv";
    CHECK(c.resolved_source() == "bars/{ticker}.csv");
    c.source = "/abs/path.csv";
    CHECK(c.resolved_source() == "/abs/path.csv");
    c.source = "http://host:1234/{ticker}";
    CHECK(c.resolved_source() == "http://host:1234/{ticker}");
}

TEST_CASE("config json survives a round trip") {
    RunConfig c;
    c.data_dir = "elsewhere";
    c.ticker = "MSFT";
    c.start = Date{2010, 6, 1};
    c.train_end = Date{2015, 6, 1};
    c.end = Date{2016, 6, 1};
    c.validation_fraction = 0.3;
    c.env.tau = 12;
    c.env.cost_rate = 0.002;
    c.net.hidden = {64, 32};
    c.net.batch_norm = {1, 0};
    c.hp.gamma = 0.9;
    c.hp.episodes = 7;
    c.pipeline.filter_window = 3;
    c.pipeline.augment.shifts = {0, 4};
    c.strategy = "trend-following";
    c.ma_short = 3;
    c.ma_long = 9;
    c.checkpoint = "runs/ck.bin";
    c.output_dir = "runs/out";
    c.seed = 99;
    c.runs = 4;
    c.sweep_costs = {0.0, 0.01};
    c.testbench_with_tdqn = true;

    const json j = config_to_json(c);
    RunConfig back;
    config_from_json(j, back);
    CHECK(config_to_json(back).dump() == j.dump());
    CHECK(back.ticker == "MSFT");
    CHECK(back.env.tau == 12);
    CHECK(back.net.batch_norm == std::vector<std::uint8_t>{1, 0});
    CHECK(back.pipeline.augment.shifts == std::vector<std::size_t>{0, 4});
    CHECK(to_string(back.train_end) == "2015-06-01");
}

TEST_CASE("config problems are all reported at once") {
    json j{{"tickerr", "X"},
           {"validation_fraction", "lots"},
           {"env", json{{"tau", "huge"}}},
           {"hyperparams", json{{"gama", 0.5}}}};
    RunConfig c;
    CHECK_THROWS_WITH(config_from_json(j, c),
                      ContainsSubstring("4 problems") &&
                          ContainsSubstring("config.tickerr: unknown key") &&
                          ContainsSubstring("config.validation_fraction") &&
                          ContainsSubstring("config.env.tau") &&
                          ContainsSubstring("config.hyperparams.gama: unknown key"));
}

TEST_CASE("a config must be a json object") {
    RunConfig c;
    CHECK_THROWS_AS(config_from_json(json::array(), c), Error);
}

TEST_CASE("batch norm accepts a bool or a per-layer array") {
    RunConfig c;
    config_from_json(json{{"net", json{{"hidden", json{4, 4}}, {"batch_norm", false}}}}, c);
    CHECK(c.net.batch_norm == std::vector<std::uint8_t>{0, 0});

    config_from_json(json{{"net", json{{"hidden", json{4, 4}}, {"batch_norm", true}}}}, c);
    CHECK(c.net.batch_norm == std::vector<std::uint8_t>{1, 1});

    config_from_json(json{{"net", json{{"hidden", json{4, 4}},
                                       {"batch_norm", json{true, false}}}}},
                     c);
    CHECK(c.net.batch_norm == std::vector<std::uint8_t>{1, 0});

    RunConfig d;
    CHECK_THROWS_WITH(
        config_from_json(json{{"net", json{{"batch_norm", 5}}}}, d),
        ContainsSubstring("bool or an array of bools"));
    CHECK_THROWS_WITH(
        config_from_json(json{{"net", json{{"batch_norm", json{"x"}}}}}, d),
        ContainsSubstring("bool or an array of bools"));
}

TEST_CASE("empty date strings keep the built-in defaults") {
    RunConfig c;
    config_from_json(json{{"start", ""}}, c);
    CHECK(to_string(c.start) == "2012-01-01");
    CHECK_THROWS_WITH(config_from_json(json{{"start", "last tuesday"}}, c),
                      ContainsSubstring("config.start"));
}

TEST_CASE("config files load and reject broken json") {
    const std::string path = "cfg_test_tmp.json";
    write_file(path, R"({"ticker": "KO", "seed": 17})");
    RunConfig c = load_config_file(path);
    CHECK(c.ticker == "KO");
    CHECK(c.seed == 17);
    CHECK(c.strategy == "tdqn");  // untouched default
    std::remove(path.c_str());

    write_file(path, "{ not json");
    CHECK_THROWS_WITH(load_config_file(path), ContainsSubstring("config file"));
    std::remove(path.c_str());

    CHECK_THROWS_WITH(load_config_file("missing_config.json"), ContainsSubstring("cannot open"));
}

TEST_CASE("validation aggregates problems across components") {
    RunConfig c;
    c.env.tau = 0;
    c.hp.gamma = 2.0;
    c.strategy = "bogus";
    c.ma_short = 30;  // >= ma_long
    CHECK_THROWS_WITH(c.validate(), ContainsSubstring("4 problems"));
}

TEST_CASE("split ordering is enforced only when a command splits") {
    RunConfig c;
    c.train_end = Date{2030, 1, 1};  // beyond the data end
    CHECK_THROWS_WITH(c.validate(true), ContainsSubstring("train end"));
    CHECK_NOTHROW(c.validate(false));

    c.end = Date{2011, 1, 1};  // before start; wrong for every command
    CHECK_THROWS_AS(c.validate(false), Error);
}

TEST_CASE("strategy specs map the configured windows") {
    RunConfig c;
    c.strategy = "mean-reversion";
    c.ma_short = 4;
    c.ma_long = 11;
    StrategySpec spec = c.strategy_spec();
    CHECK(spec.kind == StrategyKind::MeanReversion);
    CHECK(spec.short_window == 4);
    CHECK(spec.long_window == 11);
}

TEST_CASE("the built-in testbench lists thirty distinct instruments") {
    const std::vector<TestbenchEntry> bench = default_testbench();
    REQUIRE(bench.size() == 30);
    std::set<std::string> tickers;
    bool has_aapl = false;
    for (const TestbenchEntry& e : bench) {
        CHECK_FALSE(e.ticker.empty());
        CHECK_FALSE(e.display_name.empty());
        CHECK_FALSE(e.region.empty());
        CHECK_FALSE(e.sector.empty());
        tickers.insert(e.ticker);
        has_aapl = has_aapl || e.ticker == "AAPL";
    }
    CHECK(tickers.size() == 30);
    CHECK(has_aapl);
}

TEST_CASE("testbench files parse with per-entry defaults") {
    const std::string path = "bench_test_tmp.json";
    write_file(path, R"([{"ticker": "AAA", "name": "Triple A", "region": "R", "sector": "S"},
                         {"ticker": "BBB"}])");
    std::vector<TestbenchEntry> bench = load_testbench_file(path);
    REQUIRE(bench.size() == 2);
    CHECK(bench[0].display_name == "Triple A");
    CHECK(bench[1].display_name == "BBB");
    CHECK(bench[1].region.empty());
    std::remove(path.c_str());

    write_file(path, R"({"ticker": "AAA"})");
    CHECK_THROWS_WITH(load_testbench_file(path), ContainsSubstring("JSON array"));
    write_file(path, R"([{"name": "nameless"}])");
    CHECK_THROWS_WITH(load_testbench_file(path), ContainsSubstring("missing 'ticker'"));
    write_file(path, "[]");
    CHECK_THROWS_WITH(load_testbench_file(path), ContainsSubstring("no instruments"));
    std::remove(path.c_str());
}

TEST_CASE("data summaries identify the series") {
    OhlcvSeries s = tiny_series();
    json j = data_summary_json(s);
    CHECK(j.at("name") == "TS");
    CHECK(j.at("rows") == 5);
    CHECK(j.at("first_date") == "2018-03-01");
    CHECK(j.at("last_date") == "2018-03-05");
    CHECK(j.at("fingerprint") == hex64(fingerprint(s)));
}

TEST_CASE("manifests are reproducible for identical inputs") {
    RunConfig c;
    c.ticker = "KO";
    OhlcvSeries s = tiny_series();
    json results{{"episodes", 3}};
    json a = manifest_json("train", c, data_summary_json(s), results);
    json b = manifest_json("train", c, data_summary_json(s), results);
    CHECK(a.dump(2) == b.dump(2));
    CHECK(a.at("command") == "train");
    CHECK(a.at("config").at("ticker") == "KO");
    CHECK(a.at("data").at("rows") == 5);
    CHECK(a.at("results").at("episodes") == 3);
}

TEST_CASE("feature stats json round trips and validates") {
    FeatureStats s;
    for (std::size_t i = 0; i < kFeaturesPerBar; ++i) {
        s.min[i] = -0.1 * static_cast<double>(i + 1);
        s.max[i] = 0.2 * static_cast<double>(i + 1);
    }
    FeatureStats back = stats_from_json(to_json(s));
    CHECK(back.min == s.min);
    CHECK(back.max == s.max);

    CHECK_THROWS_WITH(stats_from_json(json{{"min", json{1, 2}}}),
                      ContainsSubstring("'min' and 'max'"));
    CHECK_THROWS_WITH(stats_from_json(json{{"min", json{1, 2}}, {"max", json{1, 2}}}),
                      ContainsSubstring("entries per side"));
}

TEST_CASE("episode stats serialize their indicators with markers") {
    EpisodeStats ep;
    ep.episode = 4;
    ep.variant = "X+shift0+filter1+noise0";
    ep.mean_loss = 0.125;
    ep.epsilon = 0.5;
    ep.train_sharpe = Indicator::of(1.25);
    ep.validation_sharpe = Indicator::undefined();
    ep.test_sharpe = Indicator::infinite();
    json j = to_json(ep);
    CHECK(j.at("episode") == 4);
    CHECK(j.at("train_sharpe") == 1.25);
    CHECK(j.at("validation_sharpe").is_null());
    CHECK(j.at("test_sharpe") == "inf");
}

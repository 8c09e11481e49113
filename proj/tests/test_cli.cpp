#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "alphamine/cli.hpp"
#include "alphamine/runconfig.hpp"
#include "test_support.hpp"

using namespace alphamine;
using namespace test_support;
using nlohmann::json;

namespace {

struct CoutCapture {
    std::stringstream ss;
    std::streambuf* old;
    CoutCapture() : old(std::cout.rdbuf(ss.rdbuf())) {}
    ~CoutCapture() { std::cout.rdbuf(old); }
    std::string text() const { return ss.str(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

const char* kSmallConfig = R"({
  "horizon": 10,
  "evolution": {
    "initial_pool": 10, "parent_pool": 4, "children_multiplier": 2,
    "generations": 8, "subcycles": 2, "gens_per_subcycle": 4,
    "inject_every": 2, "inject_count": 2, "elites_forward": 2,
    "num_per_request": 4, "seed": 9, "threads": 1
  },
  "backend": {"kind": "mock"}
})";

}  // namespace

TEST_CASE("config: JSON round trip and unknown-key rejection") {
    RunConfig rc;
    rc.evolution.seed = 1234;
    rc.evolution.generations = 8;
    rc.evolution.subcycles = 2;
    rc.evolution.gens_per_subcycle = 4;
    rc.strategy.top_k = 10;
    rc.horizon = 5;
    const RunConfig back = RunConfig::from_json(rc.to_json());
    CHECK(back.to_json() == rc.to_json());

    json j = rc.to_json();
    j["evolution"]["not_a_key"] = 1;
    CHECK_THROWS_WITH_AS(RunConfig::from_json(j), doctest::Contains("not_a_key"), ConfigError);
    json j2 = rc.to_json();
    j2["mystery"] = true;
    CHECK_THROWS_AS(RunConfig::from_json(j2), ConfigError);
    json j3 = rc.to_json();
    j3["backend"]["kind"] = "carrier-pigeon";
    CHECK_THROWS_AS(RunConfig::from_json(j3), ConfigError);
}

TEST_CASE("cli synth: row count, determinism, validation") {
    const std::string out1 = "/tmp/alphamine_cli_synth1.csv";
    const std::string out2 = "/tmp/alphamine_cli_synth2.csv";
    {
        CoutCapture cap;
        CHECK(run_cli({"synth", "--seed", "3", "--dates", "50", "--tickers", "10", "--signal",
                       "0.5", "--out", out1}) == 0);
        CHECK(run_cli({"synth", "--seed", "3", "--dates", "50", "--tickers", "10", "--signal",
                       "0.5", "--out", out2}) == 0);
    }
    const std::string a = slurp(out1);
    CHECK(line_count(a) == 501);  // header + 50*10 rows
    CHECK(a == slurp(out2));

    CoutCapture cap;
    CHECK(run_cli({"synth", "--seed", "1", "--dates", "50", "--tickers", "10", "--signal", "1.5",
                   "--out", out1}) == 1);
    CHECK(run_cli({"synth", "--seed", "1", "--dates", "50", "--tickers", "10", "--signal", "0.5",
                   "--out", "/nonexistent_dir/x.csv"}) == 2);
}

TEST_CASE("cli mine: log records, thresholds flag, archive file") {
    const std::string data = "/tmp/alphamine_cli_data.csv";
    const std::string cfg_path = write_temp("mine_cfg.json", kSmallConfig);
    const std::string out_dir = "/tmp/alphamine_cli_mine";
    std::filesystem::remove_all(out_dir);
    {
        CoutCapture cap;
        REQUIRE(run_cli({"synth", "--seed", "42", "--dates", "70", "--tickers", "8", "--signal",
                         "0.8", "--out", data}) == 0);
        CHECK(run_cli({"mine", "--config", cfg_path, "--data", data, "--out", out_dir,
                       "--thresholds", "80,90"}) == 0);
    }
    const std::string log_text = slurp(out_dir + "/run_log.jsonl");
    CHECK(line_count(log_text) == 9);  // init + 8 generations

    const json echoed = json::parse(slurp(out_dir + "/config.json"));
    CHECK(echoed["thresholds"]["qualified_percentile"] == 80.0);
    CHECK(echoed["thresholds"]["elite_percentile"] == 90.0);

    CHECK(std::filesystem::exists(out_dir + "/elite_archive.jsonl"));

    // report over the produced log
    const std::string rep_dir = "/tmp/alphamine_cli_report";
    std::filesystem::remove_all(rep_dir);
    {
        CoutCapture cap;
        CHECK(run_cli({"report", "--log", out_dir + "/run_log.jsonl", "--out", rep_dir}) == 0);
    }
    CHECK(line_count(slurp(rep_dir + "/generation_metrics.csv")) == 9);  // header + 8 rows
    CHECK(std::filesystem::exists(rep_dir + "/rejection_stages.csv"));
}

TEST_CASE("cli mine: invalid config and missing data fail with the right codes") {
    CoutCapture cap;
    const std::string bad_cfg = write_temp("bad_cfg.json", R"({"evolution": {"generations": 5}})");
    CHECK(run_cli({"mine", "--config", bad_cfg, "--data", "/tmp/nope.csv"}) == 1);
    const std::string cfg_path = write_temp("mine_cfg2.json", kSmallConfig);
    CHECK(run_cli({"mine", "--config", cfg_path, "--data", "/tmp/really_not_there.csv"}) == 2);
}

TEST_CASE("cli mine: unreachable http backend aborts with a partial log") {
    const std::string cfg_path = write_temp("http_cfg.json", R"({
      "evolution": {"initial_pool": 6, "parent_pool": 3, "generations": 2,
                     "subcycles": 1, "gens_per_subcycle": 2, "seed": 1},
      "backend": {"kind": "http", "base_url": "http://127.0.0.1:1", "model": "m",
                   "max_retries": 0, "retry_backoff_ms": 1, "timeout_ms": 200}
    })");
    const std::string data = "/tmp/alphamine_cli_data2.csv";
    const std::string out_dir = "/tmp/alphamine_cli_http";
    std::filesystem::remove_all(out_dir);
    CoutCapture cap;
    REQUIRE(run_cli({"synth", "--seed", "2", "--dates", "60", "--tickers", "6", "--signal", "0.5",
                     "--out", data}) == 0);
    CHECK(run_cli({"mine", "--config", cfg_path, "--data", data, "--out", out_dir}) == 3);
    const std::string log_text = slurp(out_dir + "/run_log.jsonl");
    CHECK(line_count(log_text) >= 1);  // init record persisted before the abort
    CHECK(log_text.find("abort") != std::string::npos);
}

TEST_CASE("cli eval: planted signal scores high; junk is a data error") {
    const std::string data = "/tmp/alphamine_cli_data3.csv";
    std::string output;
    {
        CoutCapture cap;
        REQUIRE(run_cli({"synth", "--seed", "42", "--dates", "250", "--tickers", "50", "--signal",
                         "0.8", "--out", data}) == 0);
        REQUIRE(run_cli({"eval", "--expr", planted_signal_text(), "--data", data}) == 0);
        output = cap.text();
    }
    const std::size_t brace = output.find('{');
    REQUIRE(brace != std::string::npos);
    const json report = json::parse(output.substr(brace));
    CHECK(report["ic"].get<double>() >= 0.5);
    CHECK(report["nan_ratio"].get<double>() < 0.05);

    {
        CoutCapture cap;
        CHECK(run_cli({"eval", "--expr", "close +", "--data", data}) == 2);
        CHECK(run_cli({"eval", "--data", data}) == 1);  // neither --expr nor --expr-file
    }

    // |IC| of a plain column against a no-signal panel stays small.
    const std::string noise = "/tmp/alphamine_cli_noise.csv";
    std::string out2;
    {
        CoutCapture cap;
        REQUIRE(run_cli({"synth", "--seed", "7", "--dates", "250", "--tickers", "50", "--signal",
                         "0", "--out", noise}) == 0);
        REQUIRE(run_cli({"eval", "--expr", "close", "--data", noise}) == 0);
        out2 = cap.text();
    }
    const json r2 = json::parse(out2.substr(out2.find('{')));
    CHECK(std::fabs(r2["ic"].get<double>()) < 0.05);
}

TEST_CASE("cli backtest: archive smoke, zero-cost flags, empty archive") {
    const std::string data = "/tmp/alphamine_cli_data4.csv";
    const std::string archive = write_temp(
        "archive.jsonl",
        json{{"id", "e1"},
             {"name", "factor_planted"},
             {"expr", planted_signal_text()},
             {"rationale", "planted"},
             {"ic", 0.7},
             {"icir", 3.0},
             {"rank_ic", 0.7},
             {"rank_icir", 3.0},
             {"mi", 0.5},
             {"generation", 1}}
            .dump() +
            "\n");
    const std::string out_dir = "/tmp/alphamine_cli_bt";
    std::filesystem::remove_all(out_dir);
    std::string summary_text;
    {
        CoutCapture cap;
        REQUIRE(run_cli({"synth", "--seed", "42", "--dates", "120", "--tickers", "12", "--signal",
                         "0.8", "--out", data}) == 0);
        CHECK(run_cli({"backtest", "--archive", archive, "--data", data, "--train-split",
                       "2016-04-01", "--out", out_dir, "--top-k", "4", "--drop-n", "1"}) == 0);
        summary_text = cap.text();
    }
    const json summary = json::parse(slurp(out_dir + "/backtest_summary.json"));
    CHECK(std::isfinite(summary["aer"].get<double>()));
    CHECK(std::isfinite(summary["ir"].get<double>()));
    CHECK(summary["trades"].get<int>() > 0);
    CHECK(line_count(slurp(out_dir + "/daily_excess.csv")) ==
          summary["days"].get<std::size_t>() + 1);

    {
        CoutCapture cap;
        CHECK(run_cli({"backtest", "--archive", archive, "--data", data, "--train-split",
                       "2016-04-01", "--out", out_dir, "--top-k", "4", "--drop-n", "1",
                       "--buy-cost", "0", "--sell-cost", "0", "--min-fee", "0"}) == 0);
    }
    const json free_summary = json::parse(slurp(out_dir + "/backtest_summary.json"));
    CHECK(free_summary["total_fees"].get<double>() == 0.0);

    const std::string empty_archive = write_temp("empty_archive.jsonl", "");
    CoutCapture cap;
    CHECK(run_cli({"backtest", "--archive", empty_archive, "--data", data, "--train-split",
                   "2016-04-01"}) == 1);
}

TEST_CASE("cli report: empty and corrupted logs") {
    const std::string empty_log = write_temp("empty_log.jsonl", "");
    const std::string rep1 = "/tmp/alphamine_cli_rep1";
    std::filesystem::remove_all(rep1);
    {
        CoutCapture cap;
        CHECK(run_cli({"report", "--log", empty_log, "--out", rep1}) == 0);
    }
    CHECK(line_count(slurp(rep1 + "/generation_metrics.csv")) == 1);  // header only

    const std::string corrupt = write_temp(
        "corrupt_log.jsonl",
        "{\"type\":\"generation\",\"generation\":1,\"cohort\":3}\nnot json at all\n");
    const std::string rep2 = "/tmp/alphamine_cli_rep2";
    std::filesystem::remove_all(rep2);
    CoutCapture cap;
    CHECK(run_cli({"report", "--log", corrupt, "--out", rep2}) == 0);
    CHECK(line_count(slurp(rep2 + "/generation_metrics.csv")) == 2);
}

TEST_CASE("cli: unknown subcommand is a usage error") {
    CoutCapture cap;
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({}) == 1);
}

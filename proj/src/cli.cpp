#include "alphamine/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "alphamine/backtest.hpp"
#include "alphamine/runconfig.hpp"

namespace alphamine {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

std::unique_ptr<LlmBackend> make_backend(const RunConfig& rc) {
    if (rc.backend_kind == BackendKind::Http) return std::make_unique<HttpBackend>(rc.http);
    return std::make_unique<MockBackend>(rc.evolution.seed);
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + dir + "'");
}

int cmd_synth(std::uint64_t seed, int dates, int tickers, double signal, const std::string& out) {
    const OhlcvPanel panel = synth_panel(seed, dates, tickers, signal);
    write_csv(panel, out);
    std::cout << "wrote " << panel.n_dates() * panel.n_tickers() << " rows to " << out << "\n";
    return kExitOk;
}

int cmd_mine(const std::string& config_path, const std::string& data_path,
             const std::string& out_dir, const std::string& thresholds_flag,
             std::int64_t seed_flag, int threads_flag) {
    RunConfig rc = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (!thresholds_flag.empty()) {
        double q = 0.0, e = 0.0;
        if (std::sscanf(thresholds_flag.c_str(), "%lf,%lf", &q, &e) != 2)
            throw ConfigError("--thresholds expects 'qualified,elite' (e.g. 80,90)");
        rc.evolution.thresholds.qualified_percentile = q;
        rc.evolution.thresholds.elite_percentile = e;
    }
    if (seed_flag >= 0) rc.evolution.seed = static_cast<std::uint64_t>(seed_flag);
    if (threads_flag > 0) rc.evolution.threads = threads_flag;
    rc.check();

    const OhlcvPanel panel = load_csv(data_path);
    const LabelMatrix labels = forward_return(panel, rc.horizon);

    ensure_dir(out_dir);
    {
        std::ofstream cfg(out_dir + "/config.json");
        cfg << rc.to_json().dump(2) << "\n";
    }
    std::ofstream log_file(out_dir + "/run_log.jsonl");
    if (!log_file) throw DataError("cannot write '" + out_dir + "/run_log.jsonl'");
    const LogSink sink = [&](const nlohmann::json& j) {
        log_file << j.dump() << "\n";
        log_file.flush();  // abort paths must leave a partial log behind
    };

    auto backend = make_backend(rc);
    const RunLog log =
        run_evolution(rc.evolution, panel, labels, builtin_profiles(), *backend, sink);

    std::ofstream archive(out_dir + "/elite_archive.jsonl");
    for (const ArchiveEntry& entry : log.archive) archive << to_json(entry).dump() << "\n";

    std::cout << "generations: " << log.generations.size() << ", elites archived: "
              << log.archive.size() << "\n";
    if (log.aborted) {
        std::cerr << "run aborted: " << log.abort_reason << "\n";
        return kExitBackend;
    }
    return kExitOk;
}

int cmd_eval(const std::string& expr_flag, const std::string& expr_file,
             const std::string& data_path, int horizon) {
    std::string text = expr_flag;
    if (!expr_file.empty()) {
        std::ifstream in(expr_file);
        if (!in) throw DataError("cannot open '" + expr_file + "'");
        std::getline(in, text);
    }
    if (text.empty()) throw ConfigError("provide --expr or --expr-file");

    const Expr expr = parse_expr(text);
    const OhlcvPanel panel = load_csv(data_path);
    const LabelMatrix labels = forward_return(panel, horizon);
    const FactorMatrix factor = evaluate(expr, panel);

    const MetricSeries ics = ic_series(factor, labels);
    const MetricSeries rics = rank_ic_series(factor, labels);
    const nlohmann::json out = {
        {"expr", print_expr(expr)},
        {"ic", ics.mean},
        {"icir", icir(ics)},
        {"rank_ic", rics.mean},
        {"rank_icir", rank_icir(rics)},
        {"mi", mutual_info(factor, labels)},
        {"nan_ratio", nan_ratio(factor)},
    };
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_backtest(const std::string& archive_path, const std::string& data_path,
                 const std::string& train_split, const std::string& out_dir, int horizon,
                 double buy_cost, double sell_cost, double min_fee, int top_k, int drop_n) {
    std::ifstream in(archive_path);
    if (!in) throw DataError("cannot open archive '" + archive_path + "'");
    std::vector<Expr> elites;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw DataError("archive line is not valid JSON: " + line.substr(0, 80));
        }
        elites.push_back(parse_expr(j.at("expr").get<std::string>()));
    }
    if (elites.empty()) throw ConfigError("elite archive is empty");

    const OhlcvPanel panel = load_csv(data_path);
    check_iso_date(train_split);
    if (train_split < panel.dates.front() || train_split >= panel.dates.back())
        throw DataError("train split " + train_split + " leaves no scoring range");
    const LabelMatrix labels = forward_return(panel, horizon);

    // Labels look `horizon` days ahead; end the sign-alignment window early
    // enough that no training label overlaps the scoring period.
    std::size_t split_idx = 0;
    while (split_idx + 1 < panel.n_dates() && panel.dates[split_idx + 1] <= train_split)
        ++split_idx;
    if (split_idx < static_cast<std::size_t>(horizon) + 1)
        throw DataError("train split " + train_split + " leaves no usable training labels");
    const Date train_end = panel.dates[split_idx - static_cast<std::size_t>(horizon) - 1];

    const ScoreMatrix scores =
        combine(elites, panel, labels, DateRange{panel.dates.front(), train_end});

    // Score on the held-out suffix: slice both panel and scores.
    std::size_t start = 0;
    while (start < panel.n_dates() && panel.dates[start] <= train_split) ++start;
    OhlcvPanel test = panel;
    ScoreMatrix test_scores = scores;
    auto slice = [&](const Matrix& m) {
        Matrix s(panel.n_dates() - start, panel.n_tickers());
        for (std::size_t i = start; i < panel.n_dates(); ++i)
            for (std::size_t j2 = 0; j2 < panel.n_tickers(); ++j2)
                s.at(i - start, j2) = m.at(i, j2);
        return s;
    };
    test.dates.assign(panel.dates.begin() + static_cast<long>(start), panel.dates.end());
    test.open = slice(panel.open);
    test.high = slice(panel.high);
    test.low = slice(panel.low);
    test.close = slice(panel.close);
    test.volume = slice(panel.volume);
    test_scores.dates = test.dates;
    test_scores.values = slice(scores.values);

    StrategyConfig strategy;
    strategy.buy_cost = buy_cost;
    strategy.sell_cost = sell_cost;
    strategy.min_fee = min_fee;
    strategy.top_k = top_k;
    strategy.drop_n = drop_n;
    const BacktestResult result = simulate(test_scores, test, strategy);

    ensure_dir(out_dir);
    {
        std::ofstream csv(out_dir + "/daily_excess.csv");
        csv << "date,excess\n";
        for (const auto& [date, v] : result.daily_excess)
            csv << date << ',' << format_double(v) << "\n";
    }
    const nlohmann::json summary = {
        {"aer", result.aer},
        {"ir", result.ir},
        {"trades", result.cost_ledger.size()},
        {"total_fees", result.total_fees},
        {"days", result.daily_excess.size()},
        {"elites", elites.size()},
    };
    {
        std::ofstream js(out_dir + "/backtest_summary.json");
        js << summary.dump(2) << "\n";
    }
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_report(const std::string& log_path, const std::string& out_dir) {
    std::ifstream in(log_path);
    if (!in) throw DataError("cannot open log '" + log_path + "'");
    ensure_dir(out_dir);

    std::ofstream metrics(out_dir + "/generation_metrics.csv");
    metrics << "generation,subcycle,cohort,qualified,elite,best_ic,mean_ic,best_rank_ic,"
               "best_icir,best_rank_icir,mi_best\n";
    std::map<std::string, long> stages;
    std::string line;
    std::size_t skipped = 0, rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            ++skipped;
            continue;
        }
        if (j.value("type", "") != "generation") continue;
        metrics << j.value("generation", 0) << ',' << j.value("subcycle", 0) << ','
                << j.value("cohort", 0) << ',' << j.value("qualified", 0) << ','
                << j.value("elite", 0) << ',' << j.value("best_ic", 0.0) << ','
                << j.value("mean_ic", 0.0) << ',' << j.value("best_rank_ic", 0.0) << ','
                << j.value("best_icir", 0.0) << ',' << j.value("best_rank_icir", 0.0) << ','
                << j.value("mi_best", 0.0) << "\n";
        ++rows;
        if (j.contains("rejects_by_stage"))
            for (auto it = j["rejects_by_stage"].begin(); it != j["rejects_by_stage"].end(); ++it)
                stages[it.key()] += it.value().get<long>();
    }
    std::ofstream hist(out_dir + "/rejection_stages.csv");
    hist << "stage,count\n";
    for (const auto& [stage, count] : stages) hist << stage << ',' << count << "\n";

    if (skipped)
        std::cerr << "warning: skipped " << skipped << " corrupted log line"
                  << (skipped > 1 ? "s" : "") << "\n";
    std::cout << "wrote " << rows << " generation rows\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"evolutionary alpha mining over OHLCV panels"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "write a synthetic OHLCV panel CSV");
    std::uint64_t s_seed = 0;
    int s_dates = 250, s_tickers = 50;
    double s_signal = 0.0;
    std::string s_out;
    synth->add_option("--seed", s_seed, "generator seed");
    synth->add_option("--dates", s_dates, "number of trading days (>= 30)");
    synth->add_option("--tickers", s_tickers, "number of tickers (>= 5)");
    synth->add_option("--signal", s_signal, "planted signal strength in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--out", s_out, "output CSV path")->required();

    // mine
    auto* mine = app.add_subcommand("mine", "run the evolutionary search");
    std::string m_config, m_data, m_out = "mine_out", m_thresholds;
    std::int64_t m_seed = -1;
    int m_threads = 0;
    mine->add_option("--config", m_config, "JSON run configuration");
    mine->add_option("--data", m_data, "OHLCV CSV panel")->required();
    mine->add_option("--out", m_out, "output directory");
    mine->add_option("--thresholds", m_thresholds, "percentile pair, e.g. 65,80 or 80,90");
    mine->add_option("--seed", m_seed, "override the run seed");
    mine->add_option("--threads", m_threads, "worker pool bound");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score one expression against forward returns");
    std::string e_expr, e_expr_file, e_data;
    int e_horizon = 10;
    eval_cmd->add_option("--expr", e_expr, "DSL expression");
    eval_cmd->add_option("--expr-file", e_expr_file, "file with one DSL expression");
    eval_cmd->add_option("--data", e_data, "OHLCV CSV panel")->required();
    eval_cmd->add_option("--horizon", e_horizon, "forward-return horizon in trading days");

    // backtest
    auto* bt = app.add_subcommand("backtest", "combine an elite archive and simulate");
    std::string b_archive, b_data, b_split, b_out = "backtest_out";
    int b_horizon = 10, b_top_k = 50, b_drop_n = 5;
    double b_buy = 0.0005, b_sell = 0.0015, b_min_fee = 5.0;
    bt->add_option("--archive", b_archive, "elite archive JSONL")->required();
    bt->add_option("--data", b_data, "OHLCV CSV panel")->required();
    bt->add_option("--train-split", b_split, "last training date (YYYY-MM-DD)")->required();
    bt->add_option("--out", b_out, "output directory");
    bt->add_option("--horizon", b_horizon, "label horizon");
    bt->add_option("--top-k", b_top_k, "portfolio size");
    bt->add_option("--drop-n", b_drop_n, "max replacements per day");
    bt->add_option("--buy-cost", b_buy, "buy cost rate");
    bt->add_option("--sell-cost", b_sell, "sell cost rate");
    bt->add_option("--min-fee", b_min_fee, "minimum fee per trade");

    // report
    auto* report = app.add_subcommand("report", "summarize a run log into CSV tables");
    std::string r_log, r_out = "report_out";
    report->add_option("--log", r_log, "run log JSONL")->required();
    report->add_option("--out", r_out, "output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (synth->parsed()) return cmd_synth(s_seed, s_dates, s_tickers, s_signal, s_out);
        if (mine->parsed())
            return cmd_mine(m_config, m_data, m_out, m_thresholds, m_seed, m_threads);
        if (eval_cmd->parsed()) return cmd_eval(e_expr, e_expr_file, e_data, e_horizon);
        if (bt->parsed())
            return cmd_backtest(b_archive, b_data, b_split, b_out, b_horizon, b_buy, b_sell,
                                b_min_fee, b_top_k, b_drop_n);
        if (report->parsed()) return cmd_report(r_log, r_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace alphamine

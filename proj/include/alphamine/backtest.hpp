// backtest.hpp — elite-alpha combination, the top-k/drop-n daily portfolio
// simulation with transaction costs, and AER / IR.
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "alphamine/eval.hpp"
#include "alphamine/panel.hpp"

namespace alphamine {

struct StrategyConfig {
    int top_k = 50;
    int drop_n = 5;
    double buy_cost = 0.0005;   // 0.05%
    double sell_cost = 0.0015;  // 0.15%
    double min_fee = 5.0;       // currency units per trade
    int periods_per_year = 252;
    double initial_cash = 1e8;

    void check() const;
};

struct ScoreMatrix {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Matrix values;
};

struct TradeRecord {
    Date date;
    std::string ticker;
    char side = 'B';  // 'B' or 'S'
    double shares = 0.0;
    double notional = 0.0;
    double fee = 0.0;
};

struct PositionSnapshot {
    Date date;
    std::map<std::string, double> shares;  // post-trade holdings at this open
    double cash = 0.0;
};

struct BacktestResult {
    std::vector<std::pair<Date, double>> daily_excess;  // cost- and benchmark-deducted
    double aer = 0.0;
    double ir = 0.0;
    std::vector<PositionSnapshot> positions;
    std::vector<TradeRecord> cost_ledger;
    double total_fees = 0.0;
    bool universe_smaller_than_top_k = false;
};

struct DateRange {
    Date begin;  // inclusive
    Date end;    // inclusive
};

// Equal-weight combination of elite factors: each factor is cross-sectionally
// z-scored per date, sign-aligned by the sign of its IC over the training
// date range, then averaged over non-missing entries.
ScoreMatrix combine(const std::vector<Expr>& elites, const OhlcvPanel& panel,
                    const LabelMatrix& labels, const DateRange& train_dates,
                    const EvalOptions& opts = {});

// Daily rebalance: rank by score (signals from day t trade at the open of
// t+1); sell the worst-ranked held names that fell outside the top_k (at most
// drop_n), buy the best-ranked non-held names to refill top_k; per-trade fee
// max(min_fee, notional * rate). Benchmark is the equal-weight universe
// open-to-open return.
BacktestResult simulate(const ScoreMatrix& scores, const OhlcvPanel& panel,
                        const StrategyConfig& config);

// mean * N.
double aer(std::span<const double> daily_excess, int periods_per_year);

// (mean / sample std) * sqrt(N); errors on fewer than 2 points or zero std.
double ir(std::span<const double> daily_excess, int periods_per_year);

}  // namespace alphamine

#include "alphamine/backtest.hpp"

#include <algorithm>
#include <cmath>

#include "alphamine/fitness.hpp"

namespace alphamine {

void StrategyConfig::check() const {
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (drop_n < 0 || drop_n > top_k) throw ConfigError("drop_n must lie in [0, top_k]");
    if (buy_cost < 0.0 || sell_cost < 0.0 || min_fee < 0.0)
        throw ConfigError("costs must be non-negative");
    if (periods_per_year < 1) throw ConfigError("periods_per_year must be >= 1");
    if (initial_cash <= 0.0) throw ConfigError("initial_cash must be positive");
}

ScoreMatrix combine(const std::vector<Expr>& elites, const OhlcvPanel& panel,
                    const LabelMatrix& labels, const DateRange& train_dates,
                    const EvalOptions& opts) {
    if (elites.empty()) throw DataError("combine: empty elite set");
    if (panel.dates != labels.dates || panel.tickers != labels.tickers)
        throw DataError("combine: panel and labels are misaligned");

    const std::size_t nd = panel.n_dates();
    const std::size_t nt = panel.n_tickers();
    ScoreMatrix scores;
    scores.dates = panel.dates;
    scores.tickers = panel.tickers;
    scores.values = Matrix(nd, nt);
    Matrix sums(nd, nt, 0.0);
    Matrix counts(nd, nt, 0.0);

    std::vector<double> f, r;
    for (const Expr& expr : elites) {
        const FactorMatrix factor = evaluate(expr, panel, opts);
        // IC over the training window decides the sign.
        double ic_sum = 0.0;
        std::size_t ic_dates = 0;
        for (std::size_t t = 0; t < nd; ++t) {
            if (panel.dates[t] < train_dates.begin || panel.dates[t] > train_dates.end) continue;
            f.clear();
            r.clear();
            for (std::size_t j = 0; j < nt; ++j) {
                const double fv = factor.values.at(t, j);
                const double rv = labels.values.at(t, j);
                if (is_missing(fv) || is_missing(rv)) continue;
                f.push_back(fv);
                r.push_back(rv);
            }
            if (f.size() < 3) continue;
            const double corr = pearson(f, r);
            if (is_missing(corr)) continue;
            ic_sum += corr;
            ++ic_dates;
        }
        const double sign = (ic_dates > 0 && ic_sum < 0.0) ? -1.0 : 1.0;

        const Matrix z = cross_zscore(factor.values);
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double v = z.data()[i];
            if (is_missing(v)) continue;
            sums.data()[i] += sign * v;
            counts.data()[i] += 1.0;
        }
    }
    for (std::size_t i = 0; i < sums.size(); ++i)
        if (counts.data()[i] > 0.0) scores.values.data()[i] = sums.data()[i] / counts.data()[i];
    return scores;
}

namespace {

// Holdings keyed by ticker column index.
struct Book {
    std::map<std::size_t, double> shares;
    double cash = 0.0;
};

double holdings_value(const Book& book, const OhlcvPanel& panel, std::size_t t) {
    double v = 0.0;
    for (const auto& [j, sh] : book.shares) {
        const double px = panel.open.at(t, j);
        if (!is_missing(px)) v += sh * px;
    }
    return v;
}

}  // namespace

BacktestResult simulate(const ScoreMatrix& scores, const OhlcvPanel& panel,
                        const StrategyConfig& config) {
    config.check();
    if (scores.dates != panel.dates || scores.tickers != panel.tickers)
        throw DataError("simulate: scores and panel are misaligned");
    const std::size_t nd = panel.n_dates();
    const std::size_t nt = panel.n_tickers();
    if (nd < 2) throw DataError("simulate: need at least 2 dates");

    BacktestResult result;
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(config.top_k), nt);
    result.universe_smaller_than_top_k = nt < static_cast<std::size_t>(config.top_k);

    Book book;
    book.cash = config.initial_cash;
    bool invested = false;
    std::vector<double> excess;
    std::vector<Date> excess_dates;

    // Trades on day d use scores from day d-1 and execute at open(d); the
    // day's return runs open(d) -> open(d+1), so the last tradable day is
    // nd-2.
    for (std::size_t d = 1; d + 1 < nd; ++d) {
        const std::size_t signal_row = d - 1;

        // Ranked scored tickers: score desc, ticker order on ties.
        std::vector<std::size_t> ranked;
        for (std::size_t j = 0; j < nt; ++j)
            if (!is_missing(scores.values.at(signal_row, j)) &&
                !is_missing(panel.open.at(d, j)))
                ranked.push_back(j);
        std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
            return scores.values.at(signal_row, a) > scores.values.at(signal_row, b);
        });

        const double equity_pre = book.cash + holdings_value(book, panel, d);
        double fees_today = 0.0;

        if (!ranked.empty()) {
            std::vector<std::size_t> rank_pos(nt, ranked.size());
            for (std::size_t pos = 0; pos < ranked.size(); ++pos) rank_pos[ranked[pos]] = pos;

            const std::size_t want = std::min(k, ranked.size());
            std::vector<char> in_top(nt, 0);
            for (std::size_t pos = 0; pos < want; ++pos) in_top[ranked[pos]] = 1;

            // Held names outside the top set, worst-ranked first.
            std::vector<std::size_t> held_outside;
            for (const auto& [j, sh] : book.shares) {
                if (sh <= 0.0) continue;
                if (!in_top[j] && !is_missing(panel.open.at(d, j))) held_outside.push_back(j);
            }
            std::stable_sort(held_outside.begin(), held_outside.end(),
                             [&](std::size_t a, std::size_t b) { return rank_pos[a] > rank_pos[b]; });
            const std::size_t n_sell =
                std::min<std::size_t>(static_cast<std::size_t>(config.drop_n), held_outside.size());

            for (std::size_t s = 0; s < n_sell; ++s) {
                const std::size_t j = held_outside[s];
                const double px = panel.open.at(d, j);
                const double sh = book.shares[j];
                const double proceeds = sh * px;
                const double fee = std::max(config.min_fee, proceeds * config.sell_cost);
                book.cash += proceeds - fee;
                fees_today += fee;
                book.shares.erase(j);
                result.cost_ledger.push_back(
                    {panel.dates[d], panel.tickers[j], 'S', sh, proceeds, fee});
            }

            // Buy the best-ranked non-held names until top_k names are held.
            std::vector<std::size_t> to_buy;
            std::size_t held_count = 0;
            for (const auto& [j, sh] : book.shares)
                if (sh > 0.0) ++held_count;
            for (std::size_t pos = 0; pos < want && held_count + to_buy.size() < k; ++pos) {
                const std::size_t j = ranked[pos];
                if (book.shares.count(j)) continue;
                to_buy.push_back(j);
            }
            if (!to_buy.empty()) {
                const double budget_each = book.cash / static_cast<double>(to_buy.size());
                for (std::size_t j : to_buy) {
                    const double px = panel.open.at(d, j);
                    double notional = budget_each / (1.0 + config.buy_cost);
                    double fee = notional * config.buy_cost;
                    if (fee < config.min_fee) {
                        notional = budget_each - config.min_fee;
                        fee = config.min_fee;
                    }
                    if (notional <= 0.0) continue;
                    const double sh = notional / px;
                    book.cash -= notional + fee;
                    fees_today += fee;
                    book.shares[j] += sh;
                    result.cost_ledger.push_back(
                        {panel.dates[d], panel.tickers[j], 'B', sh, notional, fee});
                    invested = true;
                }
            }
        }

        if (!invested) continue;  // nothing has ever been held; no return stream yet

        PositionSnapshot snap;
        snap.date = panel.dates[d];
        snap.cash = book.cash;
        for (const auto& [j, sh] : book.shares) snap.shares[panel.tickers[j]] = sh;
        result.positions.push_back(std::move(snap));

        // Gross growth of the post-trade book (fees added back as idle cash).
        const double cash_cf = book.cash + fees_today;
        double now_value = cash_cf;
        double next_value = cash_cf;
        for (const auto& [j, sh] : book.shares) {
            const double p0 = panel.open.at(d, j);
            const double p1 = panel.open.at(d + 1, j);
            if (is_missing(p0) || is_missing(p1)) {
                // Carry the stale mark when either open is missing.
                const double mark = is_missing(p0) ? 0.0 : p0;
                now_value += sh * mark;
                next_value += sh * mark;
                continue;
            }
            now_value += sh * p0;
            next_value += sh * p1;
        }
        const double gross = now_value > 0.0 ? next_value / now_value - 1.0 : 0.0;

        double bench_sum = 0.0;
        std::size_t bench_n = 0;
        for (std::size_t j = 0; j < nt; ++j) {
            const double p0 = panel.open.at(d, j);
            const double p1 = panel.open.at(d + 1, j);
            if (is_missing(p0) || is_missing(p1) || p0 <= 0.0) continue;
            bench_sum += p1 / p0 - 1.0;
            ++bench_n;
        }
        const double bench = bench_n ? bench_sum / static_cast<double>(bench_n) : 0.0;
        const double cost_return = equity_pre > 0.0 ? fees_today / equity_pre : 0.0;

        excess.push_back(gross - bench - cost_return);
        excess_dates.push_back(panel.dates[d]);
    }

    for (std::size_t i = 0; i < excess.size(); ++i)
        result.daily_excess.emplace_back(excess_dates[i], excess[i]);
    for (const TradeRecord& t : result.cost_ledger) result.total_fees += t.fee;

    if (!excess.empty()) {
        result.aer = aer(excess, config.periods_per_year);
        const double sd = sample_std(excess);
        result.ir = (is_missing(sd) || sd == 0.0)
                        ? missing()
                        : mean_of(excess) / sd * std::sqrt(config.periods_per_year);
    } else {
        result.aer = missing();
        result.ir = missing();
    }
    return result;
}

double aer(std::span<const double> daily_excess, int periods_per_year) {
    if (daily_excess.empty()) throw DataError("aer: empty series");
    return mean_of(daily_excess) * static_cast<double>(periods_per_year);
}

double ir(std::span<const double> daily_excess, int periods_per_year) {
    if (daily_excess.size() < 2) throw DataError("ir: needs at least 2 points");
    const double sd = sample_std(daily_excess);
    if (is_missing(sd) || sd == 0.0) throw DataError("ir: zero standard deviation");
    return mean_of(daily_excess) / sd * std::sqrt(static_cast<double>(periods_per_year));
}

}  // namespace alphamine

// Acceptance suite: one pass/fail line per criterion, non-zero exit on any
// failure. Tolerances are pinned in the assertions below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "alphamine/backtest.hpp"
#include "alphamine/evolve.hpp"
#include "test_support.hpp"

using namespace alphamine;
using namespace test_support;

namespace {

int g_failures = 0;

void report(int number, const char* label, bool pass, const std::string& detail = "") {
    std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", number, label,
                detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

template <typename Fn>
void run_criterion(int number, const char* label, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(number, label, false, std::string("exception: ") + e.what());
    }
}

double max_abs_diff(const std::vector<std::pair<Date, double>>& mine,
                    const std::vector<double>& oracle) {
    if (mine.size() != oracle.size()) return 1e9;
    double worst = 0.0;
    for (std::size_t i = 0; i < mine.size(); ++i)
        worst = std::max(worst, std::fabs(mine[i].second - oracle[i]));
    return worst;
}

// Evaluator mutant that centers each output column by its full-sample time
// mean: information from the future leaks into every dated value.
FactorMatrix leaky_evaluate(const Expr& e, const OhlcvPanel& p, const EvalOptions& o) {
    FactorMatrix f = evaluate(e, p, o);
    for (std::size_t j = 0; j < f.values.cols(); ++j) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t t = 0; t < f.values.rows(); ++t)
            if (!is_missing(f.values.at(t, j))) {
                sum += f.values.at(t, j);
                ++n;
            }
        if (!n) continue;
        for (std::size_t t = 0; t < f.values.rows(); ++t)
            if (!is_missing(f.values.at(t, j))) f.values.at(t, j) -= sum / static_cast<double>(n);
    }
    return f;
}

// IC of an expression on the trailing `suffix` dates of a panel, with the
// factor computed over the full history.
double suffix_ic(const Expr& expr, const OhlcvPanel& panel, const LabelMatrix& labels,
                 std::size_t suffix) {
    const FactorMatrix factor = evaluate(expr, panel);
    const std::size_t start = panel.n_dates() - suffix;
    FactorMatrix f2;
    LabelMatrix l2;
    f2.tickers = l2.tickers = panel.tickers;
    f2.dates.assign(panel.dates.begin() + static_cast<long>(start), panel.dates.end());
    l2.dates = f2.dates;
    l2.horizon = labels.horizon;
    f2.values = Matrix(suffix, panel.n_tickers());
    l2.values = Matrix(suffix, panel.n_tickers());
    for (std::size_t t = 0; t < suffix; ++t)
        for (std::size_t j = 0; j < panel.n_tickers(); ++j) {
            f2.values.at(t, j) = factor.values.at(start + t, j);
            l2.values.at(t, j) = labels.values.at(start + t, j);
        }
    return ic_series(f2, l2).mean;
}

}  // namespace

int main() {
    // ----------------------------------------------------------------------
    run_criterion(1, "metric oracle equivalence (200 panels, 1e-12)", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<const char*> probes = {
            "(high - low) / (volume + 1e-9)",
            "cs_rank(close - open)",
            "ts_mean(close, 3) - close",
        };
        double worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 200; ++seed) {
            const OhlcvPanel panel = random_panel_with_gaps(seed, 20, 10, 0.06);
            const LabelMatrix labels = forward_return(panel, 2);
            const Expr probe = parse_expr(probes[seed % probes.size()]);
            const FactorMatrix factor = evaluate(probe, panel);
            const MetricSeries mine = ic_series(factor, labels);
            const MetricSeries rmine = rank_ic_series(factor, labels);
            const OracleSeries ref = oracle_ic(factor, labels, false);
            const OracleSeries rref = oracle_ic(factor, labels, true);
            worst = std::max(worst, max_abs_diff(mine.per_date, ref.per_date));
            worst = std::max(worst, max_abs_diff(rmine.per_date, rref.per_date));
            worst = std::max(worst, std::fabs(mine.mean - ref.mean));
            worst = std::max(worst, std::fabs(rmine.mean - rref.mean));
            if (ref.stdev > 0.0)
                worst = std::max(worst, std::fabs(icir(mine) - ref.mean / ref.stdev));
            if (rref.stdev > 0.0)
                worst = std::max(worst, std::fabs(rank_icir(rmine) - rref.mean / rref.stdev));
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        char detail[128];
        std::snprintf(detail, sizeof detail, "max |diff| = %.3g, %.2fs", worst, secs);
        report(1, "metric oracle equivalence (200 panels, 1e-12)", worst <= 1e-12 && secs < 10.0,
               detail);
    });

    // ----------------------------------------------------------------------
    run_criterion(2, "MI calibration: MI(X,X)=4 bits, independent <= 0.05", [] {
        const std::size_t n = 10000;
        FactorMatrix f;
        LabelMatrix l;
        Date d = "2015-01-01";
        f.tickers = l.tickers = {"X"};
        f.values = Matrix(n, 1);
        l.values = Matrix(n, 1);
        Rng rng(1001);
        for (std::size_t i = 0; i < n; ++i) {
            f.dates.push_back(d);
            d = next_weekday(d);
            f.values.at(i, 0) = static_cast<double>(i) + 0.25 * rng.uniform();  // tie-free
        }
        l.dates = f.dates;
        l.values = f.values;
        const double self_mi = mutual_info(f, l, 16);

        Rng rng2(1002);
        for (std::size_t i = 0; i < n; ++i) {
            f.values.at(i, 0) = rng2.uniform();
            l.values.at(i, 0) = rng2.uniform();
        }
        const double indep_mi = mutual_info(f, l, 16);
        char detail[128];
        std::snprintf(detail, sizeof detail, "MI(X,X) = %.12f, MI(indep) = %.4f", self_mi,
                      indep_mi);
        report(2, "MI calibration: MI(X,X)=4 bits, independent <= 0.05",
               std::fabs(self_mi - 4.0) <= 1e-9 && indep_mi <= 0.05, detail);
    });

    // ----------------------------------------------------------------------
    run_criterion(3, "causality: 1000 exprs x 5 cutoffs bit-exact; leaky mutant caught", [] {
        const OhlcvPanel panel = synth_panel(33, 120, 20, 0.5);
        Rng rng(777);
        std::vector<Expr> exprs;
        exprs.reserve(1000);
        for (int i = 0; i < 1000; ++i) exprs.push_back(sample_expr(rng));

        int clean_failures = 0;
        for (std::size_t i = 0; i < exprs.size(); ++i)
            if (!causality_check(exprs[i], panel, 5, 9000 + i).passed) ++clean_failures;

        int mutant_detected = 0;
        for (std::size_t i = 0; i < exprs.size(); ++i)
            if (!causality_check(exprs[i], panel, 5, 9000 + i, {}, leaky_evaluate).passed)
                ++mutant_detected;

        char detail[160];
        std::snprintf(detail, sizeof detail,
                      "clean failures = %d/1000, mutant detected on %d/1000 expressions",
                      clean_failures, mutant_detected);
        report(3, "causality: 1000 exprs x 5 cutoffs bit-exact; leaky mutant caught",
               clean_failures == 0 && mutant_detected > 0, detail);
    });

    // ----------------------------------------------------------------------
    run_criterion(4, "classification: Elite subset of Qualified; floors enforced", [] {
        const ThresholdConfig defaults;
        const bool floors_ok =
            defaults.qualified_floors.ic == 0.005 && defaults.qualified_floors.rank_ic == 0.005 &&
            defaults.qualified_floors.icir == 0.05 && defaults.qualified_floors.rank_icir == 0.05 &&
            defaults.qualified_floors.mi == 0.02 && defaults.elite_floors.ic == 0.01 &&
            defaults.elite_floors.rank_ic == 0.01 && defaults.elite_floors.icir == 0.1 &&
            defaults.elite_floors.rank_icir == 0.1 && defaults.elite_floors.mi == 0.02;

        Rng rng(4004);
        bool subset_ok = true;
        bool floor_veto_ok = true;
        for (int trial = 0; trial < 500; ++trial) {
            const std::size_t n = 4 + rng.uniform_int(30);
            std::vector<FitnessReport> cohort(n);
            for (FitnessReport& r : cohort) {
                r.ic = rng.normal() * 0.05;
                r.rank_ic = rng.normal() * 0.05;
                r.icir = rng.normal() * 0.5;
                r.rank_icir = rng.normal() * 0.5;
                r.mi = std::fabs(rng.normal()) * 0.1;
            }
            ThresholdConfig cfg;
            cfg.qualified_percentile = 40.0 + rng.uniform() * 30.0;
            cfg.elite_percentile = cfg.qualified_percentile + 5.0 + rng.uniform() * 20.0;
            ThresholdConfig unreachable = cfg;
            unreachable.elite_percentile = 100.0;
            unreachable.elite_floors = MetricFloors{1e9, 1e9, 1e9, 1e9, 1e9};
            for (const FitnessReport& r : cohort) {
                if (classify(r, cohort, cfg) == Classification::Elite &&
                    classify(r, cohort, unreachable) != Classification::Qualified)
                    subset_ok = false;
            }
            // A member above every cohort percentile but below the MI floor
            // must never be promoted.
            FitnessReport probe;
            probe.ic = probe.rank_ic = 10.0;
            probe.icir = probe.rank_icir = 10.0;
            probe.mi = 0.019;  // below the 0.02 floor
            std::vector<FitnessReport> with_probe = cohort;
            with_probe.push_back(probe);
            if (classify(probe, with_probe, cfg) != Classification::None) floor_veto_ok = false;
        }
        report(4, "classification: Elite subset of Qualified; floors enforced",
               floors_ok && subset_ok && floor_veto_ok);
    });

    // ----------------------------------------------------------------------
    run_criterion(5, "schedule conformance: paper defaults, 24 generations", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const OhlcvPanel panel = synth_panel(1, 250, 50, 0.6);
        const LabelMatrix labels = forward_return(panel, 10);
        EvolutionConfig cfg;  // defaults: 80/32/x3, 24 = 3 x 8, inject 2, top-2
        cfg.seed = 1;
        cfg.threads = 4;
        MockBackend mock(1);
        const RunLog log = run_evolution(cfg, panel, labels, builtin_profiles(), mock);

        bool ok = !log.aborted && log.generations.size() == 24;
        std::string why = ok ? "" : "wrong generation count or aborted";
        int breeding_gens = 0;
        for (std::size_t g = 0; g < log.generations.size() && ok; ++g) {
            const GenerationRecord& r = log.generations[g];
            if (r.parents > 32) {
                ok = false;
                why = "parents cap violated";
            }
            const bool seed_gen = r.op_tallies.count("agent") || r.op_tallies.count("reseed");
            if (!seed_gen) {
                ++breeding_gens;
                int produced = 0;
                for (const char* key : {"mutation", "crossover", "crossover_mutation"}) {
                    auto it = r.op_tallies.find(key);
                    if (it != r.op_tallies.end()) produced += it->second;
                }
                int discarded = 0;
                if (auto it = r.rejects_by_stage.find("breeding"); it != r.rejects_by_stage.end())
                    discarded = it->second;
                if (produced + discarded < 96) {
                    ok = false;
                    why = "breeding tallies below target";
                }
                // elites carried forward verbatim from the previous record
                if (r.carried != log.generations[g - 1].carry_out) {
                    ok = false;
                    why = "carried set differs from the previous generation's selection";
                }
            }
            // max raw IC must not decay within a sub-cycle
            if (g > 0 && log.generations[g].subcycle == log.generations[g - 1].subcycle &&
                log.generations[g].best_ic < log.generations[g - 1].best_ic - 1e-12) {
                ok = false;
                why = "best raw IC decayed within a sub-cycle";
            }
        }
        if (ok && breeding_gens != 21) {  // 24 generations minus 3 seed generations
            ok = false;
            why = "unexpected breeding-generation count";
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= 300.0) {
            ok = false;
            why = "run exceeded 5 minutes";
        }
        char detail[160];
        std::snprintf(detail, sizeof detail, "%zu generations, %.1fs%s%s",
                      log.generations.size(), secs, why.empty() ? "" : "; ", why.c_str());
        report(5, "schedule conformance: paper defaults, 24 generations", ok, detail);
    });

    // ----------------------------------------------------------------------
    run_criterion(6, "signal recovery: planted alpha reaches the archive", [] {
        const OhlcvPanel full = synth_panel(42, 250, 50, 0.8);
        const LabelMatrix full_labels = forward_return(full, 10);
        const OhlcvPanel train = prefix(full, full.dates[189]);  // first 190 dates
        const LabelMatrix train_labels = forward_return(train, 10);

        EvolutionConfig cfg;
        cfg.initial_pool = 80;
        cfg.parent_pool = 32;
        cfg.children_multiplier = 3;
        cfg.generations = 8;
        cfg.subcycles = 2;
        cfg.gens_per_subcycle = 4;
        cfg.inject_every = 2;
        cfg.inject_count = 8;
        cfg.seed = 6;
        cfg.threads = 4;
        cfg.seed_exprs = {planted_signal_text()};
        MockBackend mock(6);
        const RunLog log = run_evolution(cfg, train, train_labels, builtin_profiles(), mock);

        const std::string planted = print_expr(parse_expr(planted_signal_text()));
        bool planted_in_archive = false;
        for (const ArchiveEntry& e : log.archive) {
            if (e.expr == planted) planted_in_archive = true;
            // or any descendant of the warm-start candidate
            std::vector<std::string> frontier = {e.id};
            std::set<std::string> seen;
            while (!frontier.empty() && !planted_in_archive) {
                const std::string id = frontier.back();
                frontier.pop_back();
                if (!seen.insert(id).second) continue;
                if (id == "seed0") planted_in_archive = true;
                auto it = log.lineage.find(id);
                if (it != log.lineage.end())
                    for (const std::string& parent : it->second) frontier.push_back(parent);
            }
            if (planted_in_archive) break;
        }

        double best_holdout_ic = -1.0;
        for (const ArchiveEntry& e : log.archive)
            best_holdout_ic =
                std::max(best_holdout_ic, suffix_ic(parse_expr(e.expr), full, full_labels, 60));

        char detail[160];
        std::snprintf(detail, sizeof detail, "archive %zu, planted lineage %s, holdout IC %.3f",
                      log.archive.size(), planted_in_archive ? "present" : "missing",
                      best_holdout_ic);
        report(6, "signal recovery: planted alpha reaches the archive",
               planted_in_archive && best_holdout_ic >= 0.30, detail);
    });

    // ----------------------------------------------------------------------
    run_criterion(7, "backtest accounting: hand fixture and conservation", [] {
        // Hand fixture: 3 tickers x 4 dates, top_k 2, drop_n 1; the expected
        // numbers below are derived manually from the documented trade rules.
        OhlcvPanel p;
        p.tickers = {"A", "B", "C"};
        Date d = "2021-06-01";
        const double opens[4][3] = {
            {100, 100, 100}, {100, 102, 98}, {101, 103, 101}, {102, 101, 105}};
        p.open = p.high = p.low = p.close = p.volume = Matrix(4, 3);
        for (std::size_t i = 0; i < 4; ++i) {
            p.dates.push_back(d);
            d = next_weekday(d);
            for (std::size_t j = 0; j < 3; ++j) {
                p.open.at(i, j) = opens[i][j];
                p.high.at(i, j) = opens[i][j];
                p.low.at(i, j) = opens[i][j];
                p.close.at(i, j) = opens[i][j];
                p.volume.at(i, j) = 1000.0;
            }
        }
        ScoreMatrix s;
        s.dates = p.dates;
        s.tickers = p.tickers;
        s.values = Matrix(4, 3);
        const double score_rows[4][3] = {{3, 2, 1}, {1, 2, 3}, {1, 3, 2}, {0, 0, 0}};
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 3; ++j) s.values.at(i, j) = score_rows[i][j];

        StrategyConfig cfg;
        cfg.top_k = 2;
        cfg.drop_n = 1;
        cfg.initial_cash = 100000.0;

        // Hand table.
        const double notional = 50000.0 / 1.0005;
        const double buy_fee = notional * 0.0005;
        const double shares_a = notional / 100.0;
        const double shares_b = notional / 102.0;
        const double fees_d1 = 2.0 * buy_fee;
        const double now1 = fees_d1 + shares_a * 100.0 + shares_b * 102.0;
        const double next1 = fees_d1 + shares_a * 101.0 + shares_b * 103.0;
        const double bench1 =
            ((101.0 / 100.0 - 1.0) + (103.0 / 102.0 - 1.0) + (101.0 / 98.0 - 1.0)) / 3.0;
        const double excess1 = (next1 / now1 - 1.0) - bench1 - fees_d1 / 100000.0;
        const double proceeds_a = shares_a * 101.0;
        const double sell_fee = proceeds_a * 0.0015;
        const double notional_c = (proceeds_a - sell_fee) / 1.0005;
        const double buy_fee_c = notional_c * 0.0005;
        const double shares_c = notional_c / 101.0;
        const double fees_d2 = sell_fee + buy_fee_c;
        const double equity_pre2 = shares_a * 101.0 + shares_b * 103.0;
        const double now2 = fees_d2 + shares_b * 103.0 + shares_c * 101.0;
        const double next2 = fees_d2 + shares_b * 101.0 + shares_c * 105.0;
        const double bench2 =
            ((102.0 / 101.0 - 1.0) + (101.0 / 103.0 - 1.0) + (105.0 / 101.0 - 1.0)) / 3.0;
        const double excess2 = (next2 / now2 - 1.0) - bench2 - fees_d2 / equity_pre2;

        const BacktestResult r = simulate(s, p, cfg);
        bool ok = r.daily_excess.size() == 2 &&
                  std::fabs(r.daily_excess[0].second - excess1) <= 1e-9 &&
                  std::fabs(r.daily_excess[1].second - excess2) <= 1e-9 &&
                  r.cost_ledger.size() == 4;
        for (const TradeRecord& t : r.cost_ledger)
            if (t.fee < 5.0) ok = false;
        ok = ok && r.positions.size() == 2 && r.positions[0].shares.count("A") &&
             r.positions[1].shares.count("C") &&
             std::fabs(r.positions[1].shares.at("C") - shares_c) <= 1e-9;

        // Conservation over 100 random simulations.
        Rng rng(7007);
        double worst_breach = 0.0;
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            const OhlcvPanel rp = random_panel(seed, 18, 7);
            ScoreMatrix rs;
            rs.dates = rp.dates;
            rs.tickers = rp.tickers;
            rs.values = Matrix(rp.n_dates(), rp.n_tickers());
            for (std::size_t i = 0; i < rs.values.size(); ++i)
                rs.values.data()[i] = rng.normal();
            StrategyConfig rcfg;
            rcfg.top_k = 3;
            rcfg.drop_n = 1;
            rcfg.initial_cash = 1e6;
            const BacktestResult rr = simulate(rs, rp, rcfg);
            double cum_fees = 0.0, cum_pnl = 0.0;
            std::size_t ledger_idx = 0;
            for (std::size_t i = 0; i < rr.positions.size(); ++i) {
                const PositionSnapshot& snap = rr.positions[i];
                const std::size_t day = static_cast<std::size_t>(
                    std::find(rp.dates.begin(), rp.dates.end(), snap.date) - rp.dates.begin());
                while (ledger_idx < rr.cost_ledger.size() &&
                       rr.cost_ledger[ledger_idx].date <= snap.date)
                    cum_fees += rr.cost_ledger[ledger_idx++].fee;
                double marked = snap.cash;
                for (const auto& [ticker, sh] : snap.shares) {
                    const std::size_t j = static_cast<std::size_t>(
                        std::find(rp.tickers.begin(), rp.tickers.end(), ticker) -
                        rp.tickers.begin());
                    marked += sh * rp.open.at(day, j);
                }
                worst_breach = std::max(
                    worst_breach, std::fabs(marked - (rcfg.initial_cash - cum_fees + cum_pnl)));
                for (const auto& [ticker, sh] : snap.shares) {
                    const std::size_t j = static_cast<std::size_t>(
                        std::find(rp.tickers.begin(), rp.tickers.end(), ticker) -
                        rp.tickers.begin());
                    cum_pnl += sh * (rp.open.at(day + 1, j) - rp.open.at(day, j));
                }
            }
        }
        const bool conserve_ok = worst_breach <= 1e-6 * 1e6;
        char detail[128];
        std::snprintf(detail, sizeof detail, "fixture %s, worst conservation breach %.3g",
                      ok ? "exact" : "MISMATCH", worst_breach);
        report(7, "backtest accounting: hand fixture and conservation", ok && conserve_ok, detail);
    });

    // ----------------------------------------------------------------------
    run_criterion(8, "formula spot checks: AER and IR scaling", [] {
        std::vector<double> flat(10, 0.001);
        const double aer_flat = aer(flat, 252);
        const double half_spread = 0.01 / std::sqrt(2.0);
        std::vector<double> two = {0.001 + half_spread, 0.001 - half_spread};
        const double ir_two = ir(two, 252);
        char detail[128];
        std::snprintf(detail, sizeof detail, "aer = %.15f, ir = %.6f", aer_flat, ir_two);
        report(8, "formula spot checks: AER and IR scaling",
               std::fabs(aer_flat - 0.252) <= 1e-12 && std::fabs(ir_two - 1.5875) <= 1e-4, detail);
    });

    // ----------------------------------------------------------------------
    run_criterion(9, "determinism: identical seeds give identical logs", [] {
        const OhlcvPanel panel = synth_panel(12, 120, 20, 0.7);
        const LabelMatrix labels = forward_return(panel, 10);
        EvolutionConfig cfg;
        cfg.initial_pool = 24;
        cfg.parent_pool = 8;
        cfg.children_multiplier = 2;
        cfg.generations = 4;
        cfg.subcycles = 1;
        cfg.gens_per_subcycle = 4;
        cfg.inject_count = 4;
        cfg.seed = 99;
        cfg.threads = 4;
        auto run_once = [&]() {
            MockBackend mock(99);
            std::string dump;
            run_evolution(cfg, panel, labels, builtin_profiles(), mock,
                          [&](const nlohmann::json& j) {
                              nlohmann::json c = j;
                              c.erase("elapsed_ms");
                              dump += c.dump() + "\n";
                          });
            return dump;
        };
        const std::string a = run_once();
        const std::string b = run_once();
        char detail[64];
        std::snprintf(detail, sizeof detail, "%zu log bytes", a.size());
        report(9, "determinism: identical seeds give identical logs", !a.empty() && a == b,
               detail);
    });

    // ----------------------------------------------------------------------
    run_criterion(10, "listing regression: parse, pipeline, seeded mutation", [] {
        const OhlcvPanel panel = synth_panel(10, 120, 12, 0.5);
        MockBackend pipeline_mock(5);
        AlphaCandidate cand;
        cand.id = "listing1";
        cand.name = "factor_upward_impact_per_vol";
        cand.expr_text = "(high - close) / (volume + 1e-9)";
        cand.rationale = "Price rise per unit of traded volume; thin-liquidity proxy.";
        cand.origin = "AgentLiquidity";
        const AlphaCandidate accepted = quality_pipeline(cand, panel, pipeline_mock);

        MockBackend mutation_mock(8);
        Rng rng(1);
        const auto draft = mutate(cand, mutation_mock, rng);
        const bool mutation_ok =
            draft.has_value() && draft->expr_text == "(high - low) / (volume + 1e-9)";

        char detail[160];
        std::snprintf(detail, sizeof detail, "pipeline %s, mutation -> %s",
                      accepted.status == CandidateStatus::Accepted ? "Accepted" : "rejected",
                      draft ? draft->expr_text.c_str() : "(none)");
        report(10, "listing regression: parse, pipeline, seeded mutation",
               accepted.status == CandidateStatus::Accepted && mutation_ok, detail);
    });

    std::printf("%s: %d/10 criteria passed\n",
                g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", 10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}

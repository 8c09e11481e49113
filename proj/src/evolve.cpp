#include "alphamine/evolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace alphamine {

void EvolutionConfig::check() const {
    if (subcycles < 0 || gens_per_subcycle < 0 || generations < 0)
        throw ConfigError("generation counts must be non-negative");
    if (subcycles * gens_per_subcycle != generations)
        throw ConfigError("subcycles * gens_per_subcycle must equal generations");
    if (initial_pool < 1 || parent_pool < 1) throw ConfigError("pool sizes must be >= 1");
    if (children_multiplier < 1) throw ConfigError("children_multiplier must be >= 1");
    if (inject_every < 1) throw ConfigError("inject_every must be >= 1");
    if (inject_count < 0 || elites_forward < 0) throw ConfigError("counts must be >= 0");
    if (num_per_request < 1) throw ConfigError("num_per_request must be >= 1");
    if (nan_max < 0.0 || nan_max > 1.0) throw ConfigError("nan_max must lie in [0, 1]");
    if (mi_bins < 2) throw ConfigError("mi_bins must be >= 2");
    thresholds.check();
}

nlohmann::json to_json(const GenerationRecord& r) {
    return nlohmann::json{
        {"type", "generation"},
        {"subcycle", r.subcycle},
        {"generation", r.generation},
        {"cohort", r.cohort},
        {"qualified", r.qualified},
        {"elite", r.elite},
        {"parents", r.parents},
        {"injected", r.injected},
        {"best_ic", r.best_ic},
        {"mean_ic", r.mean_ic},
        {"best_icir", r.best_icir},
        {"best_rank_ic", r.best_rank_ic},
        {"best_rank_icir", r.best_rank_icir},
        {"mi_best", r.best_mi},
        {"op_tallies", r.op_tallies},
        {"rejects_by_stage", r.rejects_by_stage},
        {"carried", r.carried},
        {"carry_out", r.carry_out},
        {"elapsed_ms", r.elapsed_ms},
    };
}

nlohmann::json to_json(const ArchiveEntry& e) {
    return nlohmann::json{
        {"id", e.id},           {"name", e.name},
        {"expr", e.expr},       {"rationale", e.rationale},
        {"ic", e.ic},           {"icir", e.icir},
        {"rank_ic", e.rank_ic}, {"rank_icir", e.rank_icir},
        {"mi", e.mi},           {"generation", e.generation},
    };
}

namespace {

struct MetricView {
    const char* label;
    double FitnessReport::*field;
};

constexpr MetricView kMetrics[] = {
    {"ic", &FitnessReport::ic},
    {"icir", &FitnessReport::icir},
    {"rank_ic", &FitnessReport::rank_ic},
    {"rank_icir", &FitnessReport::rank_icir},
    {"mi", &FitnessReport::mi},
};

// Mean of per-metric cohort z-scores; degenerate metrics contribute 0.
std::vector<double> zscore_fitness(const std::vector<ScoredCandidate>& cohort) {
    std::vector<double> out(cohort.size(), 0.0);
    for (const MetricView& m : kMetrics) {
        std::vector<double> values;
        values.reserve(cohort.size());
        for (const ScoredCandidate& sc : cohort) values.push_back(sc.report.*(m.field));
        const double mu = mean_of(values);
        const double sd = sample_std(values);
        if (is_missing(sd) || sd == 0.0) continue;
        for (std::size_t i = 0; i < cohort.size(); ++i)
            out[i] += (values[i] - mu) / sd;
    }
    for (double& v : out) v /= static_cast<double>(std::size(kMetrics));
    return out;
}

}  // namespace

std::vector<std::size_t> select_parents(const std::vector<ScoredCandidate>& cohort,
                                        int parent_pool) {
    const std::vector<double> fitness = zscore_fitness(cohort);
    std::vector<std::size_t> qualified;
    for (std::size_t i = 0; i < cohort.size(); ++i)
        if (cohort[i].report.classification != Classification::None) qualified.push_back(i);
    std::sort(qualified.begin(), qualified.end(), [&](std::size_t a, std::size_t b) {
        if (fitness[a] != fitness[b]) return fitness[a] > fitness[b];
        return cohort[a].candidate.id < cohort[b].candidate.id;
    });
    if (qualified.size() > static_cast<std::size_t>(parent_pool))
        qualified.resize(static_cast<std::size_t>(parent_pool));
    return qualified;
}

std::vector<AlphaCandidate> breed(const std::vector<ScoredCandidate>& parents,
                                  LlmBackend& backend, int target, Rng& rng, BreedTally& tally) {
    if (parents.empty()) throw ConfigError("breed: needs at least one parent");
    if (target < 1) throw ConfigError("breed: target must be >= 1");

    const int base = target / 3;
    const int rem = target % 3;
    const int n_mut = base + (rem >= 1 ? 1 : 0);
    const int n_cross = base + (rem >= 2 ? 1 : 0);
    const int n_cross_mut = base;

    auto pick_parent = [&]() -> const ScoredCandidate& {
        return parents[rng.uniform_int(parents.size())];
    };
    const bool single_parent = parents.size() == 1;

    std::vector<AlphaCandidate> out;
    out.reserve(static_cast<std::size_t>(target));

    auto push_draft = [&](const CandidateDraft& draft, const char* origin,
                          std::vector<std::string> parent_ids) {
        AlphaCandidate cand;
        cand.name = draft.name;
        cand.rationale = draft.rationale;
        cand.expr_text = draft.expr_text;
        cand.origin = origin;
        cand.parents = std::move(parent_ids);
        out.push_back(std::move(cand));
    };

    for (int k = 0; k < n_mut; ++k) {
        const ScoredCandidate& p = pick_parent();
        if (auto draft = mutate(p.candidate, backend, rng)) {
            push_draft(*draft, "mutation", {p.candidate.id});
            ++tally.mutation;
        } else {
            ++tally.discarded;
        }
    }
    for (int k = 0; k < n_cross; ++k) {
        if (single_parent) {
            ++tally.fallback_to_mutation;
            const ScoredCandidate& p = pick_parent();
            if (auto draft = mutate(p.candidate, backend, rng)) {
                push_draft(*draft, "mutation", {p.candidate.id});
                ++tally.mutation;
            } else {
                ++tally.discarded;
            }
            continue;
        }
        const ScoredCandidate& a = pick_parent();
        const ScoredCandidate& b = pick_parent();
        if (auto draft = crossover(a.candidate, b.candidate, backend, rng)) {
            push_draft(*draft, "crossover", {a.candidate.id, b.candidate.id});
            ++tally.crossover;
        } else {
            ++tally.discarded;
        }
    }
    for (int k = 0; k < n_cross_mut; ++k) {
        if (single_parent) {
            ++tally.fallback_to_mutation;
            const ScoredCandidate& p = pick_parent();
            if (auto draft = mutate(p.candidate, backend, rng)) {
                push_draft(*draft, "mutation", {p.candidate.id});
                ++tally.mutation;
            } else {
                ++tally.discarded;
            }
            continue;
        }
        const ScoredCandidate& a = pick_parent();
        const ScoredCandidate& b = pick_parent();
        auto crossed = crossover(a.candidate, b.candidate, backend, rng);
        if (!crossed) {
            ++tally.discarded;
            continue;
        }
        AlphaCandidate mid;
        mid.name = crossed->name;
        mid.rationale = crossed->rationale;
        mid.expr_text = crossed->expr_text;
        if (auto draft = mutate(mid, backend, rng)) {
            push_draft(*draft, "crossover_mutation", {a.candidate.id, b.candidate.id});
            ++tally.crossover_mutation;
        } else {
            ++tally.discarded;
        }
    }
    return out;
}

namespace {

struct Orchestrator {
    Orchestrator(const EvolutionConfig& config_in, const OhlcvPanel& panel_in,
                 const LabelMatrix& labels_in, const std::vector<AgentProfile>& profiles_in,
                 LlmBackend& backend_in, const LogSink& sink_in)
        : config(config_in),
          panel(panel_in),
          labels(labels_in),
          profiles(profiles_in),
          backend(backend_in),
          sink(sink_in),
          rng(mix_seed(config_in.seed, 0xe7011e5ULL)) {}

    const EvolutionConfig& config;
    const OhlcvPanel& panel;
    const LabelMatrix& labels;
    const std::vector<AgentProfile>& profiles;
    LlmBackend& backend;
    const LogSink& sink;

    RunLog log;
    Rng rng;
    std::size_t profile_cursor = 0;
    FeedbackSummary feedback;
    std::map<std::string, ArchiveEntry> archive_by_expr;

    void emit(const nlohmann::json& j) {
        if (sink) sink(j);
    }

    PipelineConfig pipeline_config() const {
        PipelineConfig pc;
        pc.nan_max = config.nan_max;
        pc.max_repairs = config.max_repairs;
        pc.seed = config.seed;
        return pc;
    }

    // One agent call; returns drafts (possibly empty). Transport failures are
    // reported through `backend_failures`.
    std::vector<AlphaCandidate> agent_round(int n, int& backend_failures) {
        const AgentProfile& profile = profiles[profile_cursor % profiles.size()];
        ++profile_cursor;
        const ParaphraseMode mode = kAllParaphraseModes[rng.uniform_int(5)];
        std::vector<AlphaCandidate> drafts;
        try {
            const PromptBundle bundle =
                build_prompt(profile, mode, feedback, column_schema_text(), n, rng);
            const ExtractResult extracted = extract_candidates(backend.generate(bundle));
            for (const CandidateDraft& d : extracted.drafts) {
                AlphaCandidate cand;
                cand.name = d.name;
                cand.rationale = d.rationale;
                cand.expr_text = d.expr_text;
                cand.origin = profile.name;
                drafts.push_back(std::move(cand));
            }
        } catch (const BackendError&) {
            ++backend_failures;
        }
        return drafts;
    }

    // Pipeline + fitness scoring for a batch of drafts; accepted candidates
    // are appended to `cohort`, rejections tallied into `record`.
    void admit(std::vector<AlphaCandidate> drafts, int generation,
               std::vector<ScoredCandidate>& cohort, GenerationRecord& record) {
        const PipelineConfig pc = pipeline_config();
        std::vector<AlphaCandidate> processed(drafts.size());
        parallel_for(drafts.size(), config.threads, [&](std::size_t i) {
            AlphaCandidate cand = drafts[i];
            cand.generation = generation;
            processed[i] = quality_pipeline(std::move(cand), panel, backend, pc);
        });
        // Scoring is also parallel; classification happens against the full
        // cohort later.
        std::vector<ScoredCandidate> scored(processed.size());
        std::vector<char> ok(processed.size(), 0);
        parallel_for(processed.size(), config.threads, [&](std::size_t i) {
            AlphaCandidate& cand = processed[i];
            if (cand.status != CandidateStatus::Accepted) return;
            try {
                FitnessReport report;
                const FactorMatrix factor = evaluate(*cand.expr, panel, pc.eval);
                const MetricSeries ics = ic_series(factor, labels);
                const MetricSeries rics = rank_ic_series(factor, labels);
                report.ic = ics.mean;
                report.icir = icir(ics);
                report.rank_ic = rics.mean;
                report.rank_icir = rank_icir(rics);
                report.mi = mutual_info(factor, labels, config.mi_bins);
                report.nan_ratio = nan_ratio(factor);
                scored[i] = ScoredCandidate{std::move(cand), report};
                ok[i] = 1;
            } catch (const DataError& e) {
                cand.status = CandidateStatus::Rejected;
                cand.reject_stage = "fitness";
                cand.reject_reason = e.what();
            }
        });
        for (std::size_t i = 0; i < processed.size(); ++i) {
            if (ok[i]) {
                log.lineage[scored[i].candidate.id] = scored[i].candidate.parents;
                cohort.push_back(std::move(scored[i]));
            } else {
                ++record.rejects_by_stage[processed[i].reject_stage];
                remember_rejection(processed[i]);
            }
        }
    }

    std::vector<AlphaCandidate> recent_rejects;

    void remember_rejection(const AlphaCandidate& cand) {
        recent_rejects.push_back(cand);
        if (recent_rejects.size() > 64)
            recent_rejects.erase(recent_rejects.begin(), recent_rejects.begin() + 32);
    }

    void classify_cohort(std::vector<ScoredCandidate>& cohort) {
        std::vector<FitnessReport> reports;
        reports.reserve(cohort.size());
        for (const ScoredCandidate& sc : cohort) reports.push_back(sc.report);
        for (std::size_t i = 0; i < cohort.size(); ++i)
            cohort[i].report.classification = classify(reports[i], reports, config.thresholds);
    }

    void archive_elites(const std::vector<ScoredCandidate>& cohort) {
        for (const ScoredCandidate& sc : cohort) {
            if (sc.report.classification != Classification::Elite) continue;
            const std::string key = sc.candidate.expr_text;  // canonical after acceptance
            if (archive_by_expr.count(key)) continue;
            ArchiveEntry entry;
            entry.id = sc.candidate.id;
            entry.name = sc.candidate.name;
            entry.expr = key;
            entry.rationale = sc.candidate.rationale;
            entry.ic = sc.report.ic;
            entry.icir = sc.report.icir;
            entry.rank_ic = sc.report.rank_ic;
            entry.rank_icir = sc.report.rank_icir;
            entry.mi = sc.report.mi;
            entry.generation = sc.candidate.generation;
            archive_by_expr.emplace(key, std::move(entry));
        }
    }

    // Elites to carry forward: the top elites_forward by z-score among Elite
    // members, always including the cohort's best raw-IC candidate so the
    // per-generation max IC cannot decay within a sub-cycle.
    std::vector<ScoredCandidate> pick_carry(const std::vector<ScoredCandidate>& cohort) {
        if (cohort.empty() || config.elites_forward == 0) return {};
        const std::vector<double> fitness = zscore_fitness(cohort);
        std::size_t champion = 0;
        for (std::size_t i = 1; i < cohort.size(); ++i)
            if (cohort[i].report.ic > cohort[champion].report.ic) champion = i;
        std::vector<std::size_t> elites;
        for (std::size_t i = 0; i < cohort.size(); ++i)
            if (cohort[i].report.classification == Classification::Elite) elites.push_back(i);
        std::sort(elites.begin(), elites.end(), [&](std::size_t a, std::size_t b) {
            if (fitness[a] != fitness[b]) return fitness[a] > fitness[b];
            return cohort[a].candidate.id < cohort[b].candidate.id;
        });
        std::vector<std::size_t> chosen;
        chosen.push_back(champion);
        for (std::size_t idx : elites) {
            if (chosen.size() >= static_cast<std::size_t>(config.elites_forward)) break;
            if (idx != champion) chosen.push_back(idx);
        }
        std::vector<ScoredCandidate> out;
        for (std::size_t idx : chosen) out.push_back(cohort[idx]);
        return out;
    }

    RunLog run() {
        emit(nlohmann::json{{"type", "init"},
                            {"seed", config.seed},
                            {"generations", config.generations},
                            {"subcycles", config.subcycles},
                            {"initial_pool", config.initial_pool},
                            {"parent_pool", config.parent_pool},
                            {"children_target", config.children_multiplier * config.parent_pool},
                            {"panel_dates", panel.n_dates()},
                            {"panel_tickers", panel.n_tickers()},
                            {"backend", backend.name()}});

        int global_gen = 0;
        long draft_counter = 0;

        for (int sc = 0; sc < config.subcycles; ++sc) {
            std::vector<ScoredCandidate> parents;
            std::vector<ScoredCandidate> carry;

            for (int g = 0; g < config.gens_per_subcycle; ++g) {
                ++global_gen;
                const auto t0 = std::chrono::steady_clock::now();
                GenerationRecord record;
                record.subcycle = sc;
                record.generation = global_gen;

                std::vector<AlphaCandidate> drafts;
                int backend_failures = 0;

                if (g == 0) {
                    // Seed generation: warm-start expressions first (first
                    // sub-cycle only), then task agents until the quota.
                    if (sc == 0) {
                        int k = 0;
                        for (const std::string& text : config.seed_exprs) {
                            AlphaCandidate cand;
                            cand.id = "seed" + std::to_string(k++);
                            cand.name = "factor_seed_" + std::to_string(k);
                            cand.rationale = "Warm-start candidate supplied by configuration.";
                            cand.expr_text = text;
                            cand.origin = "seed";
                            drafts.push_back(std::move(cand));
                        }
                    }
                    while (static_cast<int>(drafts.size()) < config.initial_pool) {
                        auto round = agent_round(config.num_per_request, backend_failures);
                        if (round.empty() && backend_failures > 2 * static_cast<int>(profiles.size()))
                            return abort_run("backend persistently failing during seeding",
                                             record);
                        for (AlphaCandidate& cand : round) drafts.push_back(std::move(cand));
                    }
                    record.op_tallies["agent"] = static_cast<int>(drafts.size());
                } else {
                    BreedTally tally;
                    if (parents.empty()) {
                        // Documented degenerate path: no qualified parents and
                        // nothing carried; reseed from the task agents.
                        while (static_cast<int>(drafts.size()) < config.initial_pool) {
                            auto round = agent_round(config.num_per_request, backend_failures);
                            if (round.empty() &&
                                backend_failures > 2 * static_cast<int>(profiles.size()))
                                return abort_run("backend persistently failing during reseed",
                                                 record);
                            for (AlphaCandidate& cand : round) drafts.push_back(std::move(cand));
                        }
                        record.op_tallies["reseed"] = static_cast<int>(drafts.size());
                    } else {
                        const int target = config.children_multiplier * config.parent_pool;
                        try {
                            drafts = breed(parents, backend, target, rng, tally);
                        } catch (const BackendError& e) {
                            return abort_run(std::string("backend failed during breeding: ") +
                                                 e.what(),
                                             record);
                        }
                        record.op_tallies["mutation"] = tally.mutation;
                        record.op_tallies["crossover"] = tally.crossover;
                        record.op_tallies["crossover_mutation"] = tally.crossover_mutation;
                        if (tally.fallback_to_mutation)
                            record.op_tallies["crossover_fallback"] = tally.fallback_to_mutation;
                        if (tally.discarded) record.rejects_by_stage["breeding"] = tally.discarded;
                    }
                    if (g % config.inject_every == 0 && config.inject_count > 0) {
                        std::vector<AlphaCandidate> injected;
                        while (static_cast<int>(injected.size()) < config.inject_count) {
                            auto round = agent_round(config.num_per_request, backend_failures);
                            if (round.empty() &&
                                backend_failures > 2 * static_cast<int>(profiles.size()))
                                return abort_run("backend persistently failing during injection",
                                                 record);
                            for (AlphaCandidate& cand : round) injected.push_back(std::move(cand));
                        }
                        record.injected = static_cast<int>(injected.size());
                        for (AlphaCandidate& cand : injected) drafts.push_back(std::move(cand));
                    }
                }

                for (AlphaCandidate& cand : drafts)
                    if (cand.id.empty())
                        cand.id = "g" + std::to_string(global_gen) + "c" +
                                  std::to_string(draft_counter++);

                std::vector<ScoredCandidate> cohort;
                admit(std::move(drafts), global_gen, cohort, record);

                // Elitism: previous generation's carried candidates join the
                // cohort verbatim (their metrics are already known).
                for (const ScoredCandidate& sc_carried : carry) {
                    record.carried.push_back(sc_carried.candidate.expr_text);
                    cohort.push_back(sc_carried);
                }

                if (!cohort.empty()) classify_cohort(cohort);
                archive_elites(cohort);

                const std::vector<std::size_t> parent_idx =
                    select_parents(cohort, config.parent_pool);
                std::vector<ScoredCandidate> next_parents;
                for (std::size_t idx : parent_idx) next_parents.push_back(cohort[idx]);
                carry = pick_carry(cohort);
                for (const ScoredCandidate& sc_out : carry)
                    record.carry_out.push_back(sc_out.candidate.expr_text);
                if (next_parents.empty() && !carry.empty()) next_parents = carry;
                parents = std::move(next_parents);

                record.cohort = static_cast<int>(cohort.size());
                record.parents = static_cast<int>(parents.size());
                for (const ScoredCandidate& sc2 : cohort) {
                    if (sc2.report.classification != Classification::None) ++record.qualified;
                    if (sc2.report.classification == Classification::Elite) ++record.elite;
                }
                if (!cohort.empty()) {
                    double sum_ic = 0.0;
                    record.best_ic = record.best_icir = record.best_rank_ic =
                        record.best_rank_icir = record.best_mi =
                            -std::numeric_limits<double>::infinity();
                    for (const ScoredCandidate& sc2 : cohort) {
                        sum_ic += sc2.report.ic;
                        record.best_ic = std::max(record.best_ic, sc2.report.ic);
                        record.best_icir = std::max(record.best_icir, sc2.report.icir);
                        record.best_rank_ic = std::max(record.best_rank_ic, sc2.report.rank_ic);
                        record.best_rank_icir =
                            std::max(record.best_rank_icir, sc2.report.rank_icir);
                        record.best_mi = std::max(record.best_mi, sc2.report.mi);
                    }
                    record.mean_ic = sum_ic / static_cast<double>(cohort.size());
                }
                record.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::steady_clock::now() - t0)
                                        .count();

                // Refresh adaptive feedback for the next round of prompts.
                refresh_feedback(cohort);

                log.generations.push_back(record);
                emit(to_json(record));
            }
        }
        finish_archive();
        return std::move(log);
    }

    void refresh_feedback(const std::vector<ScoredCandidate>& cohort) {
        std::vector<std::size_t> order(cohort.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        const std::vector<double> fitness = zscore_fitness(cohort);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (fitness[a] != fitness[b]) return fitness[a] > fitness[b];
            return cohort[a].candidate.id < cohort[b].candidate.id;
        });
        std::vector<std::pair<AlphaCandidate, FitnessReport>> top;
        for (std::size_t i = 0; i < order.size() && top.size() < 2; ++i) {
            const ScoredCandidate& sc = cohort[order[i]];
            if (sc.report.classification != Classification::None)
                top.emplace_back(sc.candidate, sc.report);
        }
        std::vector<AlphaCandidate> worst;
        for (auto it = recent_rejects.rbegin(); it != recent_rejects.rend() && worst.size() < 2;
             ++it)
            worst.push_back(*it);
        feedback = summarize_feedback(top, worst);
    }

    RunLog abort_run(const std::string& reason, const GenerationRecord& partial) {
        log.aborted = true;
        log.abort_reason = reason;
        log.generations.push_back(partial);
        finish_archive();
        emit(nlohmann::json{{"type", "abort"}, {"reason", reason}});
        return std::move(log);
    }

    void finish_archive() {
        for (auto& [expr, entry] : archive_by_expr) log.archive.push_back(entry);
        std::sort(log.archive.begin(), log.archive.end(),
                  [](const ArchiveEntry& a, const ArchiveEntry& b) {
                      if (a.generation != b.generation) return a.generation < b.generation;
                      return a.id < b.id;
                  });
    }
};

}  // namespace

RunLog run_evolution(const EvolutionConfig& config, const OhlcvPanel& panel,
                     const LabelMatrix& labels, const std::vector<AgentProfile>& profiles,
                     LlmBackend& backend, const LogSink& sink) {
    config.check();
    if (profiles.empty()) throw ConfigError("run_evolution: no agent profiles");
    if (panel.dates != labels.dates || panel.tickers != labels.tickers)
        throw DataError("run_evolution: panel and labels are misaligned");
    Orchestrator orch(config, panel, labels, profiles, backend, sink);
    return orch.run();
}

}  // namespace alphamine

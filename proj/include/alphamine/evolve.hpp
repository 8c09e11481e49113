// evolve.hpp — the generational orchestrator: seeding from task agents,
// selection, breeding, injection, elitism and sub-cycles.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "alphamine/agents.hpp"

namespace alphamine {

struct EvolutionConfig {
    int initial_pool = 80;        // minimum task-agent candidates per sub-cycle seed
    int parent_pool = 32;         // qualified candidates retained as parents
    int children_multiplier = 3;  // children target = multiplier * parent_pool
    int generations = 24;         // total generation records (= subcycles * gens_per_subcycle)
    int subcycles = 3;
    int gens_per_subcycle = 8;
    int inject_every = 2;         // fresh task-agent candidates every N generations
    int inject_count = 16;
    int elites_forward = 2;       // unconditional carry into the next generation
    double nan_max = 0.30;
    int num_per_request = 4;      // candidates requested per agent call
    int max_repairs = 3;
    int mi_bins = 16;
    ThresholdConfig thresholds;
    std::uint64_t seed = 0;
    int threads = 1;
    std::vector<std::string> seed_exprs;  // warm-start expressions for the first seed pool

    void check() const;  // throws ConfigError on invariant violations
};

struct ScoredCandidate {
    AlphaCandidate candidate;
    FitnessReport report;
};

struct GenerationRecord {
    int subcycle = 0;
    int generation = 0;  // 1-based global index
    int cohort = 0;
    int qualified = 0;
    int elite = 0;
    int parents = 0;
    int injected = 0;
    double best_ic = 0.0, mean_ic = 0.0;
    double best_icir = 0.0;
    double best_rank_ic = 0.0, best_rank_icir = 0.0;
    double best_mi = 0.0;
    std::map<std::string, int> op_tallies;
    std::map<std::string, int> rejects_by_stage;
    std::vector<std::string> carried;    // canonical exprs carried into this generation
    std::vector<std::string> carry_out;  // exprs selected to carry into the next one
    long elapsed_ms = 0;
};

struct ArchiveEntry {
    std::string id, name, expr, rationale;
    double ic = 0.0, icir = 0.0, rank_ic = 0.0, rank_icir = 0.0, mi = 0.0;
    int generation = 0;
};

struct RunLog {
    std::vector<GenerationRecord> generations;
    std::vector<ArchiveEntry> archive;  // all elites ever, deduplicated by canonical expr
    std::map<std::string, std::vector<std::string>> lineage;  // accepted id -> parent ids
    bool aborted = false;
    std::string abort_reason;
};

nlohmann::json to_json(const GenerationRecord& record);
nlohmann::json to_json(const ArchiveEntry& entry);

using LogSink = std::function<void(const nlohmann::json&)>;

// Qualified members of the cohort ranked by the mean of per-metric cohort
// z-scores, ties broken by candidate id; returns cohort indexes, at most
// `parent_pool` of them.
std::vector<std::size_t> select_parents(const std::vector<ScoredCandidate>& cohort,
                                        int parent_pool);

struct BreedTally {
    int mutation = 0;
    int crossover = 0;
    int crossover_mutation = 0;
    int fallback_to_mutation = 0;
    int discarded = 0;
};

// `target` children split as evenly as possible among mutation-only,
// crossover-only and crossover-then-mutation (remainder in that order);
// parents drawn uniformly with replacement. A single parent forces the
// crossover modes down to mutation (tallied as fallback).
std::vector<AlphaCandidate> breed(const std::vector<ScoredCandidate>& parents,
                                  LlmBackend& backend, int target, Rng& rng, BreedTally& tally);

// Full run: per sub-cycle, a seed generation from the task agents followed by
// bred generations with periodic injection and elitism. The sink, when given,
// receives one JSON record per generation as it completes (plus an init
// record and, on abort, an abort record).
RunLog run_evolution(const EvolutionConfig& config, const OhlcvPanel& panel,
                     const LabelMatrix& labels, const std::vector<AgentProfile>& profiles,
                     LlmBackend& backend, const LogSink& sink = {});

}  // namespace alphamine

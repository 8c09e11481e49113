// agents.hpp — agent hierarchy profiles, diversified-guidance prompt
// assembly, candidate extraction, the multi-stage quality pipeline, adaptive
// feedback summaries, and the breeding operators.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "alphamine/backend.hpp"
#include "alphamine/eval.hpp"
#include "alphamine/fitness.hpp"

namespace alphamine {

struct AgentProfile {
    int level = 0;          // 1..7
    std::string name;       // AgentLiquidity, AgentBarShape, ...
    std::string guidance;   // exploration direction, one short paragraph
    std::vector<double> temperature_pool{0.7, 0.8, 0.9, 1.0, 1.1, 1.2};
};

// The 21 profiles across 7 levels.
const std::vector<AgentProfile>& builtin_profiles();

enum class ParaphraseMode { Light, Moderate, Creative, Divergent, Concrete };

inline constexpr ParaphraseMode kAllParaphraseModes[] = {
    ParaphraseMode::Light, ParaphraseMode::Moderate, ParaphraseMode::Creative,
    ParaphraseMode::Divergent, ParaphraseMode::Concrete};

const char* paraphrase_mode_name(ParaphraseMode mode);

// Deterministic guidance rewrite per mode (the mock-level paraphraser).
std::string paraphrase_guidance(const std::string& guidance, ParaphraseMode mode);

struct FeedbackSummary {
    std::string effective;
    std::string ineffective;
};

// Column and operator vocabulary description used in every prompt.
std::string column_schema_text();

// Task markers embedded in prompts; the mock backend keys off these.
namespace prompt_markers {
inline constexpr const char* kTask = "### Task: ";
inline constexpr const char* kCount = "### Count: ";
inline constexpr const char* kTheme = "### Theme: ";
inline constexpr const char* kName = "### Name: ";
inline constexpr const char* kParentName = "### Parent name: ";
inline constexpr const char* kParentExpr = "### Parent expr: ";
inline constexpr const char* kParentAName = "### Parent a name: ";
inline constexpr const char* kParentAExpr = "### Parent a expr: ";
inline constexpr const char* kParentBName = "### Parent b name: ";
inline constexpr const char* kParentBExpr = "### Parent b expr: ";
inline constexpr const char* kFaultyExpr = "### Faulty expr: ";
inline constexpr const char* kError = "### Error: ";
inline constexpr const char* kCandidateExpr = "### Candidate expr: ";
inline constexpr const char* kRationale = "### Rationale: ";
inline constexpr const char* kFeedback = "### Feedback: ";
inline constexpr const char* kNonce = "### Nonce: ";
}  // namespace prompt_markers

// Fills the generation template: schema, paraphrased guidance, feedback
// blocks, complexity constraints, and the output format demanding n
// candidates in <<function N>> delimiters. Temperature is drawn from the
// profile's pool via `rng`.
PromptBundle build_prompt(const AgentProfile& profile, ParaphraseMode mode,
                          const FeedbackSummary& feedback, const std::string& schema, int n,
                          Rng& rng);

struct CandidateDraft {
    std::string name;
    std::string rationale;
    std::string expr_text;
};

struct ExtractResult {
    std::vector<CandidateDraft> drafts;
    std::vector<std::string> diagnostics;  // one entry per malformed block
};

// Splits <<function N>> ... <</function N>> blocks into (name, rationale,
// expr) triples. Malformed blocks are skipped and reported; never throws on
// arbitrary input.
ExtractResult extract_candidates(std::string_view raw);

// One block in the exact shape extract_candidates reads back.
std::string format_candidate_block(int index, const std::string& name,
                                   const std::string& rationale, const std::string& expr_text);

enum class CandidateStatus { Raw, Repaired, Accepted, Rejected };

struct AlphaCandidate {
    std::string id;
    std::string name;
    std::string expr_text;
    std::string rationale;
    std::string origin;                 // agent name or breeding operator
    std::vector<std::string> parents;   // 0-2 candidate ids
    int generation = 0;
    CandidateStatus status = CandidateStatus::Raw;
    std::optional<Expr> expr;           // set once parsed
    std::string reject_stage;
    std::string reject_reason;
};

struct PipelineConfig {
    ComplexityCaps caps;
    EvalOptions eval;
    double nan_max = 0.30;
    int max_repairs = 3;
    int causality_probes = 4;
    std::uint64_t seed = 0;
    EvalFn eval_fn;  // evaluate() unless a test injects a variant
};

// Stage order: (1) parse, repairing via the backend up to max_repairs times;
// (2) judge: complexity caps, redundancy, non-empty rationale, with one
// improvement round via the backend; (3) execute on the panel; (4) causality
// check; (5) NaN-ratio cap. Backend transport failure rejects the candidate
// at stage "backend".
AlphaCandidate quality_pipeline(AlphaCandidate candidate, const OhlcvPanel& panel,
                                LlmBackend& backend, const PipelineConfig& config = {});

// Observation -> Cause -> Fix blocks from up to two top valid and two worst
// invalid candidates; deterministic stanzas when inputs are empty.
FeedbackSummary summarize_feedback(
    const std::vector<std::pair<AlphaCandidate, FitnessReport>>& valid_top,
    const std::vector<AlphaCandidate>& invalid_worst);

// Breeding operators. The backend is prompted with the parent expression(s);
// unparseable output is retried once, then discarded (nullopt).
std::optional<CandidateDraft> mutate(const AlphaCandidate& parent, LlmBackend& backend, Rng& rng);
std::optional<CandidateDraft> crossover(const AlphaCandidate& a, const AlphaCandidate& b,
                                        LlmBackend& backend, Rng& rng);

// Prompt builders for the repair/improve/mutate/crossover roles (exposed for
// the mock's tests).
PromptBundle build_repair_prompt(const AlphaCandidate& candidate, const std::string& error);
PromptBundle build_improve_prompt(const AlphaCandidate& candidate,
                                  const std::vector<std::string>& issues);
PromptBundle build_mutation_prompt(const AlphaCandidate& parent, Rng& rng);
PromptBundle build_crossover_prompt(const AlphaCandidate& a, const AlphaCandidate& b, Rng& rng);

}  // namespace alphamine

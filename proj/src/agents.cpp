#include "alphamine/agents.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace alphamine {

namespace {

AgentProfile make_profile(int level, const char* name, const char* guidance) {
    AgentProfile p;
    p.level = level;
    p.name = name;
    p.guidance = guidance;
    return p;
}

}  // namespace

const std::vector<AgentProfile>& builtin_profiles() {
    static const std::vector<AgentProfile> profiles = {
        // Level I — market structure & cycle
        make_profile(1, "AgentMarketCycle",
                     "Look for long-horizon cyclical structure in prices: sustained trends, phase "
                     "shifts, and turning points visible in multi-week behavior."),
        make_profile(1, "AgentVolatilityRegime",
                     "Track transitions between calm and turbulent volatility states and how long "
                     "each regime persists once entered."),
        // Level II — extreme risk & fragility
        make_profile(2, "AgentTailRisk",
                     "Quantify downside sensitivity: exposure to extreme negative moves and how "
                     "sharply losses cluster over recent history."),
        make_profile(2, "AgentCrashPredictor",
                     "Hunt for stress precursors such as volatility compression, fading volume, "
                     "and fragile price structure that precede sharp drops."),
        // Level III — price-volume dynamics
        make_profile(3, "AgentLiquidity",
                     "Measure trading friction: price impact per unit of volume, turnover "
                     "variability, and thin-market signatures."),
        make_profile(3, "AgentOrderImbalance",
                     "Infer one-sided participation from where the close settles inside the daily "
                     "range and how volume accompanies the move."),
        make_profile(3, "AgentPriceVolumeCoherence",
                     "Compare the direction and size of price moves with volume changes to detect "
                     "alignment or divergence of the two."),
        make_profile(3, "AgentVolumeStructure",
                     "Characterize the shape and concentration of trading activity: bursts, "
                     "droughts, and clustering of daily volume."),
        // Level IV — price-volatility behavior
        make_profile(4, "AgentDailyTrend",
                     "Capture directional persistence and multi-day momentum strength in daily "
                     "closes."),
        make_profile(4, "AgentReversal",
                     "Target short-term overreaction and the pull back toward recent price "
                     "levels after outsized moves."),
        make_profile(4, "AgentRangeVol",
                     "Study range-based volatility: expansion and compression of daily high-low "
                     "spreads across recent windows."),
        make_profile(4, "AgentLagResponse",
                     "Relate today's returns to lagged volume and volatility to expose delayed "
                     "adjustment to information."),
        make_profile(4, "AgentVolAsymmetry",
                     "Contrast volatility on up days with volatility on down days to expose "
                     "skewed risk-taking."),
        // Level V — multi-scale complexity
        make_profile(5, "AgentDrawdown",
                     "Describe the depth and recovery geometry of declines from recent highs."),
        make_profile(5, "AgentFractal",
                     "Compare variability across short and long windows to expose roughness and "
                     "long-memory effects."),
        // Level VI — stability & regime gating
        make_profile(6, "AgentRegimeGating",
                     "Build conditional signals that switch on or off depending on volatility, "
                     "trend, or liquidity state."),
        make_profile(6, "AgentStability",
                     "Prefer signals whose recent values are smooth and persistent rather than "
                     "erratic from day to day."),
        // Level VII — geometric & fusion
        make_profile(7, "AgentBarShape",
                     "Encode candlestick geometry: body size, shadow balance, and where the close "
                     "sits within the daily range."),
        make_profile(7, "AgentCreative",
                     "Try unconventional but economically defensible transformations of the five "
                     "basic columns."),
        make_profile(7, "AgentComposite",
                     "Blend two or three complementary signals into one compact score with "
                     "clearly separated roles."),
        make_profile(7, "AgentHerding",
                     "Detect crowded one-way behavior: simultaneous directional moves backed by "
                     "swollen volume."),
    };
    return profiles;
}

const char* paraphrase_mode_name(ParaphraseMode mode) {
    switch (mode) {
        case ParaphraseMode::Light: return "light";
        case ParaphraseMode::Moderate: return "moderate";
        case ParaphraseMode::Creative: return "creative";
        case ParaphraseMode::Divergent: return "divergent";
        case ParaphraseMode::Concrete: return "concrete";
    }
    return "?";
}

std::string paraphrase_guidance(const std::string& guidance, ParaphraseMode mode) {
    switch (mode) {
        case ParaphraseMode::Light:
            return "Brief: " + guidance;
        case ParaphraseMode::Moderate:
            return "Consider, in other words: " + guidance;
        case ParaphraseMode::Creative:
            return guidance +
                   " Look for second-order effects and unusual functional forms within this theme.";
        case ParaphraseMode::Divergent:
            return guidance +
                   " Shift attention to a neighboring mechanism of the same theme and form "
                   "complementary hypotheses.";
        case ParaphraseMode::Concrete:
            return guidance +
                   " Anchor the idea in explicit operators, e.g. ts_mean(close, 10), "
                   "cs_rank(volume), delta(close, 5) or guarded ratios.";
    }
    return guidance;
}

std::string column_schema_text() {
    return "Daily panel columns per (date, ticker): open, high, low, close, volume.\n"
           "Operators: + - * /, abs, log1p, sign, tanh, sqrt, neg, ts_mean, ts_std, ts_sum,\n"
           "ts_min, ts_max, ts_rank, ts_corr, delay, delta, cs_rank, cs_zscore,\n"
           "gate(cond, then, else) with cond of the form a < b or a > b.";
}

namespace {

const char* kSystemPrompt =
    "You are a senior quantitative factor engineer. Propose alpha factors as expressions in "
    "the constrained DSL and wrap every candidate exactly as instructed.";

double draw_temperature(const AgentProfile& profile, Rng& rng) {
    if (profile.temperature_pool.empty()) return 0.8;
    return profile.temperature_pool[rng.uniform_int(profile.temperature_pool.size())];
}

std::string constraints_text() {
    std::ostringstream os;
    os << "- One clear idea per factor; at most " << ComplexityCaps{}.max_logical_steps
       << " logical steps (time-series, cross-sectional or gate operators).\n"
       << "- No redundant stacking such as cs_rank(cs_rank(x)) or cs_zscore(cs_zscore(x)).\n"
       << "- Windows and lags are integers in [" << kMinWindow << ", " << kMaxWindow << "].\n"
       << "- Use only the columns open, high, low, close, volume; expressions must be\n"
       << "  numerically stable (division is epsilon-guarded).";
    return os.str();
}

std::string output_format_text(int n) {
    std::ostringstream os;
    os << "Return exactly " << n << " factors. Emit nothing but the blocks. Each block:\n"
       << "<<function N>>\n"
       << "name: factor_descriptive_name\n"
       << "rationale: One sentence explaining the idea.\n"
       << "expr: one DSL expression\n"
       << "<</function N>>";
    return os.str();
}

}  // namespace

PromptBundle build_prompt(const AgentProfile& profile, ParaphraseMode mode,
                          const FeedbackSummary& feedback, const std::string& schema, int n,
                          Rng& rng) {
    if (n < 1) throw ConfigError("build_prompt: n must be >= 1");
    PromptBundle bundle;
    bundle.system = kSystemPrompt;
    bundle.temperature = draw_temperature(profile, rng);
    std::ostringstream os;
    os << prompt_markers::kTask << "generate\n"
       << prompt_markers::kCount << n << "\n\n"
       << "### Schema\n" << schema << "\n\n"
       << prompt_markers::kTheme << profile.name << " (" << paraphrase_mode_name(mode) << ")\n"
       << paraphrase_guidance(profile.guidance, mode) << "\n\n"
       << "### Effective patterns (Observation -> Cause -> Fix)\n"
       << feedback.effective << "\n\n"
       << "### Ineffective patterns (Observation -> Cause -> Fix)\n"
       << feedback.ineffective << "\n\n"
       << "### Constraints\n" << constraints_text() << "\n\n"
       << "### Output format\n" << output_format_text(n);
    bundle.user = os.str();
    return bundle;
}

std::string format_candidate_block(int index, const std::string& name,
                                   const std::string& rationale, const std::string& expr_text) {
    std::ostringstream os;
    os << "<<function " << index << ">>\n"
       << "name: " << name << "\n"
       << "rationale: " << rationale << "\n"
       << "expr: " << expr_text << "\n"
       << "<</function " << index << ">>\n";
    return os.str();
}

namespace {

std::string strip(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool strip_label(std::string& line, const char* label) {
    const std::size_t len = std::string_view(label).size();
    if (line.size() >= len) {
        std::string head = line.substr(0, len);
        std::transform(head.begin(), head.end(), head.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (head == label) {
            line = strip(line.substr(len));
            return true;
        }
    }
    return false;
}

}  // namespace

ExtractResult extract_candidates(std::string_view raw) {
    ExtractResult result;
    std::size_t cursor = 0;
    int block_no = 0;
    while (true) {
        const std::size_t open = raw.find("<<function", cursor);
        if (open == std::string_view::npos) break;
        ++block_no;
        std::size_t p = open + std::string_view("<<function").size();
        while (p < raw.size() && (raw[p] == ' ' || (raw[p] >= '0' && raw[p] <= '9'))) ++p;
        if (p + 1 >= raw.size() || raw[p] != '>' || raw[p + 1] != '>') {
            result.diagnostics.push_back("block " + std::to_string(block_no) +
                                         ": malformed opening tag");
            cursor = open + 1;
            continue;
        }
        const std::size_t body_begin = p + 2;
        const std::size_t close = raw.find("<</function", body_begin);
        if (close == std::string_view::npos) {
            result.diagnostics.push_back("block " + std::to_string(block_no) +
                                         ": missing closing tag");
            cursor = open + 1;
            continue;
        }
        std::size_t close_end = close + std::string_view("<</function").size();
        while (close_end < raw.size() &&
               (raw[close_end] == ' ' || (raw[close_end] >= '0' && raw[close_end] <= '9')))
            ++close_end;
        if (close_end + 1 < raw.size() && raw[close_end] == '>' && raw[close_end + 1] == '>')
            close_end += 2;

        const std::string_view body = raw.substr(body_begin, close - body_begin);
        CandidateDraft draft;
        std::vector<std::string> lines;
        std::size_t ls = 0;
        while (ls <= body.size()) {
            const std::size_t le = body.find('\n', ls);
            const std::string line =
                strip(body.substr(ls, le == std::string_view::npos ? body.size() - ls : le - ls));
            if (!line.empty()) lines.push_back(line);
            if (le == std::string_view::npos) break;
            ls = le + 1;
        }
        bool have_name = false, have_rationale = false, have_expr = false;
        for (std::string line : lines) {
            if (!have_name && strip_label(line, "name:")) {
                draft.name = line;
                have_name = true;
            } else if (!have_rationale && strip_label(line, "rationale:")) {
                draft.rationale = line;
                have_rationale = true;
            } else if (!have_expr && strip_label(line, "expr:")) {
                draft.expr_text = line;
                have_expr = true;
            }
        }
        if (!(have_name && have_rationale && have_expr) && lines.size() >= 3) {
            // Unlabeled fallback: header, rationale, expression.
            draft.name = lines[0];
            draft.rationale = lines[1];
            draft.expr_text = lines[2];
            have_name = have_rationale = have_expr = true;
        }
        if (have_name && have_rationale && have_expr && !draft.expr_text.empty()) {
            result.drafts.push_back(std::move(draft));
        } else {
            result.diagnostics.push_back("block " + std::to_string(block_no) +
                                         ": expected name, rationale and expr lines");
        }
        cursor = std::max(close_end, open + 1);
    }
    return result;
}

// --- quality pipeline -------------------------------------------------------

namespace {

AlphaCandidate rejected(AlphaCandidate cand, const std::string& stage, const std::string& reason) {
    cand.status = CandidateStatus::Rejected;
    cand.reject_stage = stage;
    cand.reject_reason = reason;
    return cand;
}

std::vector<std::string> judge_issues(const Expr& expr, const std::string& rationale,
                                      const ComplexityCaps& caps) {
    std::vector<std::string> issues = validate(expr, caps);
    if (strip(rationale).empty()) issues.push_back("missing rationale");
    return issues;
}

}  // namespace

AlphaCandidate quality_pipeline(AlphaCandidate candidate, const OhlcvPanel& panel,
                                LlmBackend& backend, const PipelineConfig& config) {
    const EvalFn eval_fn =
        config.eval_fn ? config.eval_fn
                       : [](const Expr& e, const OhlcvPanel& p, const EvalOptions& o) {
                             return evaluate(e, p, o);
                         };
    try {
        // Stage 1 — code quality: parse, repairing via the backend.
        Expr expr;
        std::string parse_error;
        bool parsed = false;
        for (int attempt = 0; attempt <= config.max_repairs; ++attempt) {
            try {
                expr = parse_expr(candidate.expr_text);
                parsed = true;
                break;
            } catch (const ParseError& e) {
                parse_error = e.what();
            }
            if (attempt == config.max_repairs) break;
            const std::string response =
                backend.generate(build_repair_prompt(candidate, parse_error));
            const ExtractResult fixed = extract_candidates(response);
            if (fixed.drafts.empty()) continue;
            candidate.expr_text = fixed.drafts.front().expr_text;
            if (!fixed.drafts.front().rationale.empty())
                candidate.rationale = fixed.drafts.front().rationale;
            candidate.status = CandidateStatus::Repaired;
        }
        if (!parsed) return rejected(std::move(candidate), "parse", parse_error);

        // Stage 2 — judge, with one improvement round.
        std::vector<std::string> issues = judge_issues(expr, candidate.rationale, config.caps);
        if (!issues.empty()) {
            const std::string response =
                backend.generate(build_improve_prompt(candidate, issues));
            const ExtractResult improved = extract_candidates(response);
            if (!improved.drafts.empty()) {
                try {
                    Expr improved_expr = parse_expr(improved.drafts.front().expr_text);
                    candidate.expr_text = improved.drafts.front().expr_text;
                    candidate.rationale = improved.drafts.front().rationale;
                    candidate.status = CandidateStatus::Repaired;
                    expr = std::move(improved_expr);
                } catch (const ParseError&) {
                    // Keep the original; the re-judge below decides.
                }
            }
            issues = judge_issues(expr, candidate.rationale, config.caps);
            if (!issues.empty()) return rejected(std::move(candidate), "judge", issues.front());
        }

        // Stage 3 — execute.
        FactorMatrix factor;
        try {
            factor = eval_fn(expr, panel, config.eval);
        } catch (const EvalError& e) {
            return rejected(std::move(candidate), "execute", e.what());
        }

        // Stage 4 — information-leakage unit test.
        const CausalityReport causality =
            causality_check(expr, panel, config.causality_probes,
                            mix_seed(config.seed, fnv1a64(candidate.id)), config.eval, eval_fn);
        if (!causality.passed)
            return rejected(std::move(candidate), "causality",
                            "prefix mismatch at " + causality.date + "/" + causality.ticker +
                                " in subterm " + causality.subterm);

        // Stage 5 — NaN-ratio cap.
        const double nr = nan_ratio(factor);
        if (nr > config.nan_max)
            return rejected(std::move(candidate), "nan_ratio",
                            "nan ratio " + format_double(nr) + " > " +
                                format_double(config.nan_max));

        candidate.expr = std::move(expr);
        candidate.expr_text = print_expr(*candidate.expr);
        candidate.status = CandidateStatus::Accepted;
        return candidate;
    } catch (const BackendError& e) {
        return rejected(std::move(candidate), "backend", e.what());
    }
}

// --- adaptive feedback -------------------------------------------------------

FeedbackSummary summarize_feedback(
    const std::vector<std::pair<AlphaCandidate, FitnessReport>>& valid_top,
    const std::vector<AlphaCandidate>& invalid_worst) {
    FeedbackSummary out;
    if (valid_top.empty()) {
        out.effective = "No validated alphas yet; no survivor guidance available.";
    } else {
        std::ostringstream os;
        for (const auto& [cand, report] : valid_top) {
            os << "Observation: " << cand.name << " = " << cand.expr_text << " scored IC "
               << format_double(report.ic) << ", RankIC " << format_double(report.rank_ic)
               << ", MI " << format_double(report.mi) << ".\n"
               << "Cause: " << (cand.rationale.empty() ? "structure matched the data" : cand.rationale)
               << "\n"
               << "Fix: keep this structure; explore adjacent windows, fields or gentle "
                  "nonlinearities.\n";
        }
        out.effective = os.str();
    }
    if (invalid_worst.empty()) {
        out.ineffective = "No rejected alphas yet; no failure guidance available.";
    } else {
        std::ostringstream os;
        for (const AlphaCandidate& cand : invalid_worst) {
            os << "Observation: " << cand.name << " was rejected at stage " << cand.reject_stage
               << ".\n"
               << "Cause: " << cand.reject_reason << "\n"
               << "Fix: " << [&]() -> std::string {
                      if (cand.reject_stage == "parse")
                          return "emit exactly one grammar-valid expression per block";
                      if (cand.reject_stage == "judge")
                          return "reduce logical steps and remove stacked ranking operators";
                      if (cand.reject_stage == "causality")
                          return "use only trailing windows and positive lags";
                      if (cand.reject_stage == "nan_ratio")
                          return "shorten rolling windows so warm-up stays under the NaN cap";
                      return "simplify the expression and retry";
                  }()
               << ".\n";
        }
        out.ineffective = os.str();
    }
    return out;
}

// --- breeding operators --------------------------------------------------------

namespace {

std::optional<CandidateDraft> breed_via(LlmBackend& backend,
                                        const std::function<PromptBundle()>& make_prompt) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string response = backend.generate(make_prompt());
        const ExtractResult extracted = extract_candidates(response);
        if (extracted.drafts.empty()) continue;
        CandidateDraft draft = extracted.drafts.front();
        try {
            parse_expr(draft.expr_text);
        } catch (const ParseError&) {
            continue;
        }
        return draft;
    }
    return std::nullopt;
}

}  // namespace

std::optional<CandidateDraft> mutate(const AlphaCandidate& parent, LlmBackend& backend, Rng& rng) {
    return breed_via(backend, [&]() { return build_mutation_prompt(parent, rng); });
}

std::optional<CandidateDraft> crossover(const AlphaCandidate& a, const AlphaCandidate& b,
                                        LlmBackend& backend, Rng& rng) {
    return breed_via(backend, [&]() { return build_crossover_prompt(a, b, rng); });
}

// --- role prompts ---------------------------------------------------------------

PromptBundle build_repair_prompt(const AlphaCandidate& candidate, const std::string& error) {
    PromptBundle bundle;
    bundle.system = kSystemPrompt;
    bundle.temperature = 0.8;  // quality-checker roles run at a fixed temperature
    std::ostringstream os;
    os << prompt_markers::kTask << "repair\n"
       << prompt_markers::kName << candidate.name << "\n"
       << prompt_markers::kFaultyExpr << candidate.expr_text << "\n"
       << prompt_markers::kError << error << "\n\n"
       << "### Schema\n" << column_schema_text() << "\n\n"
       << "### Constraints\n" << constraints_text() << "\n\n"
       << "The expression above failed to parse or exceeded limits. Correct it with the\n"
          "smallest change that makes it grammar-valid; keep the economic idea intact.\n\n"
       << "### Output format\n" << output_format_text(1);
    bundle.user = os.str();
    return bundle;
}

PromptBundle build_improve_prompt(const AlphaCandidate& candidate,
                                  const std::vector<std::string>& issues) {
    PromptBundle bundle;
    bundle.system = kSystemPrompt;
    bundle.temperature = 0.8;
    std::ostringstream os;
    os << prompt_markers::kTask << "improve\n"
       << prompt_markers::kName << candidate.name << "\n"
       << prompt_markers::kCandidateExpr << candidate.expr_text << "\n"
       << prompt_markers::kRationale << candidate.rationale << "\n"
       << prompt_markers::kFeedback;
    for (std::size_t i = 0; i < issues.size(); ++i) os << (i ? "; " : "") << issues[i];
    os << "\n\n### Schema\n" << column_schema_text() << "\n\n"
       << "### Constraints\n" << constraints_text() << "\n\n"
       << "The judge rejected the candidate for the issues listed. Simplify or restate it\n"
          "so every issue is resolved; provide a one-sentence rationale.\n\n"
       << "### Output format\n" << output_format_text(1);
    bundle.user = os.str();
    return bundle;
}

PromptBundle build_mutation_prompt(const AlphaCandidate& parent, Rng& rng) {
    PromptBundle bundle;
    bundle.system = kSystemPrompt;
    AgentProfile evolution_profile;  // default temperature pool
    bundle.temperature = draw_temperature(evolution_profile, rng);
    std::ostringstream os;
    os << prompt_markers::kTask << "mutate\n"
       << prompt_markers::kParentName << parent.name << "\n"
       << prompt_markers::kParentExpr << parent.expr_text << "\n"
       << prompt_markers::kNonce << rng.next_u64() << "\n\n"
       << "### Schema\n" << column_schema_text() << "\n\n"
       << "### Constraints\n" << constraints_text() << "\n\n"
       << "Slightly modify the parent expression: change one operator, one column, or one\n"
          "window while keeping the overall structure.\n\n"
       << "### Output format\n" << output_format_text(1);
    bundle.user = os.str();
    return bundle;
}

PromptBundle build_crossover_prompt(const AlphaCandidate& a, const AlphaCandidate& b, Rng& rng) {
    PromptBundle bundle;
    bundle.system = kSystemPrompt;
    AgentProfile evolution_profile;
    bundle.temperature = draw_temperature(evolution_profile, rng);
    std::ostringstream os;
    os << prompt_markers::kTask << "crossover\n"
       << prompt_markers::kParentAName << a.name << "\n"
       << prompt_markers::kParentAExpr << a.expr_text << "\n"
       << prompt_markers::kParentBName << b.name << "\n"
       << prompt_markers::kParentBExpr << b.expr_text << "\n"
       << prompt_markers::kNonce << rng.next_u64() << "\n\n"
       << "### Schema\n" << column_schema_text() << "\n\n"
       << "### Constraints\n" << constraints_text() << "\n\n"
       << "Combine the two parent expressions into one new factor that inherits a\n"
          "meaningful sub-structure from each.\n\n"
       << "### Output format\n" << output_format_text(1);
    bundle.user = os.str();
    return bundle;
}

}  // namespace alphamine

#include <doctest.h>

#include <map>
#include <set>

#include "alphamine/agents.hpp"
#include "alphamine/backend.hpp"
#include "test_support.hpp"

using namespace alphamine;
using namespace test_support;

namespace {

// Backend that always fails at the transport level.
class DeadBackend final : public LlmBackend {
public:
    std::string generate(const PromptBundle&) override {
        throw BackendError("connection refused");
    }
    std::string name() const override { return "dead"; }
};

// Backend that replies with text carrying no candidate blocks.
class UselessBackend final : public LlmBackend {
public:
    std::string generate(const PromptBundle&) override { return "I have nothing to offer."; }
    std::string name() const override { return "useless"; }
};

AlphaCandidate raw_candidate(const std::string& id, const std::string& expr_text,
                             const std::string& rationale = "One clear idea.") {
    AlphaCandidate c;
    c.id = id;
    c.name = "factor_" + id;
    c.expr_text = expr_text;
    c.rationale = rationale;
    c.origin = "test";
    return c;
}

int expr_node_diff(const Expr& a, const Expr& b) {
    if (a.children.size() != b.children.size()) return 1000;
    int diff = 0;
    if (a.op != b.op || a.window != b.window ||
        (a.op == Op::Constant && a.constant != b.constant) ||
        (a.op == Op::ColumnRef && a.column != b.column))
        ++diff;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        diff += expr_node_diff(a.children[i], b.children[i]);
    return diff;
}

}  // namespace

TEST_CASE("profiles: 21 agents partition into 7 levels") {
    const std::vector<AgentProfile>& profiles = builtin_profiles();
    CHECK(profiles.size() == 21);
    std::map<int, int> per_level;
    std::set<std::string> names;
    for (const AgentProfile& p : profiles) {
        per_level[p.level]++;
        names.insert(p.name);
        CHECK(!p.guidance.empty());
        CHECK(p.temperature_pool == std::vector<double>{0.7, 0.8, 0.9, 1.0, 1.1, 1.2});
    }
    CHECK(names.size() == 21);
    const std::map<int, int> expected = {{1, 2}, {2, 2}, {3, 4}, {4, 5}, {5, 2}, {6, 2}, {7, 4}};
    CHECK(per_level == expected);
    CHECK(names.count("AgentLiquidity") == 1);
    CHECK(names.count("AgentBarShape") == 1);
}

TEST_CASE("paraphrase modes: light stays close, concrete adds operators") {
    for (const AgentProfile& p : builtin_profiles()) {
        const std::string light = paraphrase_guidance(p.guidance, ParaphraseMode::Light);
        CHECK(levenshtein(light, p.guidance) <= p.guidance.size() * 15 / 100);
        const std::string concrete = paraphrase_guidance(p.guidance, ParaphraseMode::Concrete);
        const bool has_operator_token = concrete.find("ts_mean(") != std::string::npos ||
                                        concrete.find("cs_rank(") != std::string::npos ||
                                        concrete.find("delta(") != std::string::npos;
        CHECK(has_operator_token);
    }
    // five distinct rewrites
    const std::string g = builtin_profiles()[0].guidance;
    std::set<std::string> rewrites;
    for (ParaphraseMode m : kAllParaphraseModes) rewrites.insert(paraphrase_guidance(g, m));
    CHECK(rewrites.size() == 5);
}

TEST_CASE("build_prompt fills the template") {
    Rng rng(77);
    const FeedbackSummary fb = summarize_feedback({}, {});
    const PromptBundle b =
        build_prompt(builtin_profiles()[4], ParaphraseMode::Light, fb, column_schema_text(), 4, rng);
    CHECK(b.user.find("### Count: 4") != std::string::npos);
    CHECK(b.user.find("exactly 4 factors") != std::string::npos);
    CHECK(b.user.find("<<function N>>") != std::string::npos);
    CHECK(b.user.find("AgentLiquidity") != std::string::npos);
    CHECK(b.user.find(fb.effective) != std::string::npos);
    CHECK(b.user.find(fb.ineffective) != std::string::npos);
    CHECK(b.max_tokens == 4096);
    const std::vector<double> pool = {0.7, 0.8, 0.9, 1.0, 1.1, 1.2};
    CHECK(std::find(pool.begin(), pool.end(), b.temperature) != pool.end());
    CHECK_THROWS_AS(build_prompt(builtin_profiles()[0], ParaphraseMode::Light, fb, "s", 0, rng),
                    ConfigError);
}

TEST_CASE("extract_candidates: well-formed and malformed blocks") {
    const std::string three =
        "preamble chatter\n" + format_candidate_block(1, "f_a", "ra", "close") +
        format_candidate_block(2, "f_b", "rb", "open - low") +
        format_candidate_block(3, "f_c", "rc", "cs_rank(volume)");
    const ExtractResult r3 = extract_candidates(three);
    CHECK(r3.drafts.size() == 3);
    CHECK(r3.diagnostics.empty());
    CHECK(r3.drafts[1].name == "f_b");
    CHECK(r3.drafts[1].rationale == "rb");
    CHECK(r3.drafts[1].expr_text == "open - low");

    const std::string mixed = format_candidate_block(1, "f_a", "ra", "close") +
                              "<<function 2>>\nname: broken\n<</function 2>>\n" +
                              format_candidate_block(3, "f_c", "rc", "volume");
    const ExtractResult rm = extract_candidates(mixed);
    CHECK(rm.drafts.size() == 2);
    CHECK(rm.diagnostics.size() == 1);

    const ExtractResult empty = extract_candidates("no blocks at all");
    CHECK(empty.drafts.empty());

    // Unlabeled three-line block still extracts positionally.
    const ExtractResult plain =
        extract_candidates("<<function 1>>\nmy_factor\nsome idea\nclose - open\n<</function 1>>");
    REQUIRE(plain.drafts.size() == 1);
    CHECK(plain.drafts[0].expr_text == "close - open");
}

TEST_CASE("extract_candidates never throws on arbitrary bytes") {
    Rng rng(616);
    for (int i = 0; i < 300; ++i) {
        std::string junk;
        const std::size_t len = rng.uniform_int(200);
        for (std::size_t k = 0; k < len; ++k)
            junk += static_cast<char>(rng.uniform_int(256));
        // Sprinkle tag fragments to stress the scanner.
        if (i % 3 == 0) junk += "<<function";
        if (i % 5 == 0) junk += "<<function 1>>";
        if (i % 7 == 0) junk += "<</function";
        CHECK_NOTHROW(extract_candidates(junk));
    }
}

TEST_CASE("mock round trip: generation output always yields parseable candidates") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        MockBackend mock(seed);
        Rng rng(seed + 1);
        const PromptBundle bundle =
            build_prompt(builtin_profiles()[seed % 21], ParaphraseMode::Moderate,
                         summarize_feedback({}, {}), column_schema_text(), 3, rng);
        const ExtractResult r = extract_candidates(mock.generate(bundle));
        REQUIRE(!r.drafts.empty());
        std::size_t parseable = 0;
        for (const CandidateDraft& d : r.drafts) {
            try {
                parse_expr(d.expr_text);
                ++parseable;
            } catch (const ParseError&) {
            }
        }
        CHECK(parseable >= 1);
    }
}

TEST_CASE("quality_pipeline: liquidity-impact expression is Accepted") {
    const OhlcvPanel panel = random_panel(3, 60, 8);
    MockBackend mock(5);
    AlphaCandidate c = raw_candidate("c1", "(high - close) / (volume + 1e-9)",
                                     "Price rise per unit traded volume.");
    const AlphaCandidate out = quality_pipeline(std::move(c), panel, mock);
    CHECK(out.status == CandidateStatus::Accepted);
    REQUIRE(out.expr.has_value());
    CHECK(out.expr_text == "(high - close) / (volume + 1e-9)");
}

TEST_CASE("quality_pipeline: judge catches stacking; mock improvement strips it") {
    const OhlcvPanel panel = random_panel(3, 60, 8);
    MockBackend mock(5);
    AlphaCandidate c = raw_candidate("c2", "cs_rank(cs_rank(close))");
    const AlphaCandidate out = quality_pipeline(std::move(c), panel, mock);
    CHECK(out.status == CandidateStatus::Accepted);
    CHECK(out.expr_text == "cs_rank(close)");  // one stacking layer removed

    // Without a helpful backend the judge rejection stands.
    UselessBackend useless;
    AlphaCandidate c2 = raw_candidate("c3", "cs_rank(cs_rank(close))");
    const AlphaCandidate rejected = quality_pipeline(std::move(c2), panel, useless);
    CHECK(rejected.status == CandidateStatus::Rejected);
    CHECK(rejected.reject_stage == "judge");
    CHECK(rejected.reject_reason.find("redundant stacking") != std::string::npos);
}

TEST_CASE("quality_pipeline: repair clamps an out-of-range window") {
    const OhlcvPanel panel = random_panel(3, 60, 8);
    MockBackend mock(5);
    AlphaCandidate c = raw_candidate("c4", "ts_mean(close, 0)");
    const AlphaCandidate out = quality_pipeline(std::move(c), panel, mock);
    CHECK(out.status == CandidateStatus::Accepted);
    CHECK(out.expr_text == "ts_mean(close, 1)");
}

TEST_CASE("quality_pipeline: oversized warm-up is rejected at the NaN stage") {
    const OhlcvPanel panel = random_panel(3, 50, 8);
    MockBackend mock(5);
    AlphaCandidate c = raw_candidate("c5", "ts_mean(close, 200)");
    const AlphaCandidate out = quality_pipeline(std::move(c), panel, mock);
    CHECK(out.status == CandidateStatus::Rejected);
    CHECK(out.reject_stage == "nan_ratio");
}

TEST_CASE("quality_pipeline: unrepairable garbage exhausts repairs") {
    const OhlcvPanel panel = random_panel(3, 40, 6);
    MockBackend mock(5);
    AlphaCandidate c = raw_candidate("c6", "this is not an expression ###");
    const AlphaCandidate out = quality_pipeline(std::move(c), panel, mock);
    CHECK(out.status == CandidateStatus::Rejected);
    CHECK(out.reject_stage == "parse");
}

TEST_CASE("quality_pipeline: backend transport failure rejects at backend stage") {
    const OhlcvPanel panel = random_panel(3, 40, 6);
    DeadBackend dead;
    AlphaCandidate c = raw_candidate("c7", "ts_mean(close, 999)");  // needs repair
    const AlphaCandidate out = quality_pipeline(std::move(c), panel, dead);
    CHECK(out.status == CandidateStatus::Rejected);
    CHECK(out.reject_stage == "backend");
}

TEST_CASE("quality_pipeline: never accepts validate or causality failures") {
    const OhlcvPanel panel = random_panel_with_gaps(3, 40, 6, 0.05);
    UselessBackend useless;
    Rng rng(123);
    int accepted = 0;
    for (int i = 0; i < 1000; ++i) {
        AlphaCandidate c = raw_candidate("f" + std::to_string(i), "", "idea");
        if (i % 4 == 0) {
            // grammar-valid sample
            c.expr_text = print_expr(sample_expr(rng));
        } else if (i % 4 == 1) {
            c.expr_text = "cs_rank(cs_rank(close)) + ";  // syntax error
        } else if (i % 4 == 2) {
            c.expr_text = print_expr(sample_expr(rng)) + ")";  // trailing junk
        } else {
            c.expr_text = "ts_mean(close, 999)";  // window violation
        }
        const AlphaCandidate out = quality_pipeline(std::move(c), panel, useless);
        if (out.status == CandidateStatus::Accepted) {
            ++accepted;
            REQUIRE(out.expr.has_value());
            CHECK(validate(*out.expr).empty());
            CHECK(causality_check(*out.expr, panel, 3, 42).passed);
        }
    }
    CHECK(accepted > 0);  // the sampler branch must get through
}

TEST_CASE("summarize_feedback: stanzas, metric values, causality mention") {
    const FeedbackSummary empty = summarize_feedback({}, {});
    CHECK(empty.effective.find("No validated alphas yet") != std::string::npos);
    CHECK(empty.ineffective.find("No rejected alphas yet") != std::string::npos);

    AlphaCandidate elite = raw_candidate("e1", "cs_rank(close)");
    FitnessReport report;
    report.ic = 0.03;
    report.rank_ic = 0.02;
    report.mi = 0.04;
    const FeedbackSummary fb = summarize_feedback({{elite, report}}, {});
    CHECK(fb.effective.find("0.03") != std::string::npos);
    CHECK(fb.effective.find("Observation") != std::string::npos);
    CHECK(fb.effective.find("Cause") != std::string::npos);
    CHECK(fb.effective.find("Fix") != std::string::npos);

    // Candidate rejected by the leakage stage (broken evaluator injected).
    const OhlcvPanel panel = random_panel(5, 30, 5);
    PipelineConfig pc;
    pc.eval_fn = [](const Expr& e, const OhlcvPanel& p, const EvalOptions& o) {
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
                if (!is_missing(f.values.at(t, j))) f.values.at(t, j) -= sum / n;
        }
        return f;
    };
    MockBackend mock(5);
    AlphaCandidate leaky = raw_candidate("l1", "cs_zscore(close)");
    const AlphaCandidate out = quality_pipeline(std::move(leaky), panel, mock, pc);
    REQUIRE(out.status == CandidateStatus::Rejected);
    REQUIRE(out.reject_stage == "causality");
    const FeedbackSummary fb2 = summarize_feedback({}, {out});
    CHECK(fb2.ineffective.find("causality") != std::string::npos);
}

TEST_CASE("mutate: frozen seed reproduces the high-close -> high-low variant") {
    MockBackend mock(8);
    Rng rng(1);
    const AlphaCandidate parent = raw_candidate(
        "upward_impact_per_vol", "(high - close) / (volume + 1e-9)", "liquidity impact");
    const auto draft = mutate(parent, mock, rng);
    REQUIRE(draft.has_value());
    CHECK(draft->expr_text == "(high - low) / (volume + 1e-9)");
}

TEST_CASE("mutate: single-node delta and high parse rate over seeds") {
    const AlphaCandidate parent = raw_candidate("p2", "cs_rank(ts_std(close, 10))");
    const Expr parent_expr = parse_expr(parent.expr_text);
    int parsed = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        MockBackend mock(seed);
        Rng rng(9000 + seed);
        const auto draft = mutate(parent, mock, rng);
        REQUIRE(draft.has_value());
        try {
            const Expr child = parse_expr(draft->expr_text);
            ++parsed;
            CHECK(expr_node_diff(parent_expr, child) == 1);
        } catch (const ParseError&) {
        }
    }
    CHECK(parsed >= 95);
}

TEST_CASE("mutate: unparseable parent is discarded after one retry") {
    MockBackend mock(3);
    Rng rng(4);
    const AlphaCandidate broken = raw_candidate("p3", "((close");
    CHECK(!mutate(broken, mock, rng).has_value());
}

TEST_CASE("crossover: frozen seed grafts the tanh body onto the liquidity ratio") {
    MockBackend mock(1);
    Rng rng(2);
    const AlphaCandidate a = raw_candidate(
        "upward_impact_per_vol", "(high - close) / (volume + 1e-9)", "liquidity impact");
    const AlphaCandidate b =
        raw_candidate("price_impact_per_vol_tanh_1d",
                      "tanh(abs(close - open) / (volume * close + 1e-9))", "bounded impact");
    const auto draft = crossover(a, b, mock, rng);
    REQUIRE(draft.has_value());
    CHECK(draft->expr_text ==
          "(high - close) / (tanh(abs(close - open) / (volume * close + 1e-9)) + 1e-9)");
    CHECK(validate(parse_expr(draft->expr_text)).empty());
}

TEST_CASE("crossover: outputs satisfy caps across seeds") {
    const AlphaCandidate a = raw_candidate("a", "cs_rank((high - low) / (volume + 1e-9))");
    const AlphaCandidate b = raw_candidate("b", "ts_mean(close - open, 10)");
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        MockBackend mock(seed);
        Rng rng(700 + seed);
        const auto draft = crossover(a, b, mock, rng);
        REQUIRE(draft.has_value());
        CHECK(validate(parse_expr(draft->expr_text)).empty());
    }
}

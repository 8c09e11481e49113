#include "alphamine/backend.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "alphamine/agents.hpp"
#include "alphamine/dsl.hpp"

namespace alphamine {

// --- MockBackend -----------------------------------------------------------

namespace {

std::optional<std::string> find_marker(const std::string& text, const char* marker) {
    const std::size_t pos = text.find(marker);
    if (pos == std::string::npos) return std::nullopt;
    const std::size_t begin = pos + std::string_view(marker).size();
    const std::size_t end = text.find('\n', begin);
    return text.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
}

std::string theme_word(const std::string& theme_line) {
    std::string word = theme_line.substr(0, theme_line.find(' '));
    if (word.rfind("Agent", 0) == 0) word = word.substr(5);
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return word.empty() ? "alpha" : word;
}

// Collapse directly stacked idempotent operators (the rule-based fixer the
// repair and improvement roles apply under the mock).
Expr fix_redundancy(Expr e) {
    for (Expr& c : e.children) c = fix_redundancy(std::move(c));
    while (!e.children.empty() && e.children[0].op == e.op) {
        const bool stacking =
            e.op == Op::CsRank || e.op == Op::CsZscore || e.op == Op::Abs || e.op == Op::Sign ||
            (e.op == Op::TsRank && e.children[0].window == e.window);
        if (!stacking) break;
        Expr inner = std::move(e.children[0].children[0]);
        e.children[0] = std::move(inner);
    }
    return e;
}

std::string rationale_for(const std::string& theme, Rng& rng) {
    static const char* templates[] = {
        "Tracks %s through one compact transform of the daily bars.",
        "Relates %s to forward returns with a single bounded signal.",
        "A minimal %s proxy built from the raw columns.",
        "Reads %s pressure off the cross-section once per day.",
    };
    char buf[160];
    std::snprintf(buf, sizeof buf, templates[rng.uniform_int(4)], theme.c_str());
    return buf;
}

}  // namespace

std::string MockBackend::generate(const PromptBundle& bundle) {
    std::ostringstream digest_src;
    digest_src << bundle.system << '\x1f' << bundle.user << '\x1f' << bundle.temperature << '\x1f'
               << bundle.max_tokens;
    Rng rng(mix_seed(seed_, fnv1a64(digest_src.str())));

    const std::string task = find_marker(bundle.user, prompt_markers::kTask).value_or("generate");

    if (task == "mutate") {
        const std::string parent_expr =
            find_marker(bundle.user, prompt_markers::kParentExpr).value_or("");
        const std::string parent_name =
            find_marker(bundle.user, prompt_markers::kParentName).value_or("factor");
        Expr parsed;
        try {
            parsed = parse_expr(parent_expr);
        } catch (const ParseError&) {
            return "I cannot parse the parent expression.";
        }
        const Expr mutated = mutate_expr(parsed, rng);
        return format_candidate_block(1, parent_name + "_m",
                                      "Single-node variation of " + parent_name + ".",
                                      print_expr(mutated));
    }

    if (task == "crossover") {
        const std::string a_expr =
            find_marker(bundle.user, prompt_markers::kParentAExpr).value_or("");
        const std::string b_expr =
            find_marker(bundle.user, prompt_markers::kParentBExpr).value_or("");
        const std::string a_name =
            find_marker(bundle.user, prompt_markers::kParentAName).value_or("factor_a");
        const std::string b_name =
            find_marker(bundle.user, prompt_markers::kParentBName).value_or("factor_b");
        Expr base, donor;
        try {
            base = parse_expr(a_expr);
            donor = parse_expr(b_expr);
        } catch (const ParseError&) {
            return "I cannot parse the parent expressions.";
        }
        const Expr crossed = crossover_expr(base, donor, rng);
        return format_candidate_block(1, a_name + "_x",
                                      "Grafts " + b_name + " material onto " + a_name + ".",
                                      print_expr(crossed));
    }

    if (task == "repair") {
        const std::string faulty =
            find_marker(bundle.user, prompt_markers::kFaultyExpr).value_or("");
        const std::string name =
            find_marker(bundle.user, prompt_markers::kName).value_or("factor_repaired");
        Expr parsed;
        try {
            ParseOptions lenient;
            lenient.clamp_windows = true;
            parsed = parse_expr(faulty, lenient);
        } catch (const ParseError&) {
            return "The expression cannot be repaired.";
        }
        const Expr fixed = fix_redundancy(parsed);
        return format_candidate_block(1, name, "Repaired: clamped windows and removed stacking.",
                                      print_expr(fixed));
    }

    if (task == "improve") {
        const std::string expr_text =
            find_marker(bundle.user, prompt_markers::kCandidateExpr).value_or("");
        const std::string name =
            find_marker(bundle.user, prompt_markers::kName).value_or("factor_improved");
        std::string rationale =
            find_marker(bundle.user, prompt_markers::kRationale).value_or("");
        Expr parsed;
        try {
            ParseOptions lenient;
            lenient.clamp_windows = true;
            parsed = parse_expr(expr_text, lenient);
        } catch (const ParseError&) {
            return "The candidate cannot be improved.";
        }
        const Expr fixed = fix_redundancy(parsed);
        if (rationale.empty()) rationale = "One clear idea: " + print_expr(fixed) + ".";
        return format_candidate_block(1, name, rationale, print_expr(fixed));
    }

    // Default: generation request.
    int count = 1;
    if (auto c = find_marker(bundle.user, prompt_markers::kCount)) {
        try {
            count = std::max(1, std::stoi(*c));
        } catch (...) {
            count = 1;
        }
    }
    const std::string theme =
        theme_word(find_marker(bundle.user, prompt_markers::kTheme).value_or("alpha"));
    std::ostringstream out;
    out << "Here are the candidates.\n\n";
    for (int i = 1; i <= count; ++i) {
        const Expr expr = sample_expr(rng);
        char suffix[8];
        std::snprintf(suffix, sizeof suffix, "%04x",
                      static_cast<unsigned>(rng.uniform_int(0x10000)));
        out << format_candidate_block(i, "factor_" + theme + "_" + suffix,
                                      rationale_for(theme, rng), print_expr(expr))
            << "\n";
    }
    return out.str();
}

// --- HttpBackend -------------------------------------------------------------

namespace {

// Simple counting semaphore bounding in-flight requests.
class FlightLimiter {
public:
    explicit FlightLimiter(int slots) : slots_(slots > 0 ? slots : 1) {}

    void acquire() {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return slots_ > 0; });
        --slots_;
    }
    void release() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            ++slots_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int slots_;
};

}  // namespace

struct HttpBackend::Impl {
    explicit Impl(int slots) : limiter(slots) {}
    FlightLimiter limiter;
};

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>(config_.max_in_flight)) {
    if (config_.base_url.empty()) throw ConfigError("http backend needs base_url");
    if (config_.model.empty()) throw ConfigError("http backend needs model");
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::generate(const PromptBundle& bundle) {
    nlohmann::json body = {
        {"model", config_.model},
        {"messages",
         {{{"role", "system"}, {"content", bundle.system}},
          {{"role", "user"}, {"content", bundle.user}}}},
        {"temperature", bundle.temperature},
        {"max_tokens", bundle.max_tokens},
    };
    const std::string payload = body.dump();

    impl_->limiter.acquire();
    struct Release {
        FlightLimiter& l;
        ~Release() { l.release(); }
    } release{impl_->limiter};

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            const auto backoff =
                std::chrono::milliseconds(config_.retry_backoff_ms << (attempt - 1));
            std::this_thread::sleep_for(backoff);
        }
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(0, config_.timeout_ms * 1000);
        client.set_read_timeout(0, config_.timeout_ms * 1000);
        httplib::Headers headers;
        if (const char* token = std::getenv(config_.auth_env.c_str()); token && *token)
            headers.emplace("Authorization", std::string("Bearer ") + token);
        auto res = client.Post("/v1/chat/completions", headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "server status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendError("chat completion failed with status " +
                               std::to_string(res->status) + ": " + res->body.substr(0, 200));
        try {
            const nlohmann::json reply = nlohmann::json::parse(res->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const std::exception& e) {
            throw BackendError(std::string("malformed chat completion response: ") + e.what());
        }
    }
    throw BackendError("chat completion failed after " + std::to_string(config_.max_retries + 1) +
                       " attempts: " + last_error);
}

}  // namespace alphamine

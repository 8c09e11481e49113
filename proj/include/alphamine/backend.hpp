// backend.hpp — LLM transport abstraction: a wire client speaking the
// chat-completions protocol and a deterministic seeded mock.
#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "alphamine/common.hpp"

namespace alphamine {

struct PromptBundle {
    std::string system;
    std::string user;
    double temperature = 0.8;
    int max_tokens = 4096;
};

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual std::string generate(const PromptBundle& bundle) = 0;
    virtual std::string name() const = 0;
};

// Deterministic stand-in: replies are a pure function of (seed, bundle
// digest). Understands the task markers the prompt builders embed and
// performs grammar sampling / AST edits / rule-based repair accordingly.
class MockBackend final : public LlmBackend {
public:
    explicit MockBackend(std::uint64_t seed) : seed_(seed) {}
    std::string generate(const PromptBundle& bundle) override;
    std::string name() const override { return "mock"; }

private:
    std::uint64_t seed_;
};

struct HttpBackendConfig {
    std::string base_url;            // e.g. http://127.0.0.1:8080
    std::string model;
    std::string auth_env = "LLM_API_KEY";  // environment variable holding the bearer token
    int timeout_ms = 30000;
    int max_retries = 3;
    int retry_backoff_ms = 250;      // doubled per attempt
    int max_in_flight = 4;
};

// POST {base_url}/v1/chat/completions with body
// {model, messages: [{role, content}...], temperature, max_tokens}; reads
// choices[0].message.content. Connection errors, timeouts, 429 and 5xx are
// retried with exponential backoff; exhaustion throws BackendError.
class HttpBackend final : public LlmBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ~HttpBackend() override;
    std::string generate(const PromptBundle& bundle) override;
    std::string name() const override { return "http:" + config_.model; }

private:
    HttpBackendConfig config_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace alphamine

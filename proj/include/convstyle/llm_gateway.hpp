#pragma once

#include "convstyle/http_client.hpp"
#include "convstyle/prompt_builder.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace convstyle {

/// Decoding settings. Temperature 0.1 with top-k sampling is what the experiments used;
/// top_k and the token budgets were not reported and are our defaults.
struct DecodingConfig {
    double temperature = 0.1;
    int top_k = 40;
    int max_tokens_short = 256;  // Utterance and TwoTurn
    int max_tokens_long = 512;   // LongWindow

    [[nodiscard]] int max_tokens_for(Granularity g) const noexcept {
        return g == Granularity::LongWindow ? max_tokens_long : max_tokens_short;
    }
};

struct CompletionRequest {
    PromptText prompt;
    int max_tokens = 256;
    double temperature = 0.1;
    int top_k = 40;
    std::string stop;
};

CompletionRequest make_request(PromptText prompt, const DecodingConfig& decoding);

struct CompletionResponse {
    std::string text;
    std::string model_name;
    std::int64_t latency_ms = 0;
};

/// Cuts `text` at the first occurrence of `stop`.
std::string truncate_at_stop(std::string_view text, std::string_view stop);

/// A plain-text completion endpoint.
class LlmClient {
public:
    virtual ~LlmClient() = default;

    [[nodiscard]] virtual std::string name() const = 0;

    /// Validates the request, calls the backend and strips everything from the stop sequence on.
    CompletionResponse complete(const CompletionRequest& request) const;

private:
    virtual std::string do_complete(const CompletionRequest& request) const = 0;
};

/// Deterministic client driven by a script of exact / contains rules, optionally falling back to
/// echoing the prompt's final input transcript.
class ScriptedMockClient final : public LlmClient {
public:
    enum class MatchKind { Exact, Contains };

    struct Rule {
        MatchKind match = MatchKind::Exact;
        std::string key;
        std::string reply;
    };

    explicit ScriptedMockClient(PromptTemplate tmpl = {}) : template_(std::move(tmpl)) {}

    void add_rule(Rule rule) { rules_.push_back(std::move(rule)); }
    void set_echo_input(bool on) noexcept { echo_input_ = on; }

    [[nodiscard]] bool echo_input() const noexcept { return echo_input_; }
    [[nodiscard]] const std::vector<Rule>& rules() const noexcept { return rules_; }
    [[nodiscard]] std::size_t call_count() const noexcept { return calls_.load(); }

    [[nodiscard]] std::string name() const override { return "scripted-mock"; }

private:
    std::string do_complete(const CompletionRequest& request) const override;

    PromptTemplate template_;
    std::vector<Rule> rules_;
    bool echo_input_ = false;
    mutable std::atomic<std::size_t> calls_{0};
};

/// Parses newline-delimited {"match", "key", "reply"} records and {"mode": "echo_input"}.
/// Exact rules win over contains rules; contains rules are tried in file order.
std::unique_ptr<ScriptedMockClient> load_mock_script(std::string_view text, const PromptTemplate& tmpl = {});

/// POST {endpoint}/complete {"prompt", "max_tokens", "temperature", "top_k", "stop": [...]} -> {"text"}.
class RemoteCompletionClient final : public LlmClient {
public:
    RemoteCompletionClient(HttpOptions http, std::string model_name = "remote");

    [[nodiscard]] std::string name() const override { return model_name_; }
    [[nodiscard]] const JsonHttpClient& http() const noexcept { return http_; }

private:
    std::string do_complete(const CompletionRequest& request) const override;

    JsonHttpClient http_;
    std::string model_name_;
};

}  // namespace convstyle

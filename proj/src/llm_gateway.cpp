#include "convstyle/llm_gateway.hpp"

#include "convstyle/error.hpp"
#include "convstyle/json_io.hpp"
#include "convstyle/util.hpp"

#include <chrono>

namespace convstyle {

CompletionRequest make_request(PromptText prompt, const DecodingConfig& decoding) {
    CompletionRequest r;
    r.max_tokens = decoding.max_tokens_for(prompt.expected_output_granularity);
    r.temperature = decoding.temperature;
    r.top_k = decoding.top_k;
    r.stop = prompt.stop_sequence;
    r.prompt = std::move(prompt);
    return r;
}

std::string truncate_at_stop(std::string_view text, std::string_view stop) {
    if (stop.empty()) return std::string(text);
    const auto pos = text.find(stop);
    return std::string(text.substr(0, pos));
}

CompletionResponse LlmClient::complete(const CompletionRequest& request) const {
    if (request.prompt.text.empty()) throw Error(ErrorKind::EmptyInput, "empty prompt");
    if (request.max_tokens < 1) throw Error(ErrorKind::InvalidConfig, "max_tokens must be >= 1");
    if (request.temperature < 0.0) throw Error(ErrorKind::InvalidConfig, "temperature must be >= 0");
    if (request.top_k < 1) throw Error(ErrorKind::InvalidConfig, "top_k must be >= 1");
    const auto start = std::chrono::steady_clock::now();
    auto raw = do_complete(request);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    CompletionResponse r;
    r.text = truncate_at_stop(raw, request.stop);
    r.model_name = name();
    r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    return r;
}

std::string ScriptedMockClient::do_complete(const CompletionRequest& request) const {
    ++calls_;
    const auto& prompt = request.prompt.text;
    for (const auto& rule : rules_) {
        if (rule.match == MatchKind::Exact && rule.key == prompt) return rule.reply;
    }
    for (const auto& rule : rules_) {
        if (rule.match == MatchKind::Contains && prompt.find(rule.key) != std::string::npos) return rule.reply;
    }
    if (echo_input_) {
        if (auto transcript = extract_input_transcript(prompt, template_)) return *transcript;
    }
    throw Error(ErrorKind::ScriptMiss, "no scripted reply for prompt digest " + stable_digest(prompt));
}

std::unique_ptr<ScriptedMockClient> load_mock_script(std::string_view text, const PromptTemplate& tmpl) {
    auto client = std::make_unique<ScriptedMockClient>(tmpl);
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto j = parse_record(line, line_no);
        if (j.contains("mode")) {
            if (require_string(j, "mode", line_no) != "echo_input") {
                throw MalformedRecordError(line_no, "unknown mode");
            }
            client->set_echo_input(true);
            continue;
        }
        const auto match = require_string(j, "match", line_no);
        ScriptedMockClient::Rule rule;
        if (match == "exact") {
            rule.match = ScriptedMockClient::MatchKind::Exact;
        } else if (match == "contains") {
            rule.match = ScriptedMockClient::MatchKind::Contains;
        } else {
            throw MalformedRecordError(line_no, "match must be \"exact\" or \"contains\"");
        }
        rule.key = require_string(j, "key", line_no);
        rule.reply = require_string(j, "reply", line_no);
        if (rule.key.empty()) throw MalformedRecordError(line_no, "empty key");
        client->add_rule(std::move(rule));
    }
    return client;
}

RemoteCompletionClient::RemoteCompletionClient(HttpOptions http, std::string model_name)
    : http_(std::move(http)), model_name_(std::move(model_name)) {}

std::string RemoteCompletionClient::do_complete(const CompletionRequest& request) const {
    const Json body{{"prompt", request.prompt.text},
                    {"max_tokens", request.max_tokens},
                    {"temperature", request.temperature},
                    {"top_k", request.top_k},
                    {"stop", Json::array({request.stop})}};
    const auto reply = http_.post("/complete", body);
    const auto it = reply.find("text");
    if (it == reply.end() || !it->is_string()) throw EndpointFailure(200, "reply has no \"text\" field");
    return it->get<std::string>();
}

}  // namespace convstyle

#pragma once

#include "convstyle/dialogue.hpp"
#include "convstyle/exemplar_store.hpp"
#include "convstyle/http_client.hpp"
#include "convstyle/json_io.hpp"
#include "convstyle/llm_gateway.hpp"
#include "convstyle/prompt_builder.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

namespace convstyle {

struct LlmSettings {
    std::string endpoint;
    std::string api_key;
    std::string model = "remote";
    /// Scripted mock used when no endpoint is set.
    std::optional<std::filesystem::path> mock_script;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    std::size_t parallelism = 4;
};

struct EmbeddingSettings {
    std::string endpoint;
    std::size_t dimension = 4096;
    std::string model = "remote";
};

struct PmiSettings {
    double max_utterance_fraction = 0.10;
    std::map<std::string, double> min_usage_fraction = {{"H1", 0.005}, {"B", 0.003}, {"H2", 0.003}};
    double default_min_usage_fraction = 0.003;
    std::size_t top_n = 300;
    std::optional<std::filesystem::path> stopwords_file;
};

struct ServiceSettings {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t quorum = 3;
    std::optional<std::filesystem::path> static_dir;
};

/// Effective settings for one CLI invocation.
struct CliConfig {
    LlmSettings llm;
    EmbeddingSettings embedding;
    PromptTemplate prompt_template;
    std::map<Granularity, std::size_t> shots = {
        {Granularity::Utterance, default_shots(Granularity::Utterance)},
        {Granularity::TwoTurn, default_shots(Granularity::TwoTurn)},
        {Granularity::LongWindow, default_shots(Granularity::LongWindow)},
    };
    double alignment_threshold = 0.2;
    DecodingConfig decoding;
    PmiSettings pmi;
    ServiceSettings service;
    std::uint64_t seed = 0;
    std::size_t workers = 4;

    [[nodiscard]] std::size_t shots_for(Granularity g) const { return shots.at(g); }
    /// With `redact`, secrets are replaced by "***".
    [[nodiscard]] Json to_json(bool redact = true) const;
};

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// Reads the process environment.
EnvLookup process_env();

/// Applies one JSON config object on top of `cfg`. Unknown keys are rejected. Throws Error(InvalidConfig).
void apply_config_json(CliConfig& cfg, const Json& j);

/// Built-in defaults, then the config file, then LLM_ENDPOINT / LLM_API_KEY / EMBED_ENDPOINT, then
/// flag overrides. Throws Error(InvalidConfig) or Error(IoError).
CliConfig load_cli_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                          const CliOverrides& overrides);

HttpOptions llm_http_options(const CliConfig& cfg);
HttpOptions embedding_http_options(const CliConfig& cfg);

}  // namespace convstyle

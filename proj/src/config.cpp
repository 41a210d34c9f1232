#include "convstyle/config.hpp"

#include "convstyle/error.hpp"
#include "convstyle/util.hpp"

#include <cstdlib>
#include <initializer_list>

namespace convstyle {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); }

void check_keys(const Json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) bad(std::string(where) + " must be an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) bad("unknown key \"" + key + "\" in " + std::string(where));
    }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const Json::exception&) {
        bad(std::string("wrong type for \"") + key + "\"");
    }
}

void read_path(const Json& j, const char* key, std::optional<std::filesystem::path>& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    if (it->is_null()) {
        out.reset();
    } else if (it->is_string()) {
        out = it->get<std::string>();
    } else {
        bad(std::string("\"") + key + "\" must be a path string");
    }
}

Json path_json(const std::optional<std::filesystem::path>& p) { return p ? Json(p->string()) : Json(nullptr); }

}  // namespace

Json CliConfig::to_json(bool redact) const {
    auto secret = [&](const std::string& s) { return redact && !s.empty() ? std::string("***") : s; };
    Json shots_json = Json::object();
    for (const auto& [g, k] : shots) shots_json[std::string(to_string(g))] = k;
    return Json{
        {"llm",
         {{"endpoint", llm.endpoint},
          {"api_key", secret(llm.api_key)},
          {"model", llm.model},
          {"mock_script", path_json(llm.mock_script)},
          {"timeout_ms", llm.timeout.count()},
          {"max_retries", llm.max_retries},
          {"parallelism", llm.parallelism}}},
        {"embedding",
         {{"endpoint", embedding.endpoint},
          {"dimension", embedding.dimension},
          {"model", embedding.model}}},
        {"template",
         {{"reduction_header", prompt_template.reduction_header},
          {"injection_header", prompt_template.injection_header},
          {"example_separator", prompt_template.example_separator},
          {"input_marker", prompt_template.input_marker},
          {"output_marker", prompt_template.output_marker},
          {"stop_sequence", prompt_template.stop_sequence}}},
        {"selection", {{"shots", shots_json}}},
        {"alignment_threshold", alignment_threshold},
        {"decoding",
         {{"temperature", decoding.temperature},
          {"top_k", decoding.top_k},
          {"max_tokens_short", decoding.max_tokens_short},
          {"max_tokens_long", decoding.max_tokens_long}}},
        {"pmi",
         {{"max_utterance_fraction", pmi.max_utterance_fraction},
          {"min_usage_fraction", pmi.min_usage_fraction},
          {"default_min_usage_fraction", pmi.default_min_usage_fraction},
          {"top_n", pmi.top_n},
          {"stopwords_file", path_json(pmi.stopwords_file)}}},
        {"service",
         {{"host", service.host},
          {"port", service.port},
          {"quorum", service.quorum},
          {"static_dir", path_json(service.static_dir)}}},
        {"seed", seed},
        {"workers", workers},
    };
}

EnvLookup process_env() {
    return [](const char* name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name); v != nullptr && *v != '\0') return std::string(v);
        return std::nullopt;
    };
}

void apply_config_json(CliConfig& cfg, const Json& j) {
    check_keys(j, "config",
               {"llm", "embedding", "template", "selection", "alignment_threshold", "decoding", "pmi", "service",
                "seed", "workers"});
    if (auto it = j.find("llm"); it != j.end()) {
        check_keys(*it, "llm", {"endpoint", "api_key", "model", "mock_script", "timeout_ms", "max_retries", "parallelism"});
        read(*it, "endpoint", cfg.llm.endpoint);
        read(*it, "api_key", cfg.llm.api_key);
        read(*it, "model", cfg.llm.model);
        read_path(*it, "mock_script", cfg.llm.mock_script);
        std::int64_t timeout = cfg.llm.timeout.count();
        read(*it, "timeout_ms", timeout);
        cfg.llm.timeout = std::chrono::milliseconds(timeout);
        read(*it, "max_retries", cfg.llm.max_retries);
        read(*it, "parallelism", cfg.llm.parallelism);
    }
    if (auto it = j.find("embedding"); it != j.end()) {
        check_keys(*it, "embedding", {"endpoint", "dimension", "model"});
        read(*it, "endpoint", cfg.embedding.endpoint);
        read(*it, "dimension", cfg.embedding.dimension);
        read(*it, "model", cfg.embedding.model);
    }
    if (auto it = j.find("template"); it != j.end()) {
        check_keys(*it, "template",
                   {"reduction_header", "injection_header", "example_separator", "input_marker", "output_marker",
                    "stop_sequence"});
        auto& t = cfg.prompt_template;
        read(*it, "reduction_header", t.reduction_header);
        read(*it, "injection_header", t.injection_header);
        read(*it, "example_separator", t.example_separator);
        read(*it, "input_marker", t.input_marker);
        read(*it, "output_marker", t.output_marker);
        read(*it, "stop_sequence", t.stop_sequence);
    }
    if (auto it = j.find("selection"); it != j.end()) {
        check_keys(*it, "selection", {"shots"});
        if (auto s = it->find("shots"); s != it->end()) {
            check_keys(*s, "selection.shots", {"utterance", "two_turn", "long_window"});
            for (const auto& [name, value] : s->items()) {
                if (!value.is_number_unsigned() || value.get<std::size_t>() == 0) {
                    bad("shots." + name + " must be a positive integer");
                }
                cfg.shots[*parse_granularity(name)] = value.get<std::size_t>();
            }
        }
    }
    read(j, "alignment_threshold", cfg.alignment_threshold);
    if (auto it = j.find("decoding"); it != j.end()) {
        check_keys(*it, "decoding", {"temperature", "top_k", "max_tokens_short", "max_tokens_long"});
        read(*it, "temperature", cfg.decoding.temperature);
        read(*it, "top_k", cfg.decoding.top_k);
        read(*it, "max_tokens_short", cfg.decoding.max_tokens_short);
        read(*it, "max_tokens_long", cfg.decoding.max_tokens_long);
    }
    if (auto it = j.find("pmi"); it != j.end()) {
        check_keys(*it, "pmi",
                   {"max_utterance_fraction", "min_usage_fraction", "default_min_usage_fraction", "top_n",
                    "stopwords_file"});
        read(*it, "max_utterance_fraction", cfg.pmi.max_utterance_fraction);
        read(*it, "min_usage_fraction", cfg.pmi.min_usage_fraction);
        read(*it, "default_min_usage_fraction", cfg.pmi.default_min_usage_fraction);
        read(*it, "top_n", cfg.pmi.top_n);
        read_path(*it, "stopwords_file", cfg.pmi.stopwords_file);
    }
    if (auto it = j.find("service"); it != j.end()) {
        check_keys(*it, "service", {"host", "port", "quorum", "static_dir"});
        read(*it, "host", cfg.service.host);
        read(*it, "port", cfg.service.port);
        read(*it, "quorum", cfg.service.quorum);
        read_path(*it, "static_dir", cfg.service.static_dir);
    }
    read(j, "seed", cfg.seed);
    read(j, "workers", cfg.workers);
}

CliConfig load_cli_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                          const CliOverrides& overrides) {
    CliConfig cfg;
    if (file) {
        Json j;
        try {
            j = Json::parse(read_file(*file));
        } catch (const Json::exception& e) {
            bad("config file " + file->string() + " is not valid JSON: " + e.what());
        }
        apply_config_json(cfg, j);
    }
    if (env) {
        if (auto v = env("LLM_ENDPOINT")) cfg.llm.endpoint = *v;
        if (auto v = env("LLM_API_KEY")) cfg.llm.api_key = *v;
        if (auto v = env("EMBED_ENDPOINT")) cfg.embedding.endpoint = *v;
    }
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.workers) cfg.workers = *overrides.workers;

    if (cfg.workers == 0) bad("workers must be positive");
    if (cfg.embedding.dimension == 0) bad("embedding.dimension must be positive");
    if (!(cfg.alignment_threshold >= -1.0 && cfg.alignment_threshold <= 1.0)) bad("alignment_threshold outside [-1, 1]");
    if (cfg.service.quorum == 0) bad("service.quorum must be positive");
    cfg.prompt_template.validate();
    return cfg;
}

HttpOptions llm_http_options(const CliConfig& cfg) {
    HttpOptions h;
    h.endpoint = cfg.llm.endpoint;
    if (!cfg.llm.api_key.empty()) h.auth_header_value = "Bearer " + cfg.llm.api_key;
    h.timeout = cfg.llm.timeout;
    h.max_retries = cfg.llm.max_retries;
    h.parallelism = cfg.llm.parallelism;
    return h;
}

HttpOptions embedding_http_options(const CliConfig& cfg) {
    HttpOptions h;
    h.endpoint = cfg.embedding.endpoint;
    h.timeout = cfg.llm.timeout;
    h.max_retries = cfg.llm.max_retries;
    h.parallelism = cfg.llm.parallelism;
    return h;
}

}  // namespace convstyle

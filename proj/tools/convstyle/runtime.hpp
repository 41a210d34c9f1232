#pragma once

#include "convstyle/auto_eval.hpp"
#include "convstyle/config.hpp"
#include "convstyle/embedding.hpp"
#include "convstyle/llm_gateway.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

namespace convstyle::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kPartial = 2, kConfig = 3 };

struct GlobalFlags {
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    bool dry_run = false;
};

/// Everything a command needs once flags are parsed and the config is merged.
class Runtime {
public:
    Runtime(CliConfig cfg, bool dry_run, std::ostream& out, std::ostream& err)
        : cfg_(std::move(cfg)), dry_run_(dry_run), out_(out), err_(err) {}

    [[nodiscard]] const CliConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] bool dry_run() const noexcept { return dry_run_; }
    std::ostream& out() { return out_; }
    std::ostream& err() { return err_; }

    /// Remote endpoint when configured, otherwise the scripted mock. Throws InvalidConfig with neither.
    const LlmClient& llm();
    const EmbeddingProvider& embedder();

    /// Writes `content` atomically and notes the path on stderr.
    void write_output(const std::filesystem::path& path, std::string_view content);
    void warn(const std::string& message);

private:
    CliConfig cfg_;
    bool dry_run_;
    std::ostream& out_;
    std::ostream& err_;
    std::unique_ptr<LlmClient> llm_;
    std::shared_ptr<const EmbeddingProvider> embedder_;
};

using Action = std::function<int(Runtime&)>;

void register_data_commands(CLI::App& root, std::vector<std::pair<CLI::App*, Action>>& actions);
void register_transfer_commands(CLI::App& root, std::vector<std::pair<CLI::App*, Action>>& actions);
void register_eval_commands(CLI::App& root, std::vector<std::pair<CLI::App*, Action>>& actions);
void register_humaneval_commands(CLI::App& root, std::vector<std::pair<CLI::App*, Action>>& actions);
void register_downstream_commands(CLI::App& root, std::vector<std::pair<CLI::App*, Action>>& actions);

// Shared helpers.
Granularity granularity_arg(const std::string& s);
Speaker speaker_arg(const std::string& s);
SelectionStrategy strategy_arg(const std::string& s, std::uint64_t seed);
Corpus load_corpus_file(Runtime& rt, const std::filesystem::path& path, const StyleDomain& style);
ExemplarSet load_exemplar_file(const std::filesystem::path& path);

/// A saved local model, a remote scorer, or one trained on the spot from two corpora.
struct ClassifierSource {
    std::optional<std::filesystem::path> model;
    std::string endpoint;
    std::optional<std::filesystem::path> train_source;
    std::optional<std::filesystem::path> train_target;
    std::optional<std::filesystem::path> save_model;

    void add_options(CLI::App& app);
    std::unique_ptr<StyleClassifier> build(Runtime& rt, const StyleDomain& source, const StyleDomain& target) const;
};

/// Parses `argv` and runs the selected command, mapping failures to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const EnvLookup& env);

}  // namespace convstyle::cli

#pragma once

#include "convstyle/embedding.hpp"
#include "convstyle/http_client.hpp"
#include "convstyle/json_io.hpp"
#include "convstyle/style_analytics.hpp"
#include "convstyle/transfer_pipeline.hpp"

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace convstyle {

/// Binary source-vs-target style discriminator. score() is P(target style | utterance).
class StyleClassifier {
public:
    virtual ~StyleClassifier() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual const StyleDomain& source() const = 0;
    [[nodiscard]] virtual const StyleDomain& target() const = 0;
    [[nodiscard]] virtual double score(std::string_view utterance) const = 0;
};

/// Multinomial naive Bayes over normalised tokens with add-one smoothing.
/// Class 0 is the source style, class 1 the target style.
struct LocalClassifierModel {
    StyleDomain source;
    StyleDomain target;
    std::array<double, 2> log_prior{};
    std::array<std::size_t, 2> total_tokens{};
    std::map<std::string, std::array<std::size_t, 2>, std::less<>> token_counts;
    bool strip_signatures = false;

    [[nodiscard]] std::size_t vocabulary_size() const noexcept { return token_counts.size(); }
    [[nodiscard]] bool in_vocabulary(std::string_view token) const { return token_counts.contains(token); }
    [[nodiscard]] double log_likelihood(std::string_view token, int cls) const;
};

class LocalStyleClassifier final : public StyleClassifier {
public:
    LocalStyleClassifier(LocalClassifierModel model,
                         std::shared_ptr<const TokenNormalizer> normalizer = default_normalizer());

    [[nodiscard]] std::string name() const override { return "local-nb"; }
    [[nodiscard]] const StyleDomain& source() const override { return model_.source; }
    [[nodiscard]] const StyleDomain& target() const override { return model_.target; }
    [[nodiscard]] double score(std::string_view utterance) const override;

    /// {P(source), P(target)}.
    [[nodiscard]] std::array<double, 2> class_probabilities(std::string_view utterance) const;
    [[nodiscard]] std::vector<std::string> preprocess(std::string_view utterance) const;
    [[nodiscard]] const LocalClassifierModel& model() const noexcept { return model_; }

    Json to_json() const;
    static LocalStyleClassifier from_json(const Json& j);

private:
    LocalClassifierModel model_;
    std::shared_ptr<const TokenNormalizer> normalizer_;
};

/// POST {endpoint}/score {"text", "target_style"} -> {"probability"}; the value is passed through.
class RemoteStyleClassifier final : public StyleClassifier {
public:
    RemoteStyleClassifier(HttpOptions http, StyleDomain source, StyleDomain target);

    [[nodiscard]] std::string name() const override { return "remote"; }
    [[nodiscard]] const StyleDomain& source() const override { return source_; }
    [[nodiscard]] const StyleDomain& target() const override { return target_; }
    [[nodiscard]] double score(std::string_view utterance) const override;

private:
    JsonHttpClient http_;
    StyleDomain source_;
    StyleDomain target_;
};

enum class SignatureStripping { Auto, On, Off };

struct ClassifierTrainConfig {
    std::uint64_t seed = 0;
    double holdout_fraction = 0.10;
    Speaker party = Speaker::Agent;
    SignatureStripping stripping = SignatureStripping::Auto;
    /// Auto mode strips when either corpus signs more than this share of turns.
    double signature_rate_threshold = 0.5;
    std::shared_ptr<const TokenNormalizer> normalizer = default_normalizer();
};

struct ClassifierTrainReport {
    std::size_t train_per_class = 0;
    std::size_t holdout_per_class = 0;
    double held_out_accuracy = 0.0;
    bool signatures_stripped = false;
};

/// Fits the model on explicit utterance lists (no balancing, no hold-out).
LocalClassifierModel fit_naive_bayes(std::span<const std::string> source_texts,
                                     std::span<const std::string> target_texts, const StyleDomain& source,
                                     const StyleDomain& target, bool strip_signatures,
                                     const TokenNormalizer& normalizer);

struct TrainedStyleClassifier {
    LocalStyleClassifier classifier;
    ClassifierTrainReport report;
};

/// Balances the two corpora by down-sampling, holds out a stratified fraction, trains and reports
/// held-out accuracy. Throws EmptyCorpus or DegenerateVocabulary.
TrainedStyleClassifier train_local_style_classifier(const Corpus& source, const Corpus& target,
                                                    const ClassifierTrainConfig& cfg = {});

/// Throws EmptyInput for blank utterances.
double style_strength(const StyleClassifier& classifier, std::string_view utterance);

/// Cosine similarity of the two embeddings. Throws EmptyInput.
double semantic_similarity(const EmbeddingProvider& embedder, std::string_view source_utt,
                           std::string_view transferred_utt);

struct EvalRow {
    std::string conversation_id;
    std::size_t segment_index = 0;
    std::size_t source_turn = 0;
    std::size_t target_turn = 0;
    std::string source_text;
    std::string target_text;
    double style_strength = 0.0;
    double semantic_similarity = 0.0;
};

struct EvalReport {
    StyleDomain source;
    StyleDomain target;
    std::size_t results = 0;
    std::size_t scored = 0;
    std::size_t discarded = 0;
    /// Population statistics; unset when nothing was scored.
    std::optional<MeanStd> style_strength;
    std::optional<MeanStd> semantic_similarity;
    std::vector<EvalRow> rows;

    [[nodiscard]] bool degenerate() const noexcept { return scored == 0; }
    Json to_json() const;
};

/// Scores every kept alignment pair. Throws DirectionMismatch or EmptyInput.
EvalReport evaluate_run(std::span<const TransferResult> results, const StyleClassifier& classifier,
                        const EmbeddingProvider& embedder);

struct AblationGrid {
    std::vector<std::size_t> shots;
    std::vector<SelectionStrategy> strategies;
    Granularity granularity = Granularity::Utterance;
};

struct AblationCell {
    enum class Status { Ok, NotSupported, Failed };

    std::size_t shots = 0;
    SelectionStrategy strategy;
    Status status = Status::Ok;
    std::string reason;
    std::optional<MeanStd> style_strength;
    std::size_t failures = 0;

    [[nodiscard]] std::string label() const;
};

struct AblationReport {
    StyleDomain source;
    StyleDomain target;
    Granularity granularity = Granularity::Utterance;
    std::vector<AblationCell> cells;
    /// Cell with the highest mean style strength; first wins ties.
    std::optional<std::size_t> best;

    Json to_json() const;
};

struct AblationOptions {
    /// Prompts longer than this many whitespace tokens make a cell NotSupported.
    std::size_t token_budget = 2048;
    std::size_t workers = 1;
};

/// Runs transfer + evaluation for every (shots, strategy) cell on the same segments.
AblationReport run_ablation(const AblationGrid& grid, std::span<const Segment> validation_segments,
                            const TransferConfig& base, const TransferDeps& deps,
                            const StyleClassifier& classifier, const AblationOptions& options = {});

/// Plain-text table: one row per direction, one column per cell, "N/S" for unsupported cells.
std::string render_ablation_table(std::span<const AblationReport> reports);

}  // namespace convstyle

#pragma once

#include "convstyle/dialogue.hpp"
#include "convstyle/embedding.hpp"
#include "convstyle/json_io.hpp"
#include "convstyle/transfer_pipeline.hpp"
#include "convstyle/util.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace convstyle {

enum class Split { Train, Validation, Test };

std::string_view to_string(Split s) noexcept;
std::optional<Split> parse_split(std::string_view s);

struct IntentExample {
    std::string utterance;
    std::string intent;

    bool operator==(const IntentExample&) const = default;
};

struct IntentDataset {
    StyleDomain style_domain;
    Split split = Split::Train;
    std::vector<IntentExample> examples;

    [[nodiscard]] std::set<std::string> labels() const;
    bool operator==(const IntentDataset&) const = default;
};

/// Reads newline-delimited {"utterance","intent","style_domain","split"} records, grouped into one
/// dataset per (style_domain, split) in order of first appearance. Throws MalformedRecordError.
std::vector<IntentDataset> parse_intent_file(std::string_view text);
std::string serialize_intent_dataset(const IntentDataset& dataset);

/// Picks the dataset with the given domain and split out of a parsed file.
const IntentDataset& find_dataset(std::span<const IntentDataset> datasets, const StyleDomain& domain, Split split);

struct IntentTransferOutcome {
    IntentDataset dataset;
    std::size_t transferred = 0;
    std::size_t failures = 0;
    std::vector<TransferFailure> failure_records;
};

/// Restyles every utterance through the two-step pipeline (Customer party, Utterance granularity).
/// Labels are kept verbatim; examples whose transfer fails keep the original text and are counted.
/// Throws Error(InvalidConfig) for a non-train split or a config that is not customer/utterance.
IntentTransferOutcome transfer_training_set(const IntentDataset& dataset, const TransferConfig& cfg,
                                            const TransferDeps& deps, std::size_t workers = 1);

/// Nearest-centroid classifier over utterance embeddings.
class CentroidIntentClassifier {
public:
    /// Throws Error(SingleClass) with fewer than two labels, EmptyInput for blank utterances.
    static CentroidIntentClassifier train(const IntentDataset& train, const EmbeddingProvider& embedder);

    /// Highest cosine to a centroid; ties go to the lexicographically lowest label.
    [[nodiscard]] std::string predict(std::string_view utterance) const;
    [[nodiscard]] std::set<std::string> labels() const;
    [[nodiscard]] const std::map<std::string, std::vector<double>>& centroids() const noexcept { return centroids_; }

private:
    CentroidIntentClassifier(const EmbeddingProvider& embedder, std::map<std::string, std::vector<double>> centroids)
        : embedder_(&embedder), centroids_(std::move(centroids)) {}

    const EmbeddingProvider* embedder_;
    std::map<std::string, std::vector<double>> centroids_;
};

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct F1Report {
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
    double weighted_f1 = 0.0;
    double accuracy = 0.0;
    std::map<std::string, ClassScores> per_class;

    Json to_json() const;
};

/// Scores over the labels present in gold or predicted. Throws LengthMismatch or EmptyInput.
F1Report f1_report(std::span<const std::string> gold, std::span<const std::string> predicted);

/// Throws UnknownLabel when a test label was never seen in training, EmptyInput on an empty set.
F1Report evaluate_f1(const CentroidIntentClassifier& model, const IntentDataset& test);

struct DownstreamConfig {
    std::size_t repeats = 10;
    std::uint64_t seed = 0;
    /// Share of the training set each repeat trains on.
    double train_fraction = 0.9;
};

struct DownstreamRun {
    std::uint64_t seed = 0;
    F1Report original;
    F1Report transferred;
};

struct DownstreamReport {
    std::vector<DownstreamRun> runs;
    MeanStd original_macro;
    MeanStd transferred_macro;
    /// Mean of transferred minus original macro F1.
    double mean_difference = 0.0;
    /// Two-sided paired sign-flip permutation test on the per-repeat macro F1 differences.
    double p_value = 1.0;

    Json to_json() const;
};

/// Two-sided paired sign-flip permutation test of mean(differences) == 0. Exact enumeration up to
/// 20 pairs, seeded Monte Carlo beyond.
double paired_permutation_p_value(std::span<const double> differences, std::uint64_t seed = 0);

/// Trains on the original and transferred training sets (same seeded subsample of indices per
/// repeat) and compares macro F1 on `test`. The two training sets must be index-aligned with equal
/// labels; throws LengthMismatch or InvalidConfig otherwise.
DownstreamReport compare_downstream(const IntentDataset& original_train, const IntentDataset& transferred_train,
                                    const IntentDataset& test, const EmbeddingProvider& embedder,
                                    const DownstreamConfig& cfg = {});

}  // namespace convstyle

#pragma once

#include "convstyle/json_io.hpp"
#include "convstyle/transfer_pipeline.hpp"
#include "convstyle/util.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace convstyle {

enum class TaskKind { StyleStrength, Appropriateness, SemanticCorrectness };

std::string_view to_string(TaskKind k) noexcept;
std::optional<TaskKind> parse_task_kind(std::string_view s);
inline bool is_ranking(TaskKind k) noexcept { return k != TaskKind::SemanticCorrectness; }

/// Listed from least to most severe.
enum class SimilarityLabel { Similar, PartiallySimilar, Dissimilar };

std::string_view to_string(SimilarityLabel l) noexcept;
std::optional<SimilarityLabel> parse_similarity_label(std::string_view s);

struct Candidate {
    std::string model_key;
    std::string text;
};

/// One item shown to annotators. Candidates are stored in served (shuffled) order; the model keys
/// never leave the server.
struct AnnotationTask {
    std::string task_id;
    TaskKind kind = TaskKind::StyleStrength;
    std::optional<std::string> context;
    std::string source_utterance;
    std::vector<Candidate> candidates;
    std::vector<std::string> reference_style_examples;
    std::uint64_t shuffle_seed = 0;

    /// Payload for annotators: candidates as {"index", "text"} with no model identity.
    Json to_public_json() const;
    /// Full record for the server-side task file, including the de-anonymisation map.
    Json to_private_json() const;
    static AnnotationTask from_private_json(const Json& j);
};

struct Annotation {
    std::string task_id;
    std::string annotator_id;
    std::variant<std::vector<int>, std::vector<SimilarityLabel>> payload;

    [[nodiscard]] bool has_ranks() const noexcept { return std::holds_alternative<std::vector<int>>(payload); }
    [[nodiscard]] const std::vector<int>& ranks() const { return std::get<std::vector<int>>(payload); }
    [[nodiscard]] const std::vector<SimilarityLabel>& labels() const {
        return std::get<std::vector<SimilarityLabel>>(payload);
    }

    Json to_json() const;
    /// Throws Error(InvalidAnnotation).
    static Annotation from_json(const Json& j);
};

/// Throws Error(InvalidAnnotation) when the payload does not fit the task.
void validate_annotation(const Annotation& a, const AnnotationTask& task);

struct FilterConfig {
    /// Filtering step 1: candidates whose best alignment similarity is below this are dropped.
    double min_similarity = 0.2;
    /// Tasks left with fewer candidates are dropped.
    std::size_t min_candidates = 2;
    /// Target-style utterances shown with StyleStrength tasks.
    std::vector<std::string> reference_examples;
};

struct TaskBuildResult {
    std::vector<AnnotationTask> tasks;
    std::size_t source_utterances = 0;
    std::size_t candidates_total = 0;
    std::size_t candidates_dropped_step1 = 0;
    std::size_t tasks_dropped_too_few = 0;
    std::size_t tasks_dropped_step2 = 0;
};

/// Builds one task per source utterance shared by every model, applying both filtering steps and
/// shuffling candidates with a per-task seed derived from `rng_seed`. Throws ModelsMisaligned.
TaskBuildResult make_tasks(const std::map<std::string, std::vector<TransferResult>>& results_by_model, TaskKind kind,
                           const FilterConfig& filter, std::uint64_t rng_seed);

struct RankScaleResult {
    std::vector<double> scaled;
};

/// Reverse ranks (k - r + 1) min-max scaled to [0, 1]; an all-tie list scales to 0.5 everywhere.
/// Throws RankOutOfRange.
RankScaleResult scale_ranks(std::span<const int> ranks);

/// Per-model mean (population std) of annotator-averaged scaled ranks. Throws UnknownTask or
/// EmptyAnnotationSet.
std::map<std::string, MeanStd> aggregate_rank_scores(std::span<const Annotation> annotations,
                                                     std::span<const AnnotationTask> tasks);

/// Tie-corrected Spearman: fractional ranks, then Pearson. Unset when either side is constant.
/// Throws LengthMismatch or TooShort.
std::optional<double> spearman(std::span<const int> r1, std::span<const int> r2);

/// Average over tasks of the average Spearman over annotator pairs. Pairs with an undefined
/// coefficient are skipped; unset when nothing is defined.
std::optional<double> rank_agreement(std::span<const Annotation> annotations, std::span<const AnnotationTask> tasks);

/// Nominal Krippendorff's alpha over an items x annotators matrix; unset cells are missing.
/// Throws NoPairableValues.
double krippendorff_alpha(const std::vector<std::vector<std::optional<int>>>& data);

/// Most frequent label; two-way ties go to the more severe label, a three-way tie to PartiallySimilar.
/// Throws EmptyInput.
SimilarityLabel majority_vote(std::span<const SimilarityLabel> labels);

struct LabelSummary {
    std::map<SimilarityLabel, std::size_t> majority_counts;
    std::size_t items = 0;
};

/// Majority label per (task, candidate), tallied per model.
std::map<std::string, LabelSummary> aggregate_semantic_labels(std::span<const Annotation> annotations,
                                                              std::span<const AnnotationTask> tasks);

/// Krippendorff's alpha over every (task, candidate) item of SemanticCorrectness annotations.
double label_agreement(std::span<const Annotation> annotations, std::span<const AnnotationTask> tasks);

struct WinRate {
    std::size_t wins = 0;
    std::size_t comparisons = 0;

    [[nodiscard]] double percent() const noexcept {
        return comparisons == 0 ? 0.0 : 100.0 * static_cast<double>(wins) / static_cast<double>(comparisons);
    }
};

/// win_rates[{X, Y}] counts comparisons where X was ranked strictly better than Y. Ties count
/// toward the denominator only. Throws EmptyAnnotationSet.
std::map<std::pair<std::string, std::string>, WinRate> pairwise_win_rates(std::span<const Annotation> annotations,
                                                                          std::span<const AnnotationTask> tasks);

/// Aggregated results of every task kind present in `tasks`.
Json summarize_results(std::span<const Annotation> annotations, std::span<const AnnotationTask> tasks);

std::string serialize_tasks(std::span<const AnnotationTask> tasks);
std::vector<AnnotationTask> parse_tasks(std::string_view text);
std::string serialize_annotations(std::span<const Annotation> annotations);
std::vector<Annotation> parse_annotations(std::string_view text);

}  // namespace convstyle

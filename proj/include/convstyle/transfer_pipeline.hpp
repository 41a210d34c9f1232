#pragma once

#include "convstyle/dialogue.hpp"
#include "convstyle/embedding.hpp"
#include "convstyle/exemplar_store.hpp"
#include "convstyle/json_io.hpp"
#include "convstyle/llm_gateway.hpp"
#include "convstyle/prompt_builder.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace convstyle {

struct TransferConfig {
    StyleDomain source_style;
    StyleDomain target_style;
    Granularity granularity = Granularity::Utterance;
    std::size_t k_shots = 10;
    SelectionStrategy strategy;
    /// Transferred turns whose best match falls below this similarity are discarded.
    double alignment_threshold = 0.2;
    /// Side of the dialogue being restyled.
    Speaker party = Speaker::Agent;

    /// Throws Error(InvalidConfig).
    void validate() const;

    Json to_json() const;
    static TransferConfig from_json(const Json& j);
};

/// Non-owning handles to everything a transfer needs.
struct TransferDeps {
    /// Pairs in the source style; drives the reduction step.
    const ExemplarSet* source_exemplars = nullptr;
    /// Pairs in the target style; drives the injection step.
    const ExemplarSet* target_exemplars = nullptr;
    const EmbeddingProvider* embedder = nullptr;
    const LlmClient* llm = nullptr;
    PromptTemplate prompt_template;
    DecodingConfig decoding;
};

struct AlignedPair {
    std::size_t source_agent_turn_index = 0;
    std::size_t target_agent_turn_index = 0;
    double similarity = 0.0;
    bool discarded = false;

    bool operator==(const AlignedPair&) const = default;
};

struct TransferResult {
    Segment source;
    Segment style_free;
    Segment target;
    std::vector<AlignedPair> alignment;
    std::string reduction_prompt_digest;
    std::string injection_prompt_digest;
    TransferConfig config;

    Json to_json() const;
    static TransferResult from_json(const Json& j);
};

/// Result of one pipeline step, kept for provenance.
struct StepOutput {
    Segment segment;
    PromptText prompt;
    std::string raw_completion;
};

StepOutput run_reduction(const Segment& segment, const TransferConfig& cfg, const TransferDeps& deps);
StepOutput run_injection(const Segment& style_free, const TransferConfig& cfg, const TransferDeps& deps);

/// Styled -> style-free. Throws the dependencies' errors or ParseFailureError.
Segment reduce_style(const Segment& segment, const TransferConfig& cfg, const TransferDeps& deps);

/// Style-free -> target style.
Segment inject_style(const Segment& style_free, const TransferConfig& cfg, const TransferDeps& deps);

/// Pairs every source turn of `party` with its most similar target turn of `party`
/// (many-to-one allowed, ties to the lowest target index). Indices count `party` turns only.
std::vector<AlignedPair> align_outputs(const Segment& source, const Segment& target,
                                       const EmbeddingProvider& embedder, double threshold,
                                       Speaker party = Speaker::Agent);

TransferResult transfer(const Segment& segment, const TransferConfig& cfg, const TransferDeps& deps);

struct TransferFailure {
    Segment source;
    std::string step;
    std::string error_kind;
    std::string message;
    std::optional<std::string> raw_completion;

    Json to_json() const;
};

/// Exactly one of `result` / `failure` is set.
struct BatchRecord {
    std::optional<TransferResult> result;
    std::optional<TransferFailure> failure;

    [[nodiscard]] bool ok() const noexcept { return result.has_value(); }
    Json to_json() const;
};

/// Transfers every segment, isolating per-segment errors into failure records. Output order
/// equals input order regardless of `workers`.
std::vector<BatchRecord> transfer_batch(std::span<const Segment> segments, const TransferConfig& cfg,
                                        const TransferDeps& deps, std::size_t workers = 1);

std::string serialize_batch(std::span<const BatchRecord> records);

/// Reads a results file, keeping successful records only. `failures`, when given, receives the count
/// of failure records skipped.
std::vector<TransferResult> parse_transfer_results(std::string_view text, std::size_t* failures = nullptr);

}  // namespace convstyle

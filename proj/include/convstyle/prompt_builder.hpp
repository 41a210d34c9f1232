#pragma once

#include "convstyle/dialogue.hpp"
#include "convstyle/exemplar_store.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace convstyle {

/// Wording of the two in-context prompts. Every field can be replaced from configuration.
///
/// Layout (reduction; injection swaps the exemplar sides):
///
///     <header>
///     <blank line>
///     <input_marker>
///     <styled transcript>
///     <output_marker>
///     <style-free transcript><example_separator>   (once per exemplar)
///     <input_marker>
///     <input transcript>
///     <output_marker>
///
/// The separator doubles as the stop sequence, so a k-shot prompt contains it exactly k times.
struct PromptTemplate {
    std::string reduction_header = "Rewrite the conversation without any style.";
    std::string injection_header = "Rewrite the conversation in the target style.";
    std::string example_separator = "\n###\n";
    std::string input_marker = "Conversation:";
    std::string output_marker = "Rewritten:";
    std::string stop_sequence = "\n###\n";

    /// Throws Error(InvalidTemplate).
    void validate() const;

    bool operator==(const PromptTemplate&) const = default;
};

struct PromptText {
    std::string text;
    std::string stop_sequence;
    Granularity expected_output_granularity = Granularity::Utterance;
};

/// Styled -> style-free. Throws EmptyExemplars or GranularityMismatch.
PromptText build_reduction_prompt(std::span<const ExemplarPair> exemplars, const Segment& input,
                                  const PromptTemplate& tmpl);

/// Style-free -> target style. Throws EmptyExemplars or GranularityMismatch.
PromptText build_injection_prompt(std::span<const ExemplarPair> exemplars, const Segment& input,
                                  const PromptTemplate& tmpl);

/// Recovers the transcript of the final (test) input block of a prompt built with `tmpl`.
std::optional<std::string> extract_input_transcript(std::string_view prompt, const PromptTemplate& tmpl);

/// Reads "[Customer] ..." / "[Agent] ..." lines out of a completion.
///
/// Lines before the first tag are dropped. After the first turn, one blank line between turns is
/// tolerated; any other non-tag line ends the parse. Utterance granularity keeps only the first
/// turn of `party`. `expected_speakers` is advisory and never enforced here.
/// Throws NoParseableTurns, or NoAgentTurn for an utterance completion lacking a `party` turn.
Segment parse_completion(std::string_view raw, Granularity granularity,
                         const std::optional<std::vector<Speaker>>& expected_speakers = std::nullopt,
                         Speaker party = Speaker::Agent);

}  // namespace convstyle

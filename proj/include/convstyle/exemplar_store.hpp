#pragma once

#include "convstyle/dialogue.hpp"
#include "convstyle/embedding.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace convstyle {

/// A styled conversation and its turn-parallel style-free rewrite.
struct ExemplarPair {
    Conversation styled;
    Conversation style_free;
    Granularity granularity = Granularity::Utterance;
};

enum class ExemplarSide { Styled, StyleFree };

/// All pairs of one style domain at one granularity, in file order.
class ExemplarSet {
public:
    ExemplarSet() = default;
    ExemplarSet(StyleDomain domain, Granularity granularity, std::vector<ExemplarPair> pairs);

    [[nodiscard]] const StyleDomain& style_domain() const noexcept { return domain_; }
    [[nodiscard]] Granularity granularity() const noexcept { return granularity_; }
    [[nodiscard]] const std::vector<ExemplarPair>& pairs() const noexcept { return pairs_; }
    [[nodiscard]] std::size_t size() const noexcept { return pairs_.size(); }
    [[nodiscard]] bool empty() const noexcept { return pairs_.empty(); }

    /// Concatenated `party` text on `side` of pair i, or nothing when that side has no such turns.
    [[nodiscard]] const std::optional<std::string>& key_text(std::size_t i, ExemplarSide side,
                                                             Speaker party) const;

private:
    StyleDomain domain_;
    Granularity granularity_ = Granularity::Utterance;
    std::vector<ExemplarPair> pairs_;
    // [pair][side][party]
    std::vector<std::array<std::array<std::optional<std::string>, 2>, 2>> keys_;
};

/// Reads newline-delimited exemplar records. Every record must share one style domain and
/// granularity. Throws PairError(TurnCountMismatch | SpeakerSequenceMismatch) or MalformedRecordError.
ExemplarSet load_exemplars(std::string_view text);
std::string serialize_exemplars(const ExemplarSet& set);

struct SelectionStrategy {
    enum class Kind { Dynamic, Random };
    Kind kind = Kind::Dynamic;
    std::uint64_t seed = 0;

    static SelectionStrategy dynamic() { return {Kind::Dynamic, 0}; }
    static SelectionStrategy random(std::uint64_t seed) { return {Kind::Random, seed}; }

    bool operator==(const SelectionStrategy&) const = default;
};

std::string to_string(const SelectionStrategy& s);

struct SelectionOptions {
    std::size_t k = 1;
    SelectionStrategy strategy;
    /// Reduction keys on the styled side, injection on the style-free side.
    ExemplarSide key_side = ExemplarSide::Styled;
    Speaker party = Speaker::Agent;
};

/// Indices of the k most similar entries, least similar first (most similar last).
/// Ties prefer the lower index when truncating.
std::vector<std::size_t> order_by_similarity(std::span<const double> similarities, std::size_t k);

/// Indices into set.pairs() in prompt order. Throws KTooLarge or NoAgentTurnsInQuery.
std::vector<std::size_t> select_exemplar_indices(const ExemplarSet& set, const Segment& query,
                                                 const SelectionOptions& options,
                                                 const EmbeddingProvider& embedder);

std::vector<ExemplarPair> select_exemplars(const ExemplarSet& set, const Segment& query,
                                           const SelectionOptions& options,
                                           const EmbeddingProvider& embedder);

/// Default shots per granularity: 10, 10 and 8.
std::size_t default_shots(Granularity g) noexcept;

}  // namespace convstyle

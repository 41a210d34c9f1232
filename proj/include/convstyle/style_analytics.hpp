#pragma once

#include "convstyle/dialogue.hpp"
#include "convstyle/util.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace convstyle {

/// Maps a raw whitespace token to its normalised form, or nothing when the token should vanish
/// (punctuation only). Swap in a real lemmatiser by implementing this.
class TokenNormalizer {
public:
    virtual ~TokenNormalizer() = default;
    [[nodiscard]] virtual std::optional<std::string> normalize(std::string_view token) const = 0;
};

/// Lower-cases ASCII and deletes ASCII punctuation plus the common typographic marks
/// (dashes, curly quotes, ellipsis).
class DefaultNormalizer final : public TokenNormalizer {
public:
    [[nodiscard]] std::optional<std::string> normalize(std::string_view token) const override;
};

std::shared_ptr<const TokenNormalizer> default_normalizer();

/// Whitespace split followed by normalisation; punctuation-only tokens are dropped.
std::vector<std::string> normalized_tokens(std::string_view text, const TokenNormalizer& normalizer);

/// Bundled English stopword list.
const std::set<std::string, std::less<>>& default_stopwords();
/// One word per line; blank lines and lines starting with '#' are ignored.
std::set<std::string, std::less<>> parse_stopwords(std::string_view text);

/// Trailing agent signature such as "-Becky" or "–Gabe": a hyphen or dash directly followed by a
/// capitalised 2-20 letter name at the very end (trailing punctuation and spaces ignored).
std::optional<std::string> detect_signature(std::string_view utterance);

/// The utterance with its trailing signature removed (unchanged when none is found).
std::string strip_signature(std::string_view utterance);

struct StyleStats {
    MeanStd turns_per_conversation;
    MeanStd words_per_turn;
    std::size_t vocabulary_size = 0;
    double signature_rate = 0.0;
    std::size_t conversations = 0;
    std::size_t turns = 0;
};

/// Statistics over `party`'s turns. Throws EmptyCorpus.
StyleStats compute_style_stats(const Corpus& corpus, Speaker party = Speaker::Agent,
                               const TokenNormalizer& normalizer = DefaultNormalizer{});

struct PmiConfig {
    /// Lemmas found in more than this share of a domain's utterances are topic words; dropped.
    double max_utterance_fraction = 0.10;
    /// Lemmas below this share of a domain's lemma tokens are rare; dropped. Keyed by domain name.
    std::map<std::string, double> min_usage_fraction;
    double default_min_usage_fraction = 0.003;
    std::size_t top_n = 300;
    std::set<std::string, std::less<>> stopwords = default_stopwords();
    std::shared_ptr<const TokenNormalizer> normalizer = default_normalizer();
    Speaker party = Speaker::Agent;

    /// Windows used for H1 / B / H2 in the original study.
    static PmiConfig study_defaults();

    [[nodiscard]] double min_usage_for(const StyleDomain& d) const;
    /// Throws Error(InvalidConfig).
    void validate() const;
};

struct PmiEntry {
    std::string lemma;
    double pmi = 0.0;
};

struct PmiLexicon {
    StyleDomain style_domain;
    std::vector<PmiEntry> entries;
};

/// Unfiltered statistics behind a lexicon, for inspection and testing.
struct PmiDomainTable {
    std::size_t total_lemmas = 0;
    std::size_t utterances = 0;
    std::map<std::string, std::size_t> lemma_counts;
    /// Utterances containing the lemma at least once.
    std::map<std::string, std::size_t> utterance_counts;
    std::map<std::string, double> pmi;
    std::map<std::string, double> p_given_domain;
};

std::map<StyleDomain, PmiDomainTable> build_pmi_table(const std::map<StyleDomain, Corpus>& corpora,
                                                      const PmiConfig& cfg);

/// Ranks each domain's lemmas by I(w, t) = ln(P(w|t) / P(w)) after the frequency window.
/// Throws EmptyCorpus or SingleDomain.
std::map<StyleDomain, PmiLexicon> extract_pmi_lexicon(const std::map<StyleDomain, Corpus>& corpora,
                                                      const PmiConfig& cfg);

/// "lemma<TAB>pmi<TAB>domain" lines, domains in name order, entries in rank order.
std::string render_lexicon_table(const std::map<StyleDomain, PmiLexicon>& lexicons);

}  // namespace convstyle

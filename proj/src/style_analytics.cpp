#include "convstyle/style_analytics.hpp"

#include "convstyle/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

namespace convstyle {

namespace {

bool is_ascii_punct(unsigned char c) {
    return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

// UTF-8 encodings of typographic punctuation removed alongside ASCII punctuation.
constexpr std::string_view kUnicodePunct[] = {
    "\xE2\x80\x93",  // en dash
    "\xE2\x80\x94",  // em dash
    "\xE2\x80\x98",  // left single quote
    "\xE2\x80\x99",  // right single quote
    "\xE2\x80\x9C",  // left double quote
    "\xE2\x80\x9D",  // right double quote
    "\xE2\x80\xA6",  // ellipsis
    "\xC2\xA1",      // inverted exclamation
    "\xC2\xBF",      // inverted question
};

std::size_t unicode_punct_len(std::string_view s, std::size_t i) {
    for (auto p : kUnicodePunct) {
        if (s.substr(i, p.size()) == p) return p.size();
    }
    return 0;
}

constexpr std::string_view kDashes[] = {"-", "\xE2\x80\x93", "\xE2\x80\x94"};

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

struct SignatureSpan {
    std::size_t dash_start;
    std::string name;
};

std::optional<SignatureSpan> find_signature(std::string_view s) {
    std::size_t end = s.size();
    // Peel trailing whitespace and sentence punctuation.
    while (end > 0) {
        const char c = s[end - 1];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '.' || c == ',' || c == '!' || c == '?' ||
            c == ';' || c == ':' || c == ')' || c == ']' || c == '"' || c == '\'') {
            --end;
        } else {
            break;
        }
    }
    std::size_t name_start = end;
    while (name_start > 0 && is_ascii_letter(s[name_start - 1])) --name_start;
    const auto name_len = end - name_start;
    if (name_len < 2 || name_len > 20) return std::nullopt;
    if (!(s[name_start] >= 'A' && s[name_start] <= 'Z')) return std::nullopt;

    for (auto dash : kDashes) {
        if (name_start < dash.size()) continue;
        const auto dash_start = name_start - dash.size();
        if (s.substr(dash_start, dash.size()) != dash) continue;
        if (dash_start > 0) {
            const auto before = static_cast<unsigned char>(s[dash_start - 1]);
            const bool boundary = before == ' ' || before == '\t' || is_ascii_punct(before) || before >= 0x80;
            if (!boundary) return std::nullopt;
        }
        return SignatureSpan{dash_start, std::string(s.substr(name_start, name_len))};
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::string> DefaultNormalizer::normalize(std::string_view token) const {
    std::string out;
    out.reserve(token.size());
    for (std::size_t i = 0; i < token.size();) {
        if (const auto n = unicode_punct_len(token, i); n > 0) {
            i += n;
            continue;
        }
        const auto c = static_cast<unsigned char>(token[i]);
        if (!is_ascii_punct(c)) out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        ++i;
    }
    if (out.empty()) return std::nullopt;
    return out;
}

std::shared_ptr<const TokenNormalizer> default_normalizer() {
    static const auto instance = std::make_shared<const DefaultNormalizer>();
    return instance;
}

std::vector<std::string> normalized_tokens(std::string_view text, const TokenNormalizer& normalizer) {
    std::vector<std::string> out;
    for (const auto& raw : split_whitespace(text)) {
        if (auto t = normalizer.normalize(raw)) out.push_back(std::move(*t));
    }
    return out;
}

const std::set<std::string, std::less<>>& default_stopwords() {
    // Punctuation-free forms, matching what DefaultNormalizer produces.
    static const std::set<std::string, std::less<>> words = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "arent",
        "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by",
        "can", "cant", "could", "couldnt", "did", "didnt", "do", "does", "doesnt", "doing", "dont", "down",
        "during", "each", "few", "for", "from", "further", "had", "hadnt", "has", "hasnt", "have", "havent",
        "having", "he", "hed", "hell", "her", "here", "heres", "hers", "herself", "hes", "him", "himself",
        "his", "how", "hows", "i", "id", "if", "ill", "im", "in", "into", "is", "isnt", "it", "its",
        "itself", "ive", "lets", "me", "more", "most", "mustnt", "my", "myself", "no", "nor", "not", "of",
        "off", "on", "once", "only", "or", "other", "ought", "our", "ours", "ourselves", "out", "over", "own",
        "same", "shant", "she", "shed", "shell", "shes", "should", "shouldnt", "so", "some", "such", "than",
        "that", "thats", "the", "their", "theirs", "them", "themselves", "then", "there", "theres", "these",
        "they", "theyd", "theyll", "theyre", "theyve", "this", "those", "through", "to", "too", "under",
        "until", "up", "very", "was", "wasnt", "we", "wed", "well", "were", "werent", "weve", "what", "whats",
        "when", "whens", "where", "wheres", "which", "while", "who", "whom", "whos", "why", "whys", "will",
        "with", "wont", "would", "wouldnt", "you", "youd", "youll", "your", "youre", "yours", "yourself",
        "yourselves", "youve",
    };
    return words;
}

std::set<std::string, std::less<>> parse_stopwords(std::string_view text) {
    std::set<std::string, std::less<>> out;
    for (auto line : split_lines(text)) {
        const auto w = trim(line);
        if (w.empty() || w.front() == '#') continue;
        out.insert(to_lower_ascii(w));
    }
    return out;
}

std::optional<std::string> detect_signature(std::string_view utterance) {
    if (auto sig = find_signature(utterance)) return sig->name;
    return std::nullopt;
}

std::string strip_signature(std::string_view utterance) {
    if (auto sig = find_signature(utterance)) return std::string(trim(utterance.substr(0, sig->dash_start)));
    return std::string(utterance);
}

StyleStats compute_style_stats(const Corpus& corpus, Speaker party, const TokenNormalizer& normalizer) {
    if (corpus.conversations.empty()) throw Error(ErrorKind::EmptyCorpus, "corpus has no conversations");
    std::vector<double> per_conv;
    std::vector<double> words;
    std::unordered_set<std::string> vocab;
    std::size_t signed_turns = 0;
    for (const auto& conv : corpus.conversations) {
        std::size_t n = 0;
        for (const auto& t : conv.turns) {
            if (t.speaker != party) continue;
            ++n;
            words.push_back(static_cast<double>(split_whitespace(t.text).size()));
            for (auto& tok : normalized_tokens(t.text, normalizer)) vocab.insert(std::move(tok));
            if (detect_signature(t.text)) ++signed_turns;
        }
        per_conv.push_back(static_cast<double>(n));
    }
    StyleStats s;
    s.turns_per_conversation = mean_std(per_conv);
    s.words_per_turn = mean_std(words);
    s.vocabulary_size = vocab.size();
    s.conversations = corpus.conversations.size();
    s.turns = words.size();
    s.signature_rate = words.empty() ? 0.0 : static_cast<double>(signed_turns) / static_cast<double>(words.size());
    return s;
}

PmiConfig PmiConfig::study_defaults() {
    PmiConfig c;
    c.min_usage_fraction = {{"H1", 0.005}, {"B", 0.003}, {"H2", 0.003}};
    return c;
}

double PmiConfig::min_usage_for(const StyleDomain& d) const {
    if (auto it = min_usage_fraction.find(d.name()); it != min_usage_fraction.end()) return it->second;
    return default_min_usage_fraction;
}

void PmiConfig::validate() const {
    if (!(max_utterance_fraction > 0.0 && max_utterance_fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "max_utterance_fraction must lie in (0, 1]");
    }
    auto check = [](double min_usage) {
        if (!(min_usage >= 0.0 && min_usage <= 1.0)) {
            throw Error(ErrorKind::InvalidConfig, "min_usage_fraction must lie in [0, 1]");
        }
    };
    check(default_min_usage_fraction);
    for (const auto& [_, v] : min_usage_fraction) check(v);
    if (top_n == 0) throw Error(ErrorKind::InvalidConfig, "top_n must be positive");
    if (!normalizer) throw Error(ErrorKind::InvalidConfig, "PMI config has no normalizer");
}

std::map<StyleDomain, PmiDomainTable> build_pmi_table(const std::map<StyleDomain, Corpus>& corpora,
                                                      const PmiConfig& cfg) {
    cfg.validate();
    if (corpora.size() < 2) throw Error(ErrorKind::SingleDomain, "PMI needs at least two style domains");
    std::map<StyleDomain, PmiDomainTable> tables;
    std::map<std::string, std::size_t> global_counts;
    std::size_t global_total = 0;
    for (const auto& [domain, corpus] : corpora) {
        if (corpus.conversations.empty()) throw Error(ErrorKind::EmptyCorpus, "domain " + domain.name() + " is empty");
        auto& table = tables[domain];
        for (const auto& conv : corpus.conversations) {
            for (const auto& turn : conv.turns) {
                if (turn.speaker != cfg.party) continue;
                ++table.utterances;
                std::set<std::string> seen;
                for (auto& tok : normalized_tokens(turn.text, *cfg.normalizer)) {
                    if (cfg.stopwords.contains(tok)) continue;
                    ++table.lemma_counts[tok];
                    ++global_counts[tok];
                    ++table.total_lemmas;
                    ++global_total;
                    seen.insert(std::move(tok));
                }
                for (const auto& w : seen) ++table.utterance_counts[w];
            }
        }
        if (table.total_lemmas == 0) throw Error(ErrorKind::EmptyCorpus, "domain " + domain.name() + " has no lemmas");
    }
    for (auto& [domain, table] : tables) {
        const double n_t = static_cast<double>(table.total_lemmas);
        for (const auto& [w, c] : table.lemma_counts) {
            const double p_wt = static_cast<double>(c) / n_t;
            const double p_w = static_cast<double>(global_counts.at(w)) / static_cast<double>(global_total);
            table.p_given_domain[w] = p_wt;
            table.pmi[w] = std::log(p_wt / p_w);
        }
    }
    return tables;
}

std::map<StyleDomain, PmiLexicon> extract_pmi_lexicon(const std::map<StyleDomain, Corpus>& corpora,
                                                      const PmiConfig& cfg) {
    const auto tables = build_pmi_table(corpora, cfg);
    std::map<StyleDomain, PmiLexicon> out;
    for (const auto& [domain, table] : tables) {
        PmiLexicon lex{domain, {}};
        const double min_usage = cfg.min_usage_for(domain);
        for (const auto& [w, pmi] : table.pmi) {
            const double utterance_share =
                static_cast<double>(table.utterance_counts.at(w)) / static_cast<double>(table.utterances);
            const double usage_share = table.p_given_domain.at(w);
            if (utterance_share > cfg.max_utterance_fraction) continue;
            if (usage_share < min_usage) continue;
            lex.entries.push_back(PmiEntry{w, pmi});
        }
        std::stable_sort(lex.entries.begin(), lex.entries.end(),
                         [](const PmiEntry& a, const PmiEntry& b) { return a.pmi > b.pmi; });
        if (lex.entries.size() > cfg.top_n) lex.entries.resize(cfg.top_n);
        out.emplace(domain, std::move(lex));
    }
    return out;
}

std::string render_lexicon_table(const std::map<StyleDomain, PmiLexicon>& lexicons) {
    std::string out = "lemma\tpmi\tdomain\n";
    char buf[64];
    for (const auto& [domain, lex] : lexicons) {
        for (const auto& e : lex.entries) {
            std::snprintf(buf, sizeof buf, "%.12f", e.pmi);
            out += e.lemma + "\t" + buf + "\t" + domain.name() + "\n";
        }
    }
    return out;
}

}  // namespace convstyle

#include "convstyle/exemplar_store.hpp"

#include "convstyle/error.hpp"
#include "convstyle/json_io.hpp"
#include "convstyle/util.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace convstyle {

namespace {

std::size_t side_index(ExemplarSide s) { return s == ExemplarSide::Styled ? 0 : 1; }
std::size_t party_index(Speaker p) { return p == Speaker::Customer ? 0 : 1; }

std::optional<std::string> maybe_concat(const std::vector<Turn>& turns, Speaker party) {
    if (party_turn_indices(turns, party).empty()) return std::nullopt;
    return concat_party_utterances(turns, party);
}

}  // namespace

ExemplarSet::ExemplarSet(StyleDomain domain, Granularity granularity, std::vector<ExemplarPair> pairs)
    : domain_(std::move(domain)), granularity_(granularity), pairs_(std::move(pairs)) {
    keys_.resize(pairs_.size());
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        for (auto party : {Speaker::Customer, Speaker::Agent}) {
            keys_[i][0][party_index(party)] = maybe_concat(pairs_[i].styled.turns, party);
            keys_[i][1][party_index(party)] = maybe_concat(pairs_[i].style_free.turns, party);
        }
    }
}

const std::optional<std::string>& ExemplarSet::key_text(std::size_t i, ExemplarSide side,
                                                        Speaker party) const {
    return keys_.at(i)[side_index(side)][party_index(party)];
}

ExemplarSet load_exemplars(std::string_view text) {
    std::vector<ExemplarPair> pairs;
    std::optional<StyleDomain> domain;
    std::optional<Granularity> granularity;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto j = parse_record(line, line_no);
        const StyleDomain d(require_string(j, "style_domain", line_no));
        if (d.is_style_free()) throw MalformedRecordError(line_no, "exemplar styled side cannot be STYLE_FREE");
        const auto g = parse_granularity(require_string(j, "granularity", line_no));
        if (!g) throw MalformedRecordError(line_no, "unknown granularity");
        if (domain && *domain != d) throw MalformedRecordError(line_no, "mixed style domains in one exemplar file");
        if (granularity && *granularity != *g) throw MalformedRecordError(line_no, "mixed granularities in one exemplar file");
        domain = d;
        granularity = *g;

        auto side = [&](const char* key) {
            auto it = j.find(key);
            if (it == j.end() || !it->is_object() || !it->contains("turns")) {
                throw MalformedRecordError(line_no, std::string("missing \"") + key + ".turns\"");
            }
            try {
                return turns_from_json(it->at("turns"));
            } catch (const MalformedRecordError& e) {
                throw MalformedRecordError(line_no, e.what());
            }
        };
        ExemplarPair pair;
        const auto pair_index = pairs.size();
        const std::string id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>()
                                                                      : "exemplar-" + std::to_string(pair_index);
        pair.granularity = *g;
        pair.styled = Conversation{id, d, side("styled")};
        pair.style_free = Conversation{id, StyleDomain::style_free(), side("style_free")};
        if (pair.styled.turns.empty()) throw MalformedRecordError(line_no, "exemplar has no turns");
        if (pair.styled.turns.size() != pair.style_free.turns.size()) {
            throw PairError(ErrorKind::TurnCountMismatch, pair_index);
        }
        for (std::size_t t = 0; t < pair.styled.turns.size(); ++t) {
            if (pair.styled.turns[t].speaker != pair.style_free.turns[t].speaker) {
                throw PairError(ErrorKind::SpeakerSequenceMismatch, pair_index);
            }
        }
        pairs.push_back(std::move(pair));
    }
    return ExemplarSet(domain.value_or(StyleDomain{}), granularity.value_or(Granularity::Utterance),
                       std::move(pairs));
}

std::string serialize_exemplars(const ExemplarSet& set) {
    std::string out;
    for (const auto& p : set.pairs()) {
        out += dump_line(Json{{"id", p.styled.id},
                              {"style_domain", set.style_domain().name()},
                              {"granularity", to_string(p.granularity)},
                              {"styled", Json{{"turns", turns_to_json(p.styled.turns)}}},
                              {"style_free", Json{{"turns", turns_to_json(p.style_free.turns)}}}});
    }
    return out;
}

std::string to_string(const SelectionStrategy& s) {
    return s.kind == SelectionStrategy::Kind::Dynamic ? "dynamic" : "random(seed=" + std::to_string(s.seed) + ")";
}

std::vector<std::size_t> order_by_similarity(std::span<const double> similarities, std::size_t k) {
    std::vector<std::size_t> idx(similarities.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return similarities[a] > similarities[b]; });
    idx.resize(std::min(k, idx.size()));
    std::reverse(idx.begin(), idx.end());
    return idx;
}

std::vector<std::size_t> select_exemplar_indices(const ExemplarSet& set, const Segment& query,
                                                 const SelectionOptions& options,
                                                 const EmbeddingProvider& embedder) {
    if (options.k == 0) throw Error(ErrorKind::InvalidConfig, "k must be positive");
    if (options.k > set.size()) {
        throw Error(ErrorKind::KTooLarge,
                    "k=" + std::to_string(options.k) + " but only " + std::to_string(set.size()) + " exemplars");
    }
    if (options.strategy.kind == SelectionStrategy::Kind::Random) {
        SeededRng rng(options.strategy.seed);
        return rng.sample_without_replacement(set.size(), options.k);
    }

    if (party_turn_indices(query.turns, options.party).empty()) {
        throw Error(ErrorKind::NoAgentTurnsInQuery, "query segment has no turns of the transferred party");
    }
    const auto query_vec = embed_text(embedder, concat_party_utterances(query.turns, options.party));
    std::vector<double> sims(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& key = set.key_text(i, options.key_side, options.party);
        // Pairs without the party's turns on the key side can only fill leftover slots.
        sims[i] = key ? cosine_similarity(query_vec, embed_text(embedder, *key))
                      : -std::numeric_limits<double>::infinity();
    }
    return order_by_similarity(sims, options.k);
}

std::vector<ExemplarPair> select_exemplars(const ExemplarSet& set, const Segment& query,
                                           const SelectionOptions& options,
                                           const EmbeddingProvider& embedder) {
    std::vector<ExemplarPair> out;
    for (auto i : select_exemplar_indices(set, query, options, embedder)) out.push_back(set.pairs()[i]);
    return out;
}

std::size_t default_shots(Granularity g) noexcept {
    return g == Granularity::LongWindow ? 8 : 10;
}

}  // namespace convstyle

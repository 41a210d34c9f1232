#include "convstyle/embedding.hpp"
#include "convstyle/error.hpp"
#include "convstyle/exemplar_store.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace convstyle {
namespace {

using testing::agent;
using testing::customer;

TEST(Cosine, HandValues) {
    EXPECT_NEAR(cosine_similarity({{1.0, 1.0}}, {{1.0, 0.0}}), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(cosine_similarity({{2.0, 0.0}}, {{5.0, 0.0}}), 1.0, 1e-12);
    EXPECT_NEAR(cosine_similarity({{1.0, 0.0}}, {{-3.0, 0.0}}), -1.0, 1e-12);
}

TEST(Cosine, RejectsMismatchAndZero) {
    try {
        cosine_similarity({{1.0, 2.0}}, {{1.0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
    try {
        cosine_similarity({{0.0, 0.0}}, {{1.0, 0.0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroVector);
    }
}

TEST(HashedTf, CountsLowerCasedTokens) {
    HashedTfEmbedder e(64);
    const auto v = embed_text(e, "Refund refund order");
    EXPECT_EQ(v.dimension(), 64u);
    EXPECT_DOUBLE_EQ(v.values[e.bucket("refund")], e.bucket("refund") == e.bucket("order") ? 3.0 : 2.0);
    EXPECT_EQ(embed_text(e, "refund refund order").values, v.values);
    EXPECT_NEAR(cosine_similarity(v, embed_text(e, "order Refund REFUND")), 1.0, 1e-12);
}

TEST(HashedTf, BlankInputIsAnError) {
    HashedTfEmbedder e;
    try {
        embed_text(e, "  \t ");
        FAIL();
    } catch (const Error& ex) {
        EXPECT_EQ(ex.kind(), ErrorKind::EmptyInput);
    }
}

class CountingEmbedder final : public EmbeddingProvider {
public:
    std::string name() const override { return "counting"; }
    std::size_t dimension() const override { return 2; }
    EmbeddingVector embed(std::string_view text) const override {
        ++calls;
        return {{static_cast<double>(text.size()), 1.0}};
    }
    mutable int calls = 0;
};

TEST(CachingEmbedder, MemoisesByText) {
    auto inner = std::make_shared<CountingEmbedder>();
    CachingEmbedder cache(inner);
    embed_text(cache, "abc");
    embed_text(cache, "abc");
    embed_text(cache, "abcd");
    EXPECT_EQ(inner->calls, 2);
    EXPECT_EQ(cache.cache_size(), 2u);
}

TEST(ConcatPartyUtterances, JoinsWithSpaces) {
    const std::vector<Turn> turns{customer("a b"), agent("c"), customer("d"), agent("e f")};
    EXPECT_EQ(concat_party_utterances(turns, Speaker::Agent), "c e f");
    EXPECT_EQ(concat_party_utterances(turns, Speaker::Customer), "a b d");
    const std::vector<Turn> only_customer{customer("x")};
    EXPECT_THROW(concat_party_utterances(only_customer, Speaker::Agent), Error);
}

TEST(ExemplarFile, RoundTripAndPairErrors) {
    const auto set = testing::make_exemplar_set(StyleDomain("H1"), testing::formal_lexicon(), Granularity::TwoTurn, 4, 3);
    const auto text = serialize_exemplars(set);
    const auto back = load_exemplars(text);
    EXPECT_EQ(back.size(), 4u);
    EXPECT_EQ(back.style_domain(), StyleDomain("H1"));
    EXPECT_EQ(back.granularity(), Granularity::TwoTurn);
    EXPECT_EQ(serialize_exemplars(back), text);

    const std::string count_mismatch =
        R"({"style_domain":"H1","granularity":"utterance","styled":{"turns":[{"speaker":"agent","text":"a"}]},"style_free":{"turns":[]}})";
    try {
        load_exemplars(count_mismatch);
        FAIL();
    } catch (const PairError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TurnCountMismatch);
        EXPECT_EQ(e.pair_index(), 0u);
    }
    const std::string speaker_mismatch =
        R"({"style_domain":"H1","granularity":"utterance","styled":{"turns":[{"speaker":"agent","text":"a"}]},"style_free":{"turns":[{"speaker":"customer","text":"a"}]}})";
    try {
        load_exemplars(speaker_mismatch);
        FAIL();
    } catch (const PairError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SpeakerSequenceMismatch);
    }
}

TEST(Selection, DefaultShotsPerGranularity) {
    EXPECT_EQ(default_shots(Granularity::Utterance), 10u);
    EXPECT_EQ(default_shots(Granularity::TwoTurn), 10u);
    EXPECT_EQ(default_shots(Granularity::LongWindow), 8u);
}

TEST(Selection, MostSimilarComesLast) {
    const std::vector<double> sims{0.1, 0.9, 0.5, 0.7};
    EXPECT_EQ(order_by_similarity(sims, 3), (std::vector<std::size_t>{2, 3, 1}));
}

TEST(Selection, TiesKeepLowerIndexWhenTruncating) {
    const std::vector<double> sims{0.5, 0.5, 0.5};
    EXPECT_EQ(order_by_similarity(sims, 2), (std::vector<std::size_t>{1, 0}));
}

// Independent oracle: sort (-similarity, index) tuples, keep k, reverse.
std::vector<std::size_t> argsort_oracle(const std::vector<double>& sims, std::size_t k) {
    std::vector<std::tuple<double, std::size_t>> keyed;
    for (std::size_t i = 0; i < sims.size(); ++i) keyed.emplace_back(-sims[i], i);
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(std::get<1>(keyed[i]));
    std::reverse(out.begin(), out.end());
    return out;
}

double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / std::sqrt(na * nb);
}

TEST(Selection, MatchesArgsortOracleOnRandomInstances) {
    const std::vector<std::string> vocab{"refund", "order", "late", "card", "help", "please", "now", "box"};
    HashedTfEmbedder embedder(512);
    SeededRng rng(2024);
    auto random_text = [&] {
        std::string s;
        const auto n = 1 + rng.below(4);
        for (std::uint64_t i = 0; i < n; ++i) s += vocab[rng.below(vocab.size())] + " ";
        return s;
    };
    for (int instance = 0; instance < 500; ++instance) {
        const auto n = static_cast<std::size_t>(1 + rng.below(12));
        const auto k = static_cast<std::size_t>(1 + rng.below(n));
        const auto side = rng.below(2) == 0 ? ExemplarSide::Styled : ExemplarSide::StyleFree;
        std::vector<ExemplarPair> pairs;
        for (std::size_t i = 0; i < n; ++i) {
            ExemplarPair p;
            p.granularity = Granularity::Utterance;
            p.styled = Conversation{"e" + std::to_string(i), StyleDomain("H1"), {agent(random_text())}};
            p.style_free = Conversation{"e" + std::to_string(i), StyleDomain::style_free(), {agent(random_text())}};
            pairs.push_back(p);
        }
        const ExemplarSet set(StyleDomain("H1"), Granularity::Utterance, pairs);
        const auto query = testing::make_segment("q", 0, {agent(random_text())}, Granularity::Utterance);

        const auto qv = embedder.embed(query.turns[0].text).values;
        std::vector<double> sims;
        for (const auto& p : pairs) {
            const auto& turn = side == ExemplarSide::Styled ? p.styled.turns[0] : p.style_free.turns[0];
            sims.push_back(oracle_cosine(qv, embedder.embed(turn.text).values));
        }
        SelectionOptions opts;
        opts.k = k;
        opts.key_side = side;
        ASSERT_EQ(select_exemplar_indices(set, query, opts, embedder), argsort_oracle(sims, k))
            << "instance " << instance;
    }
}

TEST(Selection, KTooLargeAndMissingQueryTurns) {
    const auto set = testing::make_exemplar_set(StyleDomain("H1"), testing::formal_lexicon(), Granularity::TwoTurn, 3, 9);
    HashedTfEmbedder embedder;
    SelectionOptions opts;
    opts.k = 4;
    const auto query = testing::make_segment("q", 0, {customer("hi"), agent("hello")}, Granularity::TwoTurn);
    try {
        select_exemplar_indices(set, query, opts, embedder);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::KTooLarge);
    }
    opts.k = 2;
    const auto customer_only = testing::make_segment("q", 0, {customer("hi")}, Granularity::TwoTurn);
    try {
        select_exemplar_indices(set, customer_only, opts, embedder);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoAgentTurnsInQuery);
    }
}

TEST(Selection, RandomIsSeededAndDistinct) {
    const auto set = testing::make_exemplar_set(StyleDomain("B"), testing::casual_lexicon(), Granularity::Utterance, 20, 4);
    HashedTfEmbedder embedder;
    const auto query = testing::make_segment("q", 0, {agent("where is it")}, Granularity::Utterance);
    SelectionOptions opts;
    opts.k = 10;
    opts.strategy = SelectionStrategy::random(77);
    const auto a = select_exemplar_indices(set, query, opts, embedder);
    const auto b = select_exemplar_indices(set, query, opts, embedder);
    EXPECT_EQ(a, b);
    EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 10u);
    opts.strategy = SelectionStrategy::random(78);
    EXPECT_NE(select_exemplar_indices(set, query, opts, embedder), a);
}

}  // namespace
}  // namespace convstyle

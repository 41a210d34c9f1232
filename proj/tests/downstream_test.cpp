#include "convstyle/downstream_intent.hpp"
#include "convstyle/error.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace convstyle {
namespace {

TEST(F1, HandConfusionMatrix) {
    const std::vector<std::string> gold{"a", "a", "b", "b"};
    const std::vector<std::string> pred{"a", "b", "b", "b"};
    const auto r = f1_report(gold, pred);
    // a: P 1, R 1/2, F1 2/3. b: P 2/3, R 1, F1 4/5.
    EXPECT_NEAR(r.per_class.at("a").f1, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.per_class.at("b").f1, 0.8, 1e-12);
    EXPECT_NEAR(r.macro_f1, 0.7333, 1e-4);
    EXPECT_NEAR(r.micro_f1, 0.75, 1e-12);
    EXPECT_NEAR(r.weighted_f1, 0.7333, 1e-4);
    EXPECT_NEAR(r.accuracy, 0.75, 1e-12);
    EXPECT_EQ(r.per_class.at("b").support, 2u);
}

TEST(F1, PerfectAllWrongAndErrors) {
    const std::vector<std::string> gold{"a", "b"};
    EXPECT_DOUBLE_EQ(f1_report(gold, gold).macro_f1, 1.0);
    const std::vector<std::string> swapped{"b", "a"};
    const auto wrong = f1_report(gold, swapped);
    EXPECT_DOUBLE_EQ(wrong.macro_f1, 0.0);
    EXPECT_DOUBLE_EQ(wrong.micro_f1, 0.0);
    const std::vector<std::string> one{"a"};
    EXPECT_THROW(f1_report(gold, one), Error);
    EXPECT_THROW(f1_report({}, {}), Error);
}

TEST(F1, PropertiesOnRandomPredictions) {
    SeededRng rng(12);
    const std::vector<std::string> labels{"x", "y", "z", "w"};
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> gold, pred;
        const auto n = 1 + rng.below(20);
        for (std::uint64_t i = 0; i < n; ++i) {
            gold.push_back(labels[rng.below(4)]);
            pred.push_back(labels[rng.below(4)]);
        }
        const auto r = f1_report(gold, pred);
        EXPECT_NEAR(r.micro_f1, r.accuracy, 1e-12);
        EXPECT_LE(r.macro_f1, 1.0);
        double lo = 1.0, hi = 0.0;
        for (const auto& [label, c] : r.per_class) {
            if (c.support == 0) continue;
            lo = std::min(lo, c.f1);
            hi = std::max(hi, c.f1);
        }
        EXPECT_GE(r.weighted_f1, lo - 1e-12);
        EXPECT_LE(r.weighted_f1, hi + 1e-12);
    }
}

IntentDataset dataset(Split split, std::vector<IntentExample> ex) { return IntentDataset{StyleDomain("H2"), split, std::move(ex)}; }

TEST(CentroidClassifier, SeparableTrainingDataAndTieBreak) {
    HashedTfEmbedder e;
    const auto train = dataset(Split::Train, {{"apple banana", "fruit"}, {"banana cherry", "fruit"},
                                              {"hammer nail", "tool"}, {"saw nail", "tool"}});
    const auto model = CentroidIntentClassifier::train(train, e);
    for (const auto& ex : train.examples) EXPECT_EQ(model.predict(ex.utterance), ex.intent);
    EXPECT_EQ(model.predict("zebra"), "fruit");  // orthogonal to both: lowest label
    EXPECT_EQ(model.labels(), (std::set<std::string>{"fruit", "tool"}));

    const auto single = dataset(Split::Train, {{"apple", "fruit"}, {"nail", "tool"}});
    const auto m2 = CentroidIntentClassifier::train(single, e);
    EXPECT_EQ(m2.centroids().at("fruit"), e.embed("apple").values);

    try {
        CentroidIntentClassifier::train(dataset(Split::Train, {{"a", "only"}, {"b", "only"}}), e);
        FAIL();
    } catch (const Error& ex) {
        EXPECT_EQ(ex.kind(), ErrorKind::SingleClass);
    }
    try {
        evaluate_f1(model, dataset(Split::Test, {{"apple", "vegetable"}}));
        FAIL();
    } catch (const Error& ex) {
        EXPECT_EQ(ex.kind(), ErrorKind::UnknownLabel);
    }
}

TEST(IntentFile, GroupsByDomainAndSplit) {
    const std::string text =
        R"({"utterance":"pay bill","intent":"pay","style_domain":"B","split":"test"})" "\n"
        R"({"utterance":"i would like to pay","intent":"pay","style_domain":"H2","split":"train"})" "\n"
        R"({"utterance":"check balance","intent":"balance","style_domain":"B","split":"test"})" "\n";
    const auto sets = parse_intent_file(text);
    ASSERT_EQ(sets.size(), 2u);
    EXPECT_EQ(sets[0].examples.size(), 2u);
    EXPECT_EQ(find_dataset(sets, StyleDomain("H2"), Split::Train).examples[0].intent, "pay");
    EXPECT_EQ(parse_intent_file(serialize_intent_dataset(sets[0])).at(0), sets[0]);
    EXPECT_THROW(parse_intent_file(R"({"utterance":"x","intent":"y","style_domain":"B","split":"dev"})"), MalformedRecordError);
}

TEST(PermutationTest, ExactEnumerationHandCases) {
    const std::vector<double> all_positive(10, 0.5);
    EXPECT_NEAR(paired_permutation_p_value(all_positive), 2.0 / 1024.0, 1e-15);
    const std::vector<double> zeros(5, 0.0);
    EXPECT_DOUBLE_EQ(paired_permutation_p_value(zeros), 1.0);
    // {1, -1}: sign flips give |sums| {0, 2, 2, 0}; observed 0, every assignment is at least as extreme.
    const std::vector<double> balanced{1.0, -1.0};
    EXPECT_DOUBLE_EQ(paired_permutation_p_value(balanced), 1.0);
    const std::vector<double> lopsided{3.0, 1.0};
    EXPECT_DOUBLE_EQ(paired_permutation_p_value(lopsided), 0.5);
    EXPECT_THROW(paired_permutation_p_value({}), Error);
}

TEST(PermutationTest, MonteCarloBeyondTwentyPairsIsSeeded) {
    std::vector<double> diffs(25, 0.1);
    diffs[3] = -0.05;
    const double p = paired_permutation_p_value(diffs, 7);
    EXPECT_EQ(p, paired_permutation_p_value(diffs, 7));
    EXPECT_LT(p, 0.001);
    EXPECT_GT(p, 0.0);
}

struct Harness {
    testing::VocabularyShiftScenario s = testing::make_vocabulary_shift_scenario();
    HashedTfEmbedder embedder;
    TransferDeps deps_with(const LlmClient& llm) {
        TransferDeps d;
        d.source_exemplars = &s.source_exemplars;
        d.target_exemplars = &s.target_exemplars;
        d.embedder = &embedder;
        d.llm = &llm;
        return d;
    }
};

TEST(TransferTrainingSet, EchoIsIdentityAndLabelsAreKept) {
    Harness h;
    const auto echo = testing::echo_mock();
    const auto out = transfer_training_set(h.s.train, h.s.config, h.deps_with(*echo), 3);
    EXPECT_EQ(out.dataset, h.s.train);
    EXPECT_EQ(out.transferred, h.s.train.examples.size());
    EXPECT_EQ(out.failures, 0u);
}

TEST(TransferTrainingSet, ScriptedRewriteAndFailureIsolation) {
    Harness h;
    const auto mock = load_mock_script(h.s.mock_script + "{\"mode\":\"echo_input\"}\n");
    auto three = h.s.train;
    three.examples.resize(3);
    three.examples[1].utterance = "unscripted garbage line";
    // Echo is the fallback, so force a parse failure for the unscripted example.
    mock->add_rule({ScriptedMockClient::MatchKind::Contains, "[Customer] unscripted garbage line\nRewritten:\n",
                    "no tags at all"});
    const auto out = transfer_training_set(three, h.s.config, h.deps_with(*mock));
    EXPECT_EQ(out.transferred, 2u);
    EXPECT_EQ(out.failures, 1u);
    ASSERT_EQ(out.failure_records.size(), 1u);
    EXPECT_EQ(out.dataset.examples[1], three.examples[1]);
    EXPECT_NE(out.dataset.examples[0].utterance, three.examples[0].utterance);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out.dataset.examples[i].intent, three.examples[i].intent);
}

TEST(TransferTrainingSet, RejectsWrongSplitOrConfig) {
    Harness h;
    const auto echo = testing::echo_mock();
    auto test_split = h.s.train;
    test_split.split = Split::Test;
    EXPECT_THROW(transfer_training_set(test_split, h.s.config, h.deps_with(*echo)), Error);
    auto agent_cfg = h.s.config;
    agent_cfg.party = Speaker::Agent;
    EXPECT_THROW(transfer_training_set(h.s.train, agent_cfg, h.deps_with(*echo)), Error);
}

TEST(Downstream, VocabularyShiftTransferHelpsAcrossSeeds) {
    Harness h;
    const auto mock = load_mock_script(h.s.mock_script);
    const auto transferred = transfer_training_set(h.s.train, h.s.config, h.deps_with(*mock), 2);
    ASSERT_EQ(transferred.failures, 0u);
    DownstreamConfig cfg;
    cfg.repeats = 10;
    const auto report = compare_downstream(h.s.train, transferred.dataset, h.s.test, h.embedder, cfg);
    ASSERT_EQ(report.runs.size(), 10u);
    for (const auto& run : report.runs) {
        EXPECT_GT(run.transferred.macro_f1 - run.original.macro_f1, 0.0) << "seed " << run.seed;
    }
    EXPECT_GT(report.mean_difference, 0.0);
    EXPECT_LT(report.p_value, 0.05);
}

TEST(Downstream, EchoTransferGivesExactlyZeroDifference) {
    Harness h;
    const auto echo = testing::echo_mock();
    const auto transferred = transfer_training_set(h.s.train, h.s.config, h.deps_with(*echo));
    const auto report = compare_downstream(h.s.train, transferred.dataset, h.s.test, h.embedder, {});
    EXPECT_EQ(report.mean_difference, 0.0);
    for (const auto& run : report.runs) EXPECT_EQ(run.transferred.macro_f1, run.original.macro_f1);
    EXPECT_DOUBLE_EQ(report.p_value, 1.0);
}

TEST(Downstream, RepeatsAreSeededAndInputsChecked) {
    Harness h;
    DownstreamConfig cfg;
    cfg.repeats = 3;
    cfg.seed = 5;
    const auto a = compare_downstream(h.s.train, h.s.train, h.s.test, h.embedder, cfg);
    const auto b = compare_downstream(h.s.train, h.s.train, h.s.test, h.embedder, cfg);
    EXPECT_EQ(a.to_json(), b.to_json());
    EXPECT_EQ(a.runs[2].seed, 7u);
    auto shorter = h.s.train;
    shorter.examples.pop_back();
    EXPECT_THROW(compare_downstream(h.s.train, shorter, h.s.test, h.embedder, cfg), Error);
    cfg.repeats = 0;
    EXPECT_THROW(compare_downstream(h.s.train, h.s.train, h.s.test, h.embedder, cfg), Error);
}

}  // namespace
}  // namespace convstyle

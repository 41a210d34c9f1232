// Runs the unit suites that back each acceptance criterion in one process and prints one
// PASS/FAIL line per criterion. Exit status is non-zero when any criterion fails.

#include <gtest/gtest.h>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

struct Criterion {
    std::string name;
    std::vector<std::string> tests;  // "Suite.Name" or "Suite.*"
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list{
        {"Identity pipeline",
         {"Transfer.EchoBatchOverTwentySegmentsIsIdentityAndFast", "Transfer.EchoModelIsIdentityAtEveryGranularity"}},
        {"Rank-scaling oracle", {"ScaleRanks.*"}},
        {"Agreement oracles", {"Spearman.*", "Krippendorff.*"}},
        {"PMI oracle", {"Pmi.*"}},
        {"Dynamic selection",
         {"Selection.*", "CliConfig.DefaultsMatchTheDocumentedValues", "CliConfig.PrecedenceIsFlagsThenEnvThenFileThenDefaults"}},
        {"Prompt golden files", {"PromptGolden.*", "PromptBuilder.KShotPromptHasExactlyKSeparators"}},
        {"Filtering steps",
         {"MakeTasks.BothFilteringStepsWithHandCounts", "Alignment.ArgmaxWithThresholdAndLowestIndexTies",
          "Alignment.SimilarityExactlyAtThresholdIsKept"}},
        {"Local style classifier",
         {"StyleClassifierTraining.SeparatesSyntheticStylesAndStripsSignatures", "NaiveBayes.MatchesRecountOracle"}},
        {"Downstream direction",
         {"Downstream.VocabularyShiftTransferHelpsAcrossSeeds", "Downstream.EchoTransferGivesExactlyZeroDifference",
          "F1.HandConfusionMatrix", "PermutationTest.ExactEnumerationHandCases"}},
        {"Determinism", {"CliWorkflows.EveryWorkflowSucceeds", "CliWorkflows.RerunsAreBitIdentical"}},
        {"Human-eval service",
         {"AnnotationService.ConcurrentAnnotatorsProduceCompleteDuplicateFreeLog",
          "AnnotationService.AggregatesHandCaseThroughHttp", "MakeTasks.PublicPayloadNeverLeaksModelKeys"}},
    };
    return list;
}

bool matches(const std::string& pattern, const std::string& full) {
    if (pattern.size() >= 2 && pattern.ends_with(".*")) return full.starts_with(pattern.substr(0, pattern.size() - 1));
    return pattern == full;
}

class Recorder final : public ::testing::EmptyTestEventListener {
public:
    void OnTestEnd(const ::testing::TestInfo& info) override {
        const auto* r = info.result();
        if (r == nullptr || r->Skipped()) return;
        results[std::string(info.test_suite_name()) + "." + info.name()] = r->Passed();
    }
    std::map<std::string, bool> results;
};

}  // namespace

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    std::string filter;
    for (const auto& c : criteria()) {
        for (const auto& t : c.tests) filter += (filter.empty() ? "" : ":") + t;
    }
    ::testing::GTEST_FLAG(filter) = filter;
    auto& listeners = ::testing::UnitTest::GetInstance()->listeners();
    delete listeners.Release(listeners.default_result_printer());
    auto* recorder = new Recorder;
    listeners.Append(recorder);
    const int gtest_status = RUN_ALL_TESTS();

    bool all = true;
    for (const auto& c : criteria()) {
        bool pass = true;
        std::size_t ran = 0;
        std::string detail;
        for (const auto& pattern : c.tests) {
            std::size_t hits = 0;
            for (const auto& [name, ok] : recorder->results) {
                if (!matches(pattern, name)) continue;
                ++hits;
                if (!ok) {
                    pass = false;
                    detail += " failed:" + name;
                }
            }
            if (hits == 0) {
                pass = false;
                detail += " missing:" + pattern;
            }
            ran += hits;
        }
        all = all && pass;
        std::cout << (pass ? "PASS" : "FAIL") << "  " << c.name << " (" << ran << " tests)" << detail << "\n";
    }
    return all && gtest_status == 0 ? 0 : 1;
}

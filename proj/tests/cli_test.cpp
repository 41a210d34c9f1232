#include "cli_harness.hpp"
#include "convstyle/util.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

namespace convstyle {
namespace {

using testing::run_cli_args;

class CliWorkflows : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new testing::TempDir();
        steps_ = new std::vector<testing::WorkflowStep>(testing::prepare_workflows(dir_->path()));
        first_ = new std::map<std::string, testing::WorkflowOutcome>(testing::run_workflows(*steps_));
    }
    static void TearDownTestSuite() {
        delete first_;
        delete steps_;
        delete dir_;
    }

    static testing::TempDir* dir_;
    static std::vector<testing::WorkflowStep>* steps_;
    static std::map<std::string, testing::WorkflowOutcome>* first_;
};

testing::TempDir* CliWorkflows::dir_ = nullptr;
std::vector<testing::WorkflowStep>* CliWorkflows::steps_ = nullptr;
std::map<std::string, testing::WorkflowOutcome>* CliWorkflows::first_ = nullptr;

TEST_F(CliWorkflows, EveryWorkflowSucceeds) {
    ASSERT_EQ(first_->size(), 11u);
    for (const auto& [name, outcome] : *first_) {
        EXPECT_EQ(outcome.code, 0) << name;
        for (const auto& [file, bytes] : outcome.files) {
            EXPECT_NE(bytes, "<missing>") << name << " " << file;
            EXPECT_FALSE(bytes.empty()) << name << " " << file;
        }
    }
}

TEST_F(CliWorkflows, RerunsAreBitIdentical) {
    const auto second = testing::run_workflows(*steps_);
    for (const auto& [name, outcome] : *first_) {
        const auto& again = second.at(name);
        EXPECT_EQ(again.code, outcome.code) << name;
        EXPECT_EQ(again.stdout_text, outcome.stdout_text) << name;
        EXPECT_EQ(again.files, outcome.files) << name;
    }
}

TEST_F(CliWorkflows, EchoTransferReproducesSegments) {
    const auto results = parse_transfer_results(first_->at("transfer").files.at("results.jsonl"));
    const auto segments = parse_segments(first_->at("segment").files.at("segments.jsonl"));
    ASSERT_EQ(results.size(), segments.size());
    for (std::size_t i = 0; i < results.size(); ++i) EXPECT_EQ(results[i].target.turns, segments[i].turns);
}

TEST_F(CliWorkflows, DryRunPrintsTheReductionPrompt) {
    const auto cfg = (dir_->path() / "config.json").string();
    const auto out = (dir_->path() / "dry.jsonl").string();
    const auto run = run_cli_args({"--config", cfg, "--dry-run", "transfer", "--in",
                                   (dir_->path() / "segments.jsonl").string(), "--out", out, "--source-exemplars",
                                   (dir_->path() / "ex_h1.jsonl").string(), "--target-exemplars",
                                   (dir_->path() / "ex_b.jsonl").string()});
    EXPECT_EQ(run.code, 0) << run.err;
    EXPECT_NE(run.out.find(PromptTemplate{}.reduction_header), std::string::npos);
    EXPECT_NE(run.out.find(PromptTemplate{}.example_separator), std::string::npos);
    EXPECT_FALSE(std::filesystem::exists(out));
}

TEST_F(CliWorkflows, PartialBatchExitsWithTwo) {
    // The first reduction prompt gets an unparseable completion; every other prompt is echoed.
    const auto segments = parse_segments(first_->at("segment").files.at("segments.jsonl"));
    const auto line = render_transcript(segments.front().turns);
    const auto script = Json{{"match", "contains"}, {"key", line}, {"reply", "nothing usable"}}.dump() + "\n" +
                        "{\"mode\":\"echo_input\"}\n";
    write_file_atomic(dir_->path() / "partial_mock.jsonl", script);
    write_file_atomic(dir_->path() / "partial.json",
                      Json{{"llm", {{"mock_script", (dir_->path() / "partial_mock.jsonl").string()}}}}.dump());
    const auto run = run_cli_args({"--config", (dir_->path() / "partial.json").string(), "transfer", "--in",
                                   (dir_->path() / "segments.jsonl").string(), "--out",
                                   (dir_->path() / "partial.jsonl").string(), "--source-exemplars",
                                   (dir_->path() / "ex_h1.jsonl").string(), "--target-exemplars",
                                   (dir_->path() / "ex_b.jsonl").string()});
    EXPECT_EQ(run.code, 2) << run.err;
    std::size_t failures = 0;
    const auto kept = parse_transfer_results(read_file(dir_->path() / "partial.jsonl"), &failures);
    EXPECT_GE(failures, 1u);
    EXPECT_EQ(kept.size() + failures, segments.size());
}

TEST(CliExitCodes, ValidationConfigAndUsage) {
    testing::TempDir dir;
    write_file_atomic(dir / "bad.jsonl", "{\"conversation_id\": 3}\n");
    const auto invalid = run_cli_args({"ingest", "--in", (dir / "bad.jsonl").string(), "--style", "H1", "--out",
                                       (dir / "o.jsonl").string()});
    EXPECT_EQ(invalid.code, 1);
    EXPECT_NE(invalid.err.find("\"error\""), std::string::npos);

    write_file_atomic(dir / "cfg.json", "{\"unknown_key\": 1}");
    const auto bad_cfg = run_cli_args({"--config", (dir / "cfg.json").string(), "ingest", "--in",
                                       (dir / "bad.jsonl").string(), "--style", "H1", "--out", (dir / "o").string()});
    EXPECT_EQ(bad_cfg.code, 3);

    EXPECT_EQ(run_cli_args({"frobnicate"}).code, 3);
    EXPECT_EQ(run_cli_args({}).code, 3);
    EXPECT_EQ(run_cli_args({"ingest", "--style", "H1"}).code, 3);
    EXPECT_EQ(run_cli_args({"--help"}).code, 0);
}

TEST(CliExitCodes, TransferWithoutAnyLlmIsAConfigError) {
    testing::TempDir dir;
    write_file_atomic(dir / "ex_h1.jsonl",
                      serialize_exemplars(testing::make_exemplar_set(StyleDomain("H1"), testing::formal_lexicon(),
                                                                     Granularity::Utterance, 12, 1)));
    write_file_atomic(dir / "ex_b.jsonl",
                      serialize_exemplars(testing::make_exemplar_set(StyleDomain("B"), testing::casual_lexicon(),
                                                                     Granularity::Utterance, 12, 2)));
    const std::vector<Segment> segs{
        testing::make_segment("c", 0, {testing::agent("i shall look into it")}, Granularity::Utterance)};
    write_file_atomic(dir / "s.jsonl", serialize_segments(segs));
    const auto run = run_cli_args({"transfer", "--in", (dir / "s.jsonl").string(), "--out", (dir / "r").string(),
                                   "--source-exemplars", (dir / "ex_h1.jsonl").string(), "--target-exemplars",
                                   (dir / "ex_b.jsonl").string()});
    EXPECT_EQ(run.code, 3);
}

TEST(CliConfigReport, ApiKeyIsRedactedInEffectiveConfig) {
    const auto run = run_cli_args({"frobnicate"}, {{"LLM_API_KEY", "sk-secret"}});
    EXPECT_EQ(run.err.find("sk-secret"), std::string::npos);
    testing::TempDir dir;
    write_file_atomic(dir / "c.jsonl", serialize_corpus(testing::make_styled_corpus(StyleDomain("H1"),
                                                                                  testing::formal_lexicon(), 2, 1)));
    const auto ok = run_cli_args({"ingest", "--in", (dir / "c.jsonl").string(), "--style", "H1", "--out",
                                  (dir / "o.jsonl").string()},
                                 {{"LLM_API_KEY", "sk-secret"}});
    EXPECT_EQ(ok.code, 0);
    EXPECT_EQ(ok.err.find("sk-secret"), std::string::npos);
    EXPECT_NE(ok.err.find("\"api_key\":\"***\""), std::string::npos);
}

}  // namespace
}  // namespace convstyle

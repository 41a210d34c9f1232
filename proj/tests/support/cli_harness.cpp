#include "cli_harness.hpp"

#include "convstyle/downstream_intent.hpp"
#include "convstyle/human_eval.hpp"
#include "convstyle/util.hpp"
#include "test_support.hpp"

#include <sstream>

namespace convstyle::testing {

CliRun run_cli_args(const std::vector<std::string>& args, const std::map<std::string, std::string>& env) {
    std::vector<const char*> argv{"convstyle"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const EnvLookup lookup = [&env](const char* name) -> std::optional<std::string> {
        if (auto it = env.find(name); it != env.end()) return it->second;
        return std::nullopt;
    };
    CliRun run;
    run.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err, lookup);
    run.out = out.str();
    run.err = err.str();
    return run;
}

namespace {

std::string path_arg(const std::filesystem::path& p) { return p.string(); }

std::string results_file(const std::vector<TransferResult>& results) {
    std::vector<BatchRecord> records;
    for (const auto& r : results) records.push_back(BatchRecord{r, std::nullopt});
    return serialize_batch(records);
}

}  // namespace

std::vector<WorkflowStep> prepare_workflows(const std::filesystem::path& dir) {
    auto at = [&](const std::string& name) { return dir / name; };

    write_file_atomic(at("h1.jsonl"), serialize_corpus(make_styled_corpus(StyleDomain("H1"), formal_lexicon(), 24, 3)));
    write_file_atomic(at("b.jsonl"), serialize_corpus(make_styled_corpus(StyleDomain("B"), casual_lexicon(), 24, 4)));
    write_file_atomic(at("ex_h1.jsonl"),
               serialize_exemplars(make_exemplar_set(StyleDomain("H1"), formal_lexicon(), Granularity::TwoTurn, 12, 5)));
    write_file_atomic(at("ex_b.jsonl"),
               serialize_exemplars(make_exemplar_set(StyleDomain("B"), casual_lexicon(), Granularity::TwoTurn, 12, 6)));
    write_file_atomic(at("echo.jsonl"), "{\"mode\":\"echo_input\"}\n");
    write_file_atomic(at("config.json"),
               Json{{"llm", {{"mock_script", path_arg(at("echo.jsonl"))}}}, {"seed", 7}, {"workers", 3}}.dump());

    std::vector<TransferResult> model_a, model_b;
    std::vector<Annotation> annotations;
    for (int i = 0; i < 6; ++i) {
        const auto id = "c" + std::to_string(i);
        const auto src = "i shall gladly verify the order number " + std::to_string(i);
        model_a.push_back(exchange_result(id, "where is my order", src, "lemme check that order " + std::to_string(i), 0.6));
        model_b.push_back(exchange_result(id, "where is my order", src, "sure thing checking now " + std::to_string(i), 0.5));
        for (int a = 0; a < 3; ++a) {
            Annotation ann;
            ann.task_id = "appropriateness:" + id + ":0:0";
            ann.annotator_id = "ann" + std::to_string(a);
            ann.payload = std::vector<int>{(i + a) % 2 + 1, 2 - (i + a) % 2};
            annotations.push_back(ann);
        }
    }
    write_file_atomic(at("model_a.jsonl"), results_file(model_a));
    write_file_atomic(at("model_b.jsonl"), results_file(model_b));
    write_file_atomic(at("annotations.jsonl"), serialize_annotations(annotations));

    const auto scenario = make_vocabulary_shift_scenario();
    write_file_atomic(at("intent_train.jsonl"), serialize_intent_dataset(scenario.train));
    write_file_atomic(at("intent_test.jsonl"), serialize_intent_dataset(scenario.test));
    write_file_atomic(at("intent_ex_src.jsonl"), serialize_exemplars(scenario.source_exemplars));
    write_file_atomic(at("intent_ex_tgt.jsonl"), serialize_exemplars(scenario.target_exemplars));
    write_file_atomic(at("intent_mock.jsonl"), scenario.mock_script);
    write_file_atomic(at("intent_config.json"),
               Json{{"llm", {{"mock_script", path_arg(at("intent_mock.jsonl"))}}}, {"seed", 7}}.dump());

    const auto cfg = path_arg(at("config.json"));
    const auto classifier = std::vector<std::string>{"--train-source", path_arg(at("h1.jsonl")), "--train-target",
                                                     path_arg(at("b.jsonl"))};
    auto with = [](std::vector<std::string> a, const std::vector<std::string>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };

    std::vector<WorkflowStep> steps;
    steps.push_back({"ingest",
                     {"--config", cfg, "ingest", "--in", path_arg(at("h1.jsonl")), "--style", "H1", "--out",
                      path_arg(at("canon.jsonl"))},
                     {at("canon.jsonl")}});
    steps.push_back({"segment",
                     {"--config", cfg, "segment", "--in", path_arg(at("canon.jsonl")), "--style", "H1", "--granularity",
                      "two_turn", "--out", path_arg(at("segments.jsonl"))},
                     {at("segments.jsonl")}});
    steps.push_back({"transfer",
                     {"--config", cfg, "transfer", "--in", path_arg(at("segments.jsonl")), "--out",
                      path_arg(at("results.jsonl")), "--source-exemplars", path_arg(at("ex_h1.jsonl")),
                      "--target-exemplars", path_arg(at("ex_b.jsonl")), "--strategy", "random"},
                     {at("results.jsonl")}});
    steps.push_back({"analyze-stats",
                     {"--config", cfg, "analyze", "stats", "--in", path_arg(at("h1.jsonl")), "--style", "H1", "--out",
                      path_arg(at("stats.json"))},
                     {at("stats.json")}});
    steps.push_back({"analyze-pmi",
                     {"--config", cfg, "analyze", "pmi", "--corpus", "H1=" + path_arg(at("h1.jsonl")), "--corpus",
                      "B=" + path_arg(at("b.jsonl")), "--out", path_arg(at("pmi.tsv"))},
                     {at("pmi.tsv")}});
    steps.push_back({"eval-auto",
                     with({"--config", cfg, "eval", "auto", "--results", path_arg(at("results.jsonl")), "--out",
                           path_arg(at("eval.json"))},
                          classifier),
                     {at("eval.json")}});
    steps.push_back({"eval-ablation",
                     with({"--config", cfg, "eval", "ablation", "--segments", path_arg(at("segments.jsonl")),
                           "--source-exemplars", path_arg(at("ex_h1.jsonl")), "--target-exemplars",
                           path_arg(at("ex_b.jsonl")), "--shots", "1,5", "--out", path_arg(at("ablation.json")),
                           "--table", path_arg(at("ablation.txt"))},
                          classifier),
                     {at("ablation.json"), at("ablation.txt")}});
    steps.push_back({"make-tasks",
                     {"--config", cfg, "humaneval", "make-tasks", "--results", "alpha=" + path_arg(at("model_a.jsonl")),
                      "--results", "beta=" + path_arg(at("model_b.jsonl")), "--kind", "appropriateness", "--out",
                      path_arg(at("tasks.jsonl"))},
                     {at("tasks.jsonl")}});
    steps.push_back({"aggregate",
                     {"--config", cfg, "humaneval", "aggregate", "--tasks", path_arg(at("tasks.jsonl")),
                      "--annotations", path_arg(at("annotations.jsonl")), "--out", path_arg(at("aggregate.json"))},
                     {at("aggregate.json")}});
    const auto icfg = path_arg(at("intent_config.json"));
    steps.push_back({"downstream-transfer",
                     {"--config", icfg, "downstream", "transfer", "--in", path_arg(at("intent_train.jsonl")), "--out",
                      path_arg(at("intent_transferred.jsonl")), "--source-exemplars",
                      path_arg(at("intent_ex_src.jsonl")), "--target-exemplars", path_arg(at("intent_ex_tgt.jsonl"))},
                     {at("intent_transferred.jsonl")}});
    steps.push_back({"downstream-train-eval",
                     {"--config", icfg, "downstream", "train-eval", "--original", path_arg(at("intent_train.jsonl")),
                      "--transferred", path_arg(at("intent_transferred.jsonl")), "--test",
                      path_arg(at("intent_test.jsonl")), "--out", path_arg(at("downstream.json"))},
                     {at("downstream.json")}});
    return steps;
}

std::map<std::string, WorkflowOutcome> run_workflows(const std::vector<WorkflowStep>& steps) {
    std::map<std::string, WorkflowOutcome> outcomes;
    for (const auto& step : steps) {
        const auto run = run_cli_args(step.args);
        WorkflowOutcome o;
        o.code = run.code;
        o.stdout_text = run.out;
        for (const auto& p : step.outputs) {
            o.files[p.filename().string()] = std::filesystem::exists(p) ? read_file(p) : std::string("<missing>");
        }
        outcomes[step.name] = std::move(o);
    }
    return outcomes;
}

}  // namespace convstyle::testing

#include "runtime.hpp"

#include "convstyle/error.hpp"

#include <sstream>

namespace convstyle::cli {

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

}  // namespace

void register_eval_commands(CLI::App& root, std::vector<std::pair<CLI::App*, Action>>& actions) {
    auto* group = root.add_subcommand("eval", "Automatic evaluation");
    group->require_subcommand(1);
    group->fallthrough();

    {
        struct Opts {
            std::filesystem::path results, out;
            ClassifierSource classifier;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = group->add_subcommand("auto", "Style strength and semantic similarity of a results file");
        cmd->add_option("--results", o->results, "Transfer results JSONL")->required();
        cmd->add_option("--out", o->out, "JSON report")->required();
        o->classifier.add_options(*cmd);
        actions.emplace_back(cmd, [o](Runtime& rt) {
            std::size_t failures = 0;
            const auto results = parse_transfer_results(read_file(o->results), &failures);
            if (results.empty()) throw Error(ErrorKind::EmptyInput, "results file has no successful records");
            const auto classifier =
                o->classifier.build(rt, results.front().config.source_style, results.front().config.target_style);
            const auto report = evaluate_run(results, *classifier, rt.embedder());
            auto j = report.to_json();
            j["failed_records_skipped"] = failures;
            rt.write_output(o->out, j.dump(2) + "\n");
            if (report.degenerate()) rt.warn("every alignment was discarded; no scores");
            Json summary{{"scored", report.scored}, {"discarded", report.discarded}};
            if (report.style_strength) summary["style_strength_mean"] = report.style_strength->mean;
            if (report.semantic_similarity) summary["semantic_similarity_mean"] = report.semantic_similarity->mean;
            rt.out() << summary.dump() << "\n";
            return kOk;
        });
    }
    {
        struct Opts {
            std::filesystem::path segments, source_exemplars, target_exemplars, out;
            std::optional<std::filesystem::path> table;
            std::string shots = "1,5,10";
            std::string strategies = "dynamic,random";
            std::string party = "agent";
            std::size_t token_budget = 2048;
            ClassifierSource classifier;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = group->add_subcommand("ablation", "Shots x selection-strategy grid on validation segments");
        cmd->add_option("--segments", o->segments, "Validation segments JSONL")->required();
        cmd->add_option("--source-exemplars", o->source_exemplars, "Source-style exemplar pairs")->required();
        cmd->add_option("--target-exemplars", o->target_exemplars, "Target-style exemplar pairs")->required();
        cmd->add_option("--shots", o->shots, "Comma-separated shot counts");
        cmd->add_option("--strategies", o->strategies, "Comma-separated strategies (dynamic, random)");
        cmd->add_option("--party", o->party, "Speaker whose turns are restyled");
        cmd->add_option("--token-budget", o->token_budget, "Whitespace-token limit per prompt");
        cmd->add_option("--out", o->out, "JSON report")->required();
        cmd->add_option("--table", o->table, "Also write a plain-text table");
        o->classifier.add_options(*cmd);
        actions.emplace_back(cmd, [o](Runtime& rt) {
            const auto source = load_exemplar_file(o->source_exemplars);
            const auto target = load_exemplar_file(o->target_exemplars);
            const auto segments = parse_segments(read_file(o->segments), [&](const std::string& w) { rt.warn(w); });

            AblationGrid grid;
            grid.granularity = source.granularity();
            for (const auto& s : split_list(o->shots)) {
                try {
                    grid.shots.push_back(std::stoul(s));
                } catch (const std::exception&) {
                    throw Error(ErrorKind::InvalidConfig, "bad shot count " + s);
                }
            }
            for (const auto& s : split_list(o->strategies)) grid.strategies.push_back(strategy_arg(s, rt.config().seed));

            TransferConfig base;
            base.source_style = source.style_domain();
            base.target_style = target.style_domain();
            base.granularity = grid.granularity;
            base.alignment_threshold = rt.config().alignment_threshold;
            base.party = speaker_arg(o->party);

            TransferDeps deps;
            deps.source_exemplars = &source;
            deps.target_exemplars = &target;
            deps.embedder = &rt.embedder();
            deps.llm = &rt.llm();
            deps.prompt_template = rt.config().prompt_template;
            deps.decoding = rt.config().decoding;

            const auto classifier = o->classifier.build(rt, base.source_style, base.target_style);
            AblationOptions options;
            options.token_budget = o->token_budget;
            options.workers = rt.config().workers;
            const auto report = run_ablation(grid, segments, base, deps, *classifier, options);
            rt.write_output(o->out, report.to_json().dump(2) + "\n");
            const std::vector<AblationReport> reports{report};
            const auto table = render_ablation_table(reports);
            if (o->table) rt.write_output(*o->table, table);
            rt.out() << table;
            return kOk;
        });
    }
}

}  // namespace convstyle::cli

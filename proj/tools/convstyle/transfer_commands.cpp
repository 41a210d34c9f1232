#include "runtime.hpp"

#include "convstyle/error.hpp"
#include "convstyle/transfer_pipeline.hpp"

namespace convstyle::cli {

namespace {

struct PromptCaptured {
    std::string text;
};

// Stands in for the gateway during --dry-run: records the prompt and aborts the step.
class CapturingClient final : public LlmClient {
public:
    [[nodiscard]] std::string name() const override { return "dry-run"; }

private:
    std::string do_complete(const CompletionRequest& request) const override {
        throw PromptCaptured{request.prompt.text};
    }
};

}  // namespace

void register_transfer_commands(CLI::App& root, std::vector<std::pair<CLI::App*, Action>>& actions) {
    struct Opts {
        std::filesystem::path in, out, source_exemplars, target_exemplars;
        std::optional<std::size_t> k;
        std::string strategy = "dynamic";
        std::string party = "agent";
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = root.add_subcommand("transfer", "Two-step style transfer of a segment file");
    cmd->add_option("--in", o->in, "Segments JSONL")->required();
    cmd->add_option("--out", o->out, "Results JSONL (one record per segment)")->required();
    cmd->add_option("--source-exemplars", o->source_exemplars, "Source-style exemplar pairs")->required();
    cmd->add_option("--target-exemplars", o->target_exemplars, "Target-style exemplar pairs")->required();
    cmd->add_option("--k", o->k, "Shots per prompt (default from config per granularity)");
    cmd->add_option("--strategy", o->strategy, "dynamic | random");
    cmd->add_option("--party", o->party, "Speaker whose turns are restyled");

    actions.emplace_back(cmd, [o](Runtime& rt) {
        const auto source = load_exemplar_file(o->source_exemplars);
        const auto target = load_exemplar_file(o->target_exemplars);
        const auto segments = parse_segments(read_file(o->in), [&](const std::string& w) { rt.warn(w); });

        TransferConfig cfg;
        cfg.source_style = source.style_domain();
        cfg.target_style = target.style_domain();
        cfg.granularity = source.granularity();
        cfg.k_shots = o->k.value_or(rt.config().shots_for(cfg.granularity));
        cfg.strategy = strategy_arg(o->strategy, rt.config().seed);
        cfg.alignment_threshold = rt.config().alignment_threshold;
        cfg.party = speaker_arg(o->party);
        cfg.validate();

        TransferDeps deps;
        deps.source_exemplars = &source;
        deps.target_exemplars = &target;
        deps.embedder = &rt.embedder();
        deps.prompt_template = rt.config().prompt_template;
        deps.decoding = rt.config().decoding;

        if (rt.dry_run()) {
            if (segments.empty()) throw Error(ErrorKind::EmptyInput, "no segments to preview");
            CapturingClient capture;
            deps.llm = &capture;
            try {
                run_reduction(segments.front(), cfg, deps);
            } catch (const PromptCaptured& p) {
                rt.out() << p.text;
                return kOk;
            }
            throw Error(ErrorKind::InvalidConfig, "dry run produced no prompt");
        }

        deps.llm = &rt.llm();
        const auto records = transfer_batch(segments, cfg, deps, rt.config().workers);
        rt.write_output(o->out, serialize_batch(records));
        std::size_t failed = 0;
        for (const auto& r : records) failed += r.ok() ? 0 : 1;
        rt.out() << Json{{"segments", records.size()}, {"succeeded", records.size() - failed}, {"failed", failed}}.dump()
                 << "\n";
        return failed == 0 ? kOk : kPartial;
    });
}

}  // namespace convstyle::cli

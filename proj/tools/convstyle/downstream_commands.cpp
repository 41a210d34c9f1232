#include "runtime.hpp"

#include "convstyle/downstream_intent.hpp"
#include "convstyle/error.hpp"

namespace convstyle::cli {

namespace {

IntentDataset dataset_with_split(const std::filesystem::path& path, Split split) {
    const auto all = parse_intent_file(read_file(path));
    std::vector<const IntentDataset*> matches;
    for (const auto& d : all) {
        if (d.split == split) matches.push_back(&d);
    }
    if (matches.size() != 1) {
        throw Error(ErrorKind::InvalidConfig, path.string() + " must hold exactly one style domain with a " +
                                                  std::string(to_string(split)) + " split");
    }
    return *matches.front();
}

}  // namespace

void register_downstream_commands(CLI::App& root, std::vector<std::pair<CLI::App*, Action>>& actions) {
    auto* group = root.add_subcommand("downstream", "Intent classification under style shift");
    group->require_subcommand(1);
    group->fallthrough();

    {
        struct Opts {
            std::filesystem::path in, out, source_exemplars, target_exemplars;
            std::optional<std::size_t> k;
            std::string strategy = "dynamic";
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = group->add_subcommand("transfer", "Restyle the customer utterances of a training set");
        cmd->add_option("--in", o->in, "Intent JSONL holding a train split")->required();
        cmd->add_option("--out", o->out, "Restyled intent JSONL")->required();
        cmd->add_option("--source-exemplars", o->source_exemplars, "Customer-side source-style pairs")->required();
        cmd->add_option("--target-exemplars", o->target_exemplars, "Customer-side target-style pairs")->required();
        cmd->add_option("--k", o->k, "Shots per prompt (default from config)");
        cmd->add_option("--strategy", o->strategy, "dynamic | random");
        actions.emplace_back(cmd, [o](Runtime& rt) {
            const auto train = dataset_with_split(o->in, Split::Train);
            const auto source = load_exemplar_file(o->source_exemplars);
            const auto target = load_exemplar_file(o->target_exemplars);

            TransferConfig cfg;
            cfg.source_style = source.style_domain();
            cfg.target_style = target.style_domain();
            cfg.granularity = Granularity::Utterance;
            cfg.k_shots = o->k.value_or(rt.config().shots_for(Granularity::Utterance));
            cfg.strategy = strategy_arg(o->strategy, rt.config().seed);
            cfg.alignment_threshold = rt.config().alignment_threshold;
            cfg.party = Speaker::Customer;
            cfg.validate();

            TransferDeps deps;
            deps.source_exemplars = &source;
            deps.target_exemplars = &target;
            deps.embedder = &rt.embedder();
            deps.llm = &rt.llm();
            deps.prompt_template = rt.config().prompt_template;
            deps.decoding = rt.config().decoding;

            const auto outcome = transfer_training_set(train, cfg, deps, rt.config().workers);
            rt.write_output(o->out, serialize_intent_dataset(outcome.dataset));
            for (const auto& f : outcome.failure_records) rt.err() << f.to_json().dump() << "\n";
            rt.out() << Json{{"examples", outcome.dataset.examples.size()},
                             {"transferred", outcome.transferred},
                             {"failures", outcome.failures}}
                            .dump()
                     << "\n";
            return outcome.failures == 0 ? kOk : kPartial;
        });
    }
    {
        struct Opts {
            std::filesystem::path original, transferred, test, out;
            std::size_t repeats = 10;
            double train_fraction = 0.9;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = group->add_subcommand("train-eval", "Compare classifiers trained on original vs restyled data");
        cmd->add_option("--original", o->original, "Original training intents")->required();
        cmd->add_option("--transferred", o->transferred, "Restyled training intents")->required();
        cmd->add_option("--test", o->test, "Test intents (test split)")->required();
        cmd->add_option("--repeats", o->repeats, "Seeded subsampling repeats");
        cmd->add_option("--train-fraction", o->train_fraction, "Share of training data per repeat");
        cmd->add_option("--out", o->out, "JSON report")->required();
        actions.emplace_back(cmd, [o](Runtime& rt) {
            DownstreamConfig dc;
            dc.repeats = o->repeats;
            dc.seed = rt.config().seed;
            dc.train_fraction = o->train_fraction;
            const auto report = compare_downstream(dataset_with_split(o->original, Split::Train),
                                                   dataset_with_split(o->transferred, Split::Train),
                                                   dataset_with_split(o->test, Split::Test), rt.embedder(), dc);
            rt.write_output(o->out, report.to_json().dump(2) + "\n");
            rt.out() << Json{{"original_macro_f1", report.original_macro.mean},
                             {"transferred_macro_f1", report.transferred_macro.mean},
                             {"mean_difference", report.mean_difference},
                             {"p_value", report.p_value}}
                            .dump()
                     << "\n";
            return kOk;
        });
    }
}

}  // namespace convstyle::cli

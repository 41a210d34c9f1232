#include "runtime.hpp"

#include "convstyle/error.hpp"
#include "convstyle/util.hpp"

#include <iostream>

namespace convstyle::cli {

const LlmClient& Runtime::llm() {
    if (!llm_) {
        if (!cfg_.llm.endpoint.empty()) {
            llm_ = std::make_unique<RemoteCompletionClient>(llm_http_options(cfg_), cfg_.llm.model);
        } else if (cfg_.llm.mock_script) {
            llm_ = load_mock_script(read_file(*cfg_.llm.mock_script), cfg_.prompt_template);
        } else {
            throw Error(ErrorKind::InvalidConfig, "no LLM endpoint or mock script configured");
        }
    }
    return *llm_;
}

const EmbeddingProvider& Runtime::embedder() {
    if (!embedder_) {
        if (!cfg_.embedding.endpoint.empty()) {
            RemoteEmbedderOptions opts;
            opts.http = embedding_http_options(cfg_);
            opts.model_name = cfg_.embedding.model;
            embedder_ = std::make_shared<CachingEmbedder>(std::make_shared<RemoteEmbedder>(opts));
        } else {
            embedder_ = std::make_shared<HashedTfEmbedder>(cfg_.embedding.dimension);
        }
    }
    return *embedder_;
}

void Runtime::write_output(const std::filesystem::path& path, std::string_view content) {
    write_file_atomic(path, content);
    err_ << "wrote " << path.string() << "\n";
}

void Runtime::warn(const std::string& message) { err_ << "warning: " << message << "\n"; }

Granularity granularity_arg(const std::string& s) {
    if (auto g = parse_granularity(s)) return *g;
    throw Error(ErrorKind::InvalidConfig, "unknown granularity " + s + " (utterance, two_turn, long_window)");
}

Speaker speaker_arg(const std::string& s) {
    if (auto p = parse_speaker(s)) return *p;
    throw Error(ErrorKind::InvalidConfig, "unknown party " + s + " (agent, customer)");
}

SelectionStrategy strategy_arg(const std::string& s, std::uint64_t seed) {
    if (s == "dynamic") return SelectionStrategy::dynamic();
    if (s == "random") return SelectionStrategy::random(seed);
    throw Error(ErrorKind::InvalidConfig, "unknown strategy " + s + " (dynamic, random)");
}

Corpus load_corpus_file(Runtime& rt, const std::filesystem::path& path, const StyleDomain& style) {
    return parse_corpus(read_file(path), style, [&](const std::string& w) { rt.warn(path.string() + ": " + w); });
}

ExemplarSet load_exemplar_file(const std::filesystem::path& path) { return load_exemplars(read_file(path)); }

void ClassifierSource::add_options(CLI::App& app) {
    app.add_option("--classifier", model, "Saved local classifier (JSON)");
    app.add_option("--classifier-endpoint", endpoint, "Remote style scorer base URL");
    app.add_option("--train-source", train_source, "Source-style corpus to train a local classifier on");
    app.add_option("--train-target", train_target, "Target-style corpus to train a local classifier on");
    app.add_option("--save-classifier", save_model, "Where to store a classifier trained on the spot");
}

std::unique_ptr<StyleClassifier> ClassifierSource::build(Runtime& rt, const StyleDomain& source,
                                                         const StyleDomain& target) const {
    if (model) {
        auto c = LocalStyleClassifier::from_json(Json::parse(read_file(*model)));
        if (c.source() != source || c.target() != target) {
            throw Error(ErrorKind::DirectionMismatch, "classifier was trained for " + c.source().name() + " -> " +
                                                          c.target().name());
        }
        return std::make_unique<LocalStyleClassifier>(std::move(c));
    }
    if (!endpoint.empty()) {
        HttpOptions http = llm_http_options(rt.config());
        http.endpoint = endpoint;
        return std::make_unique<RemoteStyleClassifier>(http, source, target);
    }
    if (train_source && train_target) {
        ClassifierTrainConfig tc;
        tc.seed = rt.config().seed;
        auto trained = train_local_style_classifier(load_corpus_file(rt, *train_source, source),
                                                    load_corpus_file(rt, *train_target, target), tc);
        rt.err() << "classifier held-out accuracy " << trained.report.held_out_accuracy << " ("
                 << trained.report.holdout_per_class << " per class)\n";
        if (save_model) rt.write_output(*save_model, trained.classifier.to_json().dump(2) + "\n");
        return std::make_unique<LocalStyleClassifier>(std::move(trained.classifier));
    }
    throw Error(ErrorKind::InvalidConfig, "give --classifier, --classifier-endpoint, or --train-source and --train-target");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const EnvLookup& env) {
    CLI::App app{"Few-shot conversation style transfer and evaluation toolkit", "convstyle"};
    app.fallthrough();
    app.require_subcommand(1);
    GlobalFlags flags;
    app.add_option("--config", flags.config, "JSON config file");
    app.add_option("--seed", flags.seed, "Seed for every random choice");
    app.add_option("--workers", flags.workers, "Parallel transfer workers");
    app.add_flag("--dry-run", flags.dry_run, "Show what would be sent without calling the LLM");

    std::vector<std::pair<CLI::App*, Action>> actions;
    register_data_commands(app, actions);
    register_transfer_commands(app, actions);
    register_eval_commands(app, actions);
    register_humaneval_commands(app, actions);
    register_downstream_commands(app, actions);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kConfig;
    }

    auto report = [&](std::string_view kind, std::string_view message) {
        err << Json{{"error", kind}, {"message", message}}.dump() << "\n";
    };
    try {
        const auto cfg = load_cli_config(flags.config, env, CliOverrides{flags.seed, flags.workers});
        err << "effective config: " << cfg.to_json(true).dump() << "\n";
        Runtime rt(cfg, flags.dry_run, out, err);
        for (auto& [sub, action] : actions) {
            if (sub->parsed()) return action(rt);
        }
        err << app.help();
        return kConfig;
    } catch (const Error& e) {
        report(to_string(e.kind()), e.what());
        const bool config_error = e.kind() == ErrorKind::InvalidConfig || e.kind() == ErrorKind::InvalidTemplate;
        return config_error ? kConfig : kValidation;
    } catch (const std::exception& e) {
        report("unexpected", e.what());
        return kValidation;
    }
}

}  // namespace convstyle::cli

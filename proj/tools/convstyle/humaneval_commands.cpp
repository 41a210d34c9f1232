#include "runtime.hpp"

#include "convstyle/annotation_service.hpp"
#include "convstyle/error.hpp"
#include "convstyle/human_eval.hpp"

namespace convstyle::cli {

namespace {

// A seeded sample of the target corpus's turns, shown with StyleStrength tasks.
std::vector<std::string> reference_utterances(const Corpus& corpus, Speaker party, std::size_t n, std::uint64_t seed) {
    std::vector<std::string> pool;
    for (const auto& conv : corpus.conversations) {
        for (const auto& t : conv.turns) {
            if (t.speaker == party) pool.push_back(t.text);
        }
    }
    SeededRng rng(seed);
    std::vector<std::string> out;
    for (auto i : rng.sample_without_replacement(pool.size(), std::min(n, pool.size()))) out.push_back(pool[i]);
    return out;
}

}  // namespace

void register_humaneval_commands(CLI::App& root, std::vector<std::pair<CLI::App*, Action>>& actions) {
    auto* group = root.add_subcommand("humaneval", "Human evaluation tasks, service and aggregation");
    group->require_subcommand(1);
    group->fallthrough();

    {
        struct Opts {
            std::vector<std::string> results;
            std::string kind;
            std::filesystem::path out;
            std::optional<std::filesystem::path> references;
            std::string reference_style;
            std::size_t num_references = 5;
            double min_similarity = 0.2;
            std::size_t min_candidates = 2;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = group->add_subcommand("make-tasks", "Build filtered, shuffled annotation tasks");
        cmd->add_option("--results", o->results, "MODEL=PATH, once per compared model")->required();
        cmd->add_option("--kind", o->kind, "style_strength | appropriateness | semantic_correctness")->required();
        cmd->add_option("--out", o->out, "Task JSONL (server-side; holds the model keys)")->required();
        cmd->add_option("--references", o->references, "Target-style corpus for StyleStrength reference utterances");
        cmd->add_option("--reference-style", o->reference_style, "Style domain of --references");
        cmd->add_option("--num-references", o->num_references, "Reference utterances per task");
        cmd->add_option("--min-similarity", o->min_similarity, "Candidates aligned below this are dropped");
        cmd->add_option("--min-candidates", o->min_candidates, "Tasks with fewer surviving candidates are dropped");
        actions.emplace_back(cmd, [o](Runtime& rt) {
            const auto kind = parse_task_kind(o->kind);
            if (!kind) throw Error(ErrorKind::InvalidConfig, "unknown task kind " + o->kind);
            std::map<std::string, std::vector<TransferResult>> by_model;
            for (const auto& spec : o->results) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos || eq == 0) {
                    throw Error(ErrorKind::InvalidConfig, "--results expects MODEL=PATH, got " + spec);
                }
                by_model[spec.substr(0, eq)] = parse_transfer_results(read_file(spec.substr(eq + 1)));
            }
            FilterConfig filter;
            filter.min_similarity = o->min_similarity;
            filter.min_candidates = o->min_candidates;
            if (*kind == TaskKind::StyleStrength && o->references) {
                if (o->reference_style.empty()) throw Error(ErrorKind::InvalidConfig, "--reference-style is required");
                const auto corpus = load_corpus_file(rt, *o->references, StyleDomain(o->reference_style));
                filter.reference_examples =
                    reference_utterances(corpus, Speaker::Agent, o->num_references, rt.config().seed);
            }
            const auto built = make_tasks(by_model, *kind, filter, rt.config().seed);
            rt.write_output(o->out, serialize_tasks(built.tasks));
            rt.out() << Json{{"source_utterances", built.source_utterances},
                             {"candidates_total", built.candidates_total},
                             {"candidates_dropped_step1", built.candidates_dropped_step1},
                             {"tasks_dropped_too_few", built.tasks_dropped_too_few},
                             {"tasks_dropped_step2", built.tasks_dropped_step2},
                             {"tasks", built.tasks.size()}}
                            .dump()
                     << "\n";
            return kOk;
        });
    }
    {
        struct Opts {
            std::vector<std::filesystem::path> tasks;
            std::filesystem::path log;
            std::optional<std::string> host;
            std::optional<int> port;
            std::optional<std::size_t> quorum;
            std::optional<std::filesystem::path> static_dir;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = group->add_subcommand("serve", "Serve tasks to annotators over HTTP");
        cmd->add_option("--tasks", o->tasks, "Task JSONL files")->required();
        cmd->add_option("--log", o->log, "Append-only annotation log")->required();
        cmd->add_option("--host", o->host, "Bind address");
        cmd->add_option("--port", o->port, "Bind port (0 picks a free one)");
        cmd->add_option("--quorum", o->quorum, "Annotations required per task");
        cmd->add_option("--static", o->static_dir, "Directory of UI assets to serve at /");
        actions.emplace_back(cmd, [o](Runtime& rt) {
            std::vector<AnnotationTask> tasks;
            for (const auto& p : o->tasks) {
                for (auto& t : parse_tasks(read_file(p))) tasks.push_back(std::move(t));
            }
            const auto& svc = rt.config().service;
            AnnotationStore store(std::move(tasks), o->log, o->quorum.value_or(svc.quorum));
            if (store.replay_skipped() > 0) {
                rt.warn(std::to_string(store.replay_skipped()) + " annotation log lines skipped during replay");
            }
            ServerOptions options;
            options.host = o->host.value_or(svc.host);
            options.port = o->port.value_or(svc.port);
            options.static_dir = o->static_dir ? o->static_dir : svc.static_dir;
            AnnotationServer server(store, options);
            rt.err() << "serving " << store.tasks().size() << " tasks on " << options.host << ":"
                     << (options.port == 0 ? std::string("<ephemeral>") : std::to_string(options.port)) << "\n";
            server.run();
            return kOk;
        });
    }
    {
        struct Opts {
            std::vector<std::filesystem::path> tasks;
            std::filesystem::path annotations, out;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = group->add_subcommand("aggregate", "Scores, agreement and win rates from an annotation log");
        cmd->add_option("--tasks", o->tasks, "Task JSONL files")->required();
        cmd->add_option("--annotations", o->annotations, "Annotation log JSONL")->required();
        cmd->add_option("--out", o->out, "JSON results")->required();
        actions.emplace_back(cmd, [o](Runtime& rt) {
            std::vector<AnnotationTask> tasks;
            for (const auto& p : o->tasks) {
                for (auto& t : parse_tasks(read_file(p))) tasks.push_back(std::move(t));
            }
            const auto annotations = parse_annotations(read_file(o->annotations));
            if (annotations.empty()) throw Error(ErrorKind::EmptyAnnotationSet, "annotation log is empty");
            const auto summary = summarize_results(annotations, tasks);
            rt.write_output(o->out, summary.dump(2) + "\n");
            rt.out() << Json{{"annotations", annotations.size()}, {"tasks", tasks.size()}}.dump() << "\n";
            return kOk;
        });
    }
}

}  // namespace convstyle::cli

#include "runtime.hpp"

#include "convstyle/error.hpp"
#include "convstyle/style_analytics.hpp"

#include <cstdio>
#include <iostream>

namespace convstyle::cli {

namespace {

Json stats_json(const StyleStats& s) {
    auto ms = [](const MeanStd& m) { return Json{{"mean", m.mean}, {"std", m.std}, {"n", m.n}}; };
    return Json{{"conversations", s.conversations},
                {"turns", s.turns},
                {"turns_per_conversation", ms(s.turns_per_conversation)},
                {"words_per_turn", ms(s.words_per_turn)},
                {"vocabulary_size", s.vocabulary_size},
                {"signature_rate", s.signature_rate}};
}

}  // namespace

void register_data_commands(CLI::App& root, std::vector<std::pair<CLI::App*, Action>>& actions) {
    {
        struct Opts {
            std::filesystem::path in, out;
            std::string style;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = root.add_subcommand("ingest", "Validate a corpus and write it in canonical form");
        cmd->add_option("--in", o->in, "Corpus JSONL")->required();
        cmd->add_option("--style", o->style, "Style domain every record must carry")->required();
        cmd->add_option("--out", o->out, "Canonical corpus JSONL")->required();
        actions.emplace_back(cmd, [o](Runtime& rt) {
            const auto corpus = load_corpus_file(rt, o->in, StyleDomain(o->style));
            rt.write_output(o->out, serialize_corpus(corpus));
            rt.out() << Json{{"conversations", corpus.conversations.size()}}.dump() << "\n";
            return kOk;
        });
    }
    {
        struct Opts {
            std::filesystem::path in, out;
            std::string style, granularity, party = "agent";
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = root.add_subcommand("segment", "Cut conversations into transfer segments");
        cmd->add_option("--in", o->in, "Corpus JSONL")->required();
        cmd->add_option("--style", o->style, "Style domain of the corpus")->required();
        cmd->add_option("--granularity", o->granularity, "utterance | two_turn | long_window")->required();
        cmd->add_option("--party", o->party, "Speaker whose turns are transferred");
        cmd->add_option("--out", o->out, "Segments JSONL")->required();
        actions.emplace_back(cmd, [o](Runtime& rt) {
            const auto corpus = load_corpus_file(rt, o->in, StyleDomain(o->style));
            const auto g = granularity_arg(o->granularity);
            const auto party = speaker_arg(o->party);
            std::vector<Segment> segments;
            for (const auto& conv : corpus.conversations) {
                for (auto& s : segment_conversation(conv, g, party)) segments.push_back(std::move(s));
            }
            rt.write_output(o->out, serialize_segments(segments));
            rt.out() << Json{{"segments", segments.size()}}.dump() << "\n";
            return kOk;
        });
    }
    {
        auto* group = root.add_subcommand("exemplars", "Exemplar pair files");
        group->require_subcommand(1);
        group->fallthrough();
        auto in = std::make_shared<std::filesystem::path>();
        auto* cmd = group->add_subcommand("validate", "Check an exemplar file and summarise it");
        cmd->add_option("--in", *in, "Exemplar JSONL")->required();
        actions.emplace_back(cmd, [in](Runtime& rt) {
            const auto set = load_exemplar_file(*in);
            rt.out() << Json{{"style_domain", set.style_domain().name()},
                             {"granularity", to_string(set.granularity())},
                             {"pairs", set.size()}}
                            .dump()
                     << "\n";
            return kOk;
        });
    }
    {
        auto* group = root.add_subcommand("analyze", "Corpus style analytics");
        group->require_subcommand(1);
        group->fallthrough();

        struct StatsOpts {
            std::filesystem::path in;
            std::optional<std::filesystem::path> out;
            std::string style, party = "agent";
        };
        auto so = std::make_shared<StatsOpts>();
        auto* stats = group->add_subcommand("stats", "Turn, length, vocabulary and signature statistics");
        stats->add_option("--in", so->in, "Corpus JSONL")->required();
        stats->add_option("--style", so->style, "Style domain of the corpus")->required();
        stats->add_option("--party", so->party, "Speaker to describe");
        stats->add_option("--out", so->out, "Write the JSON report here instead of stdout");
        actions.emplace_back(stats, [so](Runtime& rt) {
            const auto corpus = load_corpus_file(rt, so->in, StyleDomain(so->style));
            const auto report = stats_json(compute_style_stats(corpus, speaker_arg(so->party), *default_normalizer()));
            if (so->out) {
                rt.write_output(*so->out, report.dump(2) + "\n");
            } else {
                rt.out() << report.dump(2) << "\n";
            }
            return kOk;
        });

        struct PmiOpts {
            std::vector<std::string> corpora;
            std::filesystem::path out;
            std::string party = "agent";
        };
        auto po = std::make_shared<PmiOpts>();
        auto* pmi = group->add_subcommand("pmi", "Per-domain PMI lexicons");
        pmi->add_option("--corpus", po->corpora, "STYLE=PATH, once per domain (at least two)")->required();
        pmi->add_option("--party", po->party, "Speaker whose turns are counted");
        pmi->add_option("--out", po->out, "TSV lexicon table")->required();
        actions.emplace_back(pmi, [po](Runtime& rt) {
            const auto& s = rt.config().pmi;
            PmiConfig cfg;
            cfg.max_utterance_fraction = s.max_utterance_fraction;
            cfg.min_usage_fraction = s.min_usage_fraction;
            cfg.default_min_usage_fraction = s.default_min_usage_fraction;
            cfg.top_n = s.top_n;
            cfg.party = speaker_arg(po->party);
            if (s.stopwords_file) cfg.stopwords = parse_stopwords(read_file(*s.stopwords_file));

            std::map<StyleDomain, Corpus> corpora;
            for (const auto& spec : po->corpora) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos || eq == 0) {
                    throw Error(ErrorKind::InvalidConfig, "--corpus expects STYLE=PATH, got " + spec);
                }
                StyleDomain d(spec.substr(0, eq));
                corpora.emplace(d, load_corpus_file(rt, spec.substr(eq + 1), d));
            }
            const auto lexicons = extract_pmi_lexicon(corpora, cfg);
            rt.write_output(po->out, render_lexicon_table(lexicons));
            Json sizes = Json::object();
            for (const auto& [d, lex] : lexicons) sizes[d.name()] = lex.entries.size();
            rt.out() << Json{{"lexicon_sizes", sizes}}.dump() << "\n";
            return kOk;
        });
    }
}

}  // namespace convstyle::cli

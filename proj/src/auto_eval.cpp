#include "convstyle/auto_eval.hpp"

#include "convstyle/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace convstyle {

// ---------------------------------------------------------------------------
// Local naive Bayes

double LocalClassifierModel::log_likelihood(std::string_view token, int cls) const {
    const auto it = token_counts.find(token);
    const double count = it == token_counts.end() ? 0.0 : static_cast<double>(it->second[static_cast<std::size_t>(cls)]);
    const double denom = static_cast<double>(total_tokens[static_cast<std::size_t>(cls)] + token_counts.size());
    return std::log((count + 1.0) / denom);
}

LocalStyleClassifier::LocalStyleClassifier(LocalClassifierModel model, std::shared_ptr<const TokenNormalizer> normalizer)
    : model_(std::move(model)), normalizer_(std::move(normalizer)) {
    if (!normalizer_) normalizer_ = default_normalizer();
}

std::vector<std::string> LocalStyleClassifier::preprocess(std::string_view utterance) const {
    if (model_.strip_signatures) return normalized_tokens(strip_signature(utterance), *normalizer_);
    return normalized_tokens(utterance, *normalizer_);
}

std::array<double, 2> LocalStyleClassifier::class_probabilities(std::string_view utterance) const {
    std::array<double, 2> lp = model_.log_prior;
    for (const auto& tok : preprocess(utterance)) {
        if (!model_.in_vocabulary(tok)) continue;
        lp[0] += model_.log_likelihood(tok, 0);
        lp[1] += model_.log_likelihood(tok, 1);
    }
    const double m = std::max(lp[0], lp[1]);
    const double e0 = std::exp(lp[0] - m);
    const double e1 = std::exp(lp[1] - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

double LocalStyleClassifier::score(std::string_view utterance) const {
    return class_probabilities(utterance)[1];
}

Json LocalStyleClassifier::to_json() const {
    Json counts = Json::object();
    for (const auto& [tok, c] : model_.token_counts) counts[tok] = Json::array({c[0], c[1]});
    return Json{{"kind", "local-nb"},
                {"source", model_.source.name()},
                {"target", model_.target.name()},
                {"log_prior", Json::array({model_.log_prior[0], model_.log_prior[1]})},
                {"total_tokens", Json::array({model_.total_tokens[0], model_.total_tokens[1]})},
                {"token_counts", std::move(counts)},
                {"strip_signatures", model_.strip_signatures}};
}

LocalStyleClassifier LocalStyleClassifier::from_json(const Json& j) {
    LocalClassifierModel m;
    try {
        m.source = StyleDomain(j.at("source").get<std::string>());
        m.target = StyleDomain(j.at("target").get<std::string>());
        m.log_prior = {j.at("log_prior").at(0).get<double>(), j.at("log_prior").at(1).get<double>()};
        m.total_tokens = {j.at("total_tokens").at(0).get<std::size_t>(), j.at("total_tokens").at(1).get<std::size_t>()};
        for (const auto& [tok, c] : j.at("token_counts").items()) {
            m.token_counts[tok] = {c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>()};
        }
        m.strip_signatures = j.at("strip_signatures").get<bool>();
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::MalformedRecord, std::string("classifier model: ") + e.what());
    }
    return LocalStyleClassifier(std::move(m));
}

LocalClassifierModel fit_naive_bayes(std::span<const std::string> source_texts,
                                     std::span<const std::string> target_texts, const StyleDomain& source,
                                     const StyleDomain& target, bool strip_signatures,
                                     const TokenNormalizer& normalizer) {
    if (source_texts.empty() || target_texts.empty()) throw Error(ErrorKind::EmptyCorpus, "a class has no utterances");
    LocalClassifierModel m;
    m.source = source;
    m.target = target;
    m.strip_signatures = strip_signatures;
    const double n0 = static_cast<double>(source_texts.size());
    const double n1 = static_cast<double>(target_texts.size());
    m.log_prior = {std::log(n0 / (n0 + n1)), std::log(n1 / (n0 + n1))};
    auto add = [&](std::span<const std::string> texts, std::size_t cls) {
        for (const auto& text : texts) {
            const auto cleaned = strip_signatures ? strip_signature(text) : text;
            for (auto& tok : normalized_tokens(cleaned, normalizer)) {
                ++m.token_counts[tok][cls];
                ++m.total_tokens[cls];
            }
        }
    };
    add(source_texts, 0);
    add(target_texts, 1);
    if (m.token_counts.empty()) throw Error(ErrorKind::DegenerateVocabulary, "no tokens survive preprocessing");
    return m;
}

namespace {

std::vector<std::string> party_texts(const Corpus& corpus, Speaker party) {
    std::vector<std::string> out;
    for (const auto& conv : corpus.conversations) {
        for (const auto& t : conv.turns) {
            if (t.speaker == party) out.push_back(t.text);
        }
    }
    return out;
}

double signature_share(const std::vector<std::string>& texts) {
    if (texts.empty()) return 0.0;
    const auto n = std::count_if(texts.begin(), texts.end(), [](const auto& t) { return detect_signature(t).has_value(); });
    return static_cast<double>(n) / static_cast<double>(texts.size());
}

}  // namespace

TrainedStyleClassifier train_local_style_classifier(const Corpus& source, const Corpus& target,
                                                    const ClassifierTrainConfig& cfg) {
    const auto src = party_texts(source, cfg.party);
    const auto tgt = party_texts(target, cfg.party);
    if (src.empty() || tgt.empty()) throw Error(ErrorKind::EmptyCorpus, "both corpora need utterances of the scored party");

    bool strip = cfg.stripping == SignatureStripping::On;
    if (cfg.stripping == SignatureStripping::Auto) {
        strip = signature_share(src) > cfg.signature_rate_threshold || signature_share(tgt) > cfg.signature_rate_threshold;
    }

    // Down-sample both classes to the smaller size, then split each into hold-out and train.
    const std::size_t n = std::min(src.size(), tgt.size());
    std::size_t holdout = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.holdout_fraction));
    if (n >= 2) holdout = std::clamp<std::size_t>(holdout, 1, n - 1);
    else holdout = 0;

    SeededRng rng(cfg.seed);
    std::array<std::vector<std::string>, 2> train;
    std::array<std::vector<std::string>, 2> held;
    std::size_t cls = 0;
    for (const auto* texts : {&src, &tgt}) {
        const auto picked = rng.sample_without_replacement(texts->size(), n);
        for (std::size_t i = 0; i < picked.size(); ++i) {
            (i < holdout ? held : train)[cls].push_back((*texts)[picked[i]]);
        }
        ++cls;
    }

    auto model = fit_naive_bayes(train[0], train[1], source.style_domain, target.style_domain, strip, *cfg.normalizer);
    LocalStyleClassifier classifier(std::move(model), cfg.normalizer);

    ClassifierTrainReport report;
    report.train_per_class = n - holdout;
    report.holdout_per_class = holdout;
    report.signatures_stripped = strip;
    if (holdout > 0) {
        std::size_t correct = 0;
        for (const auto& t : held[0]) correct += classifier.score(t) > 0.5 ? 0 : 1;
        for (const auto& t : held[1]) correct += classifier.score(t) > 0.5 ? 1 : 0;
        report.held_out_accuracy = static_cast<double>(correct) / static_cast<double>(2 * holdout);
    }
    return TrainedStyleClassifier{std::move(classifier), report};
}

// ---------------------------------------------------------------------------
// Remote classifier

RemoteStyleClassifier::RemoteStyleClassifier(HttpOptions http, StyleDomain source, StyleDomain target)
    : http_(std::move(http)), source_(std::move(source)), target_(std::move(target)) {}

double RemoteStyleClassifier::score(std::string_view utterance) const {
    const auto reply = http_.post("/score", Json{{"text", std::string(utterance)}, {"target_style", target_.name()}});
    const auto it = reply.find("probability");
    if (it == reply.end() || !it->is_number()) throw EndpointFailure(200, "reply has no numeric \"probability\"");
    const double p = it->get<double>();
    if (!(p >= 0.0 && p <= 1.0)) throw EndpointFailure(200, "probability outside [0, 1]");
    return p;
}

// ---------------------------------------------------------------------------
// Scoring

double style_strength(const StyleClassifier& classifier, std::string_view utterance) {
    if (trim(utterance).empty()) throw Error(ErrorKind::EmptyInput, "cannot score a blank utterance");
    return classifier.score(utterance);
}

double semantic_similarity(const EmbeddingProvider& embedder, std::string_view source_utt,
                           std::string_view transferred_utt) {
    return cosine_similarity(embed_text(embedder, source_utt), embed_text(embedder, transferred_utt));
}

Json EvalReport::to_json() const {
    auto stat = [](const std::optional<MeanStd>& s) {
        return s ? Json{{"mean", s->mean}, {"std", s->std}, {"n", s->n}} : Json(nullptr);
    };
    Json rows_json = Json::array();
    for (const auto& r : rows) {
        rows_json.push_back(Json{{"conversation_id", r.conversation_id},
                                 {"segment_index", r.segment_index},
                                 {"source_turn", r.source_turn},
                                 {"target_turn", r.target_turn},
                                 {"source_text", r.source_text},
                                 {"target_text", r.target_text},
                                 {"style_strength", r.style_strength},
                                 {"semantic_similarity", r.semantic_similarity}});
    }
    return Json{{"direction", Json{{"source", source.name()}, {"target", target.name()}}},
                {"results", results},
                {"scored", scored},
                {"discarded", discarded},
                {"degenerate", degenerate()},
                {"style_strength", stat(style_strength)},
                {"semantic_similarity", stat(semantic_similarity)},
                {"rows", std::move(rows_json)}};
}

EvalReport evaluate_run(std::span<const TransferResult> results, const StyleClassifier& classifier,
                        const EmbeddingProvider& embedder) {
    if (results.empty()) throw Error(ErrorKind::EmptyInput, "no transfer results to evaluate");
    EvalReport report;
    report.source = classifier.source();
    report.target = classifier.target();
    report.results = results.size();
    std::vector<double> strengths;
    std::vector<double> sims;
    for (const auto& r : results) {
        if (r.config.source_style != classifier.source() || r.config.target_style != classifier.target()) {
            throw Error(ErrorKind::DirectionMismatch, "result " + r.config.source_style.name() + "->" +
                                                          r.config.target_style.name() + " scored by a " +
                                                          classifier.source().name() + "->" + classifier.target().name() +
                                                          " classifier");
        }
        const auto src_idx = party_turn_indices(r.source.turns, r.config.party);
        const auto tgt_idx = party_turn_indices(r.target.turns, r.config.party);
        for (const auto& a : r.alignment) {
            if (a.discarded) {
                ++report.discarded;
                continue;
            }
            EvalRow row;
            row.conversation_id = r.source.conversation_id;
            row.segment_index = r.source.segment_index;
            row.source_turn = a.source_agent_turn_index;
            row.target_turn = a.target_agent_turn_index;
            row.source_text = r.source.turns.at(src_idx.at(a.source_agent_turn_index)).text;
            row.target_text = r.target.turns.at(tgt_idx.at(a.target_agent_turn_index)).text;
            row.style_strength = style_strength(classifier, row.target_text);
            row.semantic_similarity = semantic_similarity(embedder, row.source_text, row.target_text);
            strengths.push_back(row.style_strength);
            sims.push_back(row.semantic_similarity);
            report.rows.push_back(std::move(row));
        }
    }
    report.scored = report.rows.size();
    if (report.scored > 0) {
        report.style_strength = mean_std(strengths);
        report.semantic_similarity = mean_std(sims);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Ablation

std::string AblationCell::label() const {
    return std::to_string(shots) + "-shot " + (strategy.kind == SelectionStrategy::Kind::Dynamic ? "dynamic" : "random");
}

Json AblationReport::to_json() const {
    Json cells_json = Json::array();
    for (const auto& c : cells) {
        const char* status = c.status == AblationCell::Status::Ok            ? "ok"
                             : c.status == AblationCell::Status::NotSupported ? "not_supported"
                                                                               : "failed";
        Json cj{{"shots", c.shots},
                {"strategy", Json{{"kind", c.strategy.kind == SelectionStrategy::Kind::Dynamic ? "dynamic" : "random"},
                                  {"seed", c.strategy.seed}}},
                {"status", status},
                {"reason", c.reason},
                {"failures", c.failures}};
        cj["style_strength"] = c.style_strength
                                   ? Json{{"mean", c.style_strength->mean}, {"std", c.style_strength->std}, {"n", c.style_strength->n}}
                                   : Json(nullptr);
        cells_json.push_back(std::move(cj));
    }
    Json j{{"direction", Json{{"source", source.name()}, {"target", target.name()}}},
           {"granularity", to_string(granularity)},
           {"cells", std::move(cells_json)}};
    j["best"] = best ? Json(*best) : Json(nullptr);
    return j;
}

namespace {

std::size_t whitespace_tokens(const std::string& s) { return split_whitespace(s).size(); }

// Reduction prompts are exact; injection prompts are estimated with the source segment standing in
// for the (not yet generated) style-free intermediate.
std::optional<std::string> budget_violation(std::span<const Segment> segments, const TransferConfig& cfg,
                                            const TransferDeps& deps, std::size_t budget) {
    for (const auto& seg : segments) {
        for (int step = 0; step < 2; ++step) {
            const auto* set = step == 0 ? deps.source_exemplars : deps.target_exemplars;
            SelectionOptions opts;
            opts.k = cfg.k_shots;
            opts.strategy = cfg.strategy;
            opts.key_side = step == 0 ? ExemplarSide::Styled : ExemplarSide::StyleFree;
            opts.party = cfg.party;
            const auto ex = select_exemplars(*set, seg, opts, *deps.embedder);
            const auto prompt = step == 0 ? build_reduction_prompt(ex, seg, deps.prompt_template)
                                          : build_injection_prompt(ex, seg, deps.prompt_template);
            const auto tokens = whitespace_tokens(prompt.text);
            if (tokens > budget) {
                return std::string(step == 0 ? "reduction" : "injection") + " prompt has " + std::to_string(tokens) +
                       " tokens (budget " + std::to_string(budget) + ")";
            }
        }
    }
    return std::nullopt;
}

}  // namespace

AblationReport run_ablation(const AblationGrid& grid, std::span<const Segment> validation_segments,
                            const TransferConfig& base, const TransferDeps& deps,
                            const StyleClassifier& classifier, const AblationOptions& options) {
    if (grid.shots.empty() || grid.strategies.empty()) throw Error(ErrorKind::InvalidConfig, "ablation grid is empty");
    if (!deps.source_exemplars || !deps.target_exemplars || !deps.embedder) {
        throw Error(ErrorKind::MissingExemplars, "ablation needs both exemplar sets and an embedder");
    }
    AblationReport report;
    report.source = base.source_style;
    report.target = base.target_style;
    report.granularity = grid.granularity;
    const std::size_t available = std::min(deps.source_exemplars->size(), deps.target_exemplars->size());

    for (auto shots : grid.shots) {
        for (const auto& strategy : grid.strategies) {
            AblationCell cell;
            cell.shots = shots;
            cell.strategy = strategy;
            TransferConfig cfg = base;
            cfg.granularity = grid.granularity;
            cfg.k_shots = shots;
            cfg.strategy = strategy;
            try {
                if (shots == 0 || shots > available) {
                    cell.status = AblationCell::Status::NotSupported;
                    cell.reason = "needs " + std::to_string(shots) + " exemplars, " + std::to_string(available) + " available";
                } else if (auto why = budget_violation(validation_segments, cfg, deps, options.token_budget)) {
                    cell.status = AblationCell::Status::NotSupported;
                    cell.reason = *why;
                } else {
                    const auto batch = transfer_batch(validation_segments, cfg, deps, options.workers);
                    std::vector<TransferResult> ok;
                    for (const auto& rec : batch) {
                        if (rec.ok()) ok.push_back(*rec.result);
                        else ++cell.failures;
                    }
                    if (ok.empty()) {
                        cell.status = AblationCell::Status::Failed;
                        cell.reason = "every segment failed";
                    } else {
                        const auto eval = evaluate_run(ok, classifier, *deps.embedder);
                        cell.style_strength = eval.style_strength;
                        if (!eval.style_strength) {
                            cell.status = AblationCell::Status::Failed;
                            cell.reason = "no alignment survived filtering";
                        }
                    }
                }
            } catch (const Error& e) {
                cell.status = AblationCell::Status::Failed;
                cell.reason = e.what();
            }
            report.cells.push_back(std::move(cell));
        }
    }
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
        const auto& c = report.cells[i];
        if (c.status != AblationCell::Status::Ok || !c.style_strength) continue;
        if (!report.best || c.style_strength->mean > report.cells[*report.best].style_strength->mean) report.best = i;
    }
    return report;
}

std::string render_ablation_table(std::span<const AblationReport> reports) {
    if (reports.empty()) return {};
    std::vector<std::string> header{"Direction"};
    for (const auto& c : reports.front().cells) header.push_back(c.label());
    std::vector<std::vector<std::string>> rows{header};
    char buf[32];
    for (const auto& r : reports) {
        std::vector<std::string> row{r.source.name() + " -> " + r.target.name()};
        for (const auto& c : r.cells) {
            if (c.status == AblationCell::Status::NotSupported) {
                row.emplace_back("N/S");
            } else if (c.status == AblationCell::Status::Failed || !c.style_strength) {
                row.emplace_back("failed");
            } else {
                std::snprintf(buf, sizeof buf, "%.4f", c.style_strength->mean);
                row.emplace_back(buf);
            }
        }
        rows.push_back(std::move(row));
    }
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size() && i < widths.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
    }
    std::string out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t i = 0; i < rows[r].size() && i < widths.size(); ++i) {
            if (i > 0) out += " | ";
            out += rows[r][i] + std::string(widths[i] - rows[r][i].size(), ' ');
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += "\n";
        if (r == 0) {
            std::size_t total = 0;
            for (auto w : widths) total += w;
            out += std::string(total + 3 * (widths.size() - 1), '-') + "\n";
        }
    }
    return out;
}

}  // namespace convstyle

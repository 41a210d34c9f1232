#include "convstyle/transfer_pipeline.hpp"

#include "convstyle/error.hpp"
#include "convstyle/util.hpp"

#include <atomic>
#include <thread>

namespace convstyle {

void TransferConfig::validate() const {
    if (source_style.name().empty() || target_style.name().empty()) {
        throw Error(ErrorKind::InvalidConfig, "source and target styles are required");
    }
    if (source_style == target_style) throw Error(ErrorKind::InvalidConfig, "source and target styles are equal");
    if (source_style.is_style_free() || target_style.is_style_free()) {
        throw Error(ErrorKind::InvalidConfig, "STYLE_FREE cannot be a transfer endpoint");
    }
    if (k_shots == 0) throw Error(ErrorKind::InvalidConfig, "k_shots must be positive");
    if (!(alignment_threshold >= 0.0 && alignment_threshold <= 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "alignment_threshold must lie in [0, 1]");
    }
}

Json TransferConfig::to_json() const {
    return Json{{"source_style", source_style.name()},
                {"target_style", target_style.name()},
                {"granularity", to_string(granularity)},
                {"k_shots", k_shots},
                {"strategy", Json{{"kind", strategy.kind == SelectionStrategy::Kind::Dynamic ? "dynamic" : "random"},
                                  {"seed", strategy.seed}}},
                {"alignment_threshold", alignment_threshold},
                {"party", to_string(party)}};
}

TransferConfig TransferConfig::from_json(const Json& j) {
    TransferConfig c;
    try {
        c.source_style = StyleDomain(j.at("source_style").get<std::string>());
        c.target_style = StyleDomain(j.at("target_style").get<std::string>());
        const auto g = parse_granularity(j.at("granularity").get<std::string>());
        if (!g) throw Error(ErrorKind::MalformedRecord, "unknown granularity");
        c.granularity = *g;
        c.k_shots = j.at("k_shots").get<std::size_t>();
        const auto& s = j.at("strategy");
        const auto kind = s.at("kind").get<std::string>();
        if (kind != "dynamic" && kind != "random") throw Error(ErrorKind::MalformedRecord, "unknown strategy");
        c.strategy.kind = kind == "dynamic" ? SelectionStrategy::Kind::Dynamic : SelectionStrategy::Kind::Random;
        c.strategy.seed = s.value("seed", std::uint64_t{0});
        c.alignment_threshold = j.at("alignment_threshold").get<double>();
        const auto party = parse_speaker(j.value("party", std::string("agent")));
        if (!party) throw Error(ErrorKind::MalformedRecord, "unknown party");
        c.party = *party;
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::MalformedRecord, std::string("transfer config: ") + e.what());
    }
    return c;
}

namespace {

enum class Step { Reduction, Injection };

const char* step_name(Step s) { return s == Step::Reduction ? "reduction" : "injection"; }

void check_deps(const TransferDeps& deps) {
    if (!deps.embedder || !deps.llm) throw Error(ErrorKind::InvalidConfig, "transfer needs an embedder and an LLM client");
}

// Random selection draws a fresh sample per segment and step, reproducibly.
SelectionStrategy strategy_for(const SelectionStrategy& base, const Segment& segment, Step step) {
    if (base.kind != SelectionStrategy::Kind::Random) return base;
    const auto salt = stable_hash(segment.conversation_id + "#" + std::to_string(segment.segment_index) + "#" +
                                  step_name(step));
    return SelectionStrategy::random(base.seed ^ salt);
}

StepOutput run_step(Step step, const Segment& input, const TransferConfig& cfg, const TransferDeps& deps) {
    check_deps(deps);
    const ExemplarSet* set = step == Step::Reduction ? deps.source_exemplars : deps.target_exemplars;
    const StyleDomain& expected = step == Step::Reduction ? cfg.source_style : cfg.target_style;
    if (!set) throw Error(ErrorKind::MissingExemplars, std::string("no exemplar set for the ") + step_name(step) + " step");
    if (set->empty()) throw Error(ErrorKind::EmptyExemplars, std::string("empty exemplar set for the ") + step_name(step) + " step");
    if (set->style_domain() != expected) {
        throw Error(ErrorKind::MissingExemplars, std::string(step_name(step)) + " exemplars are " +
                                                     set->style_domain().name() + ", expected " + expected.name());
    }
    if (input.granularity != cfg.granularity || set->granularity() != cfg.granularity) {
        throw Error(ErrorKind::GranularityMismatch, "segment, exemplars and config disagree on granularity");
    }

    SelectionOptions opts;
    opts.k = cfg.k_shots;
    opts.strategy = strategy_for(cfg.strategy, input, step);
    opts.key_side = step == Step::Reduction ? ExemplarSide::Styled : ExemplarSide::StyleFree;
    opts.party = cfg.party;
    const auto exemplars = select_exemplars(*set, input, opts, *deps.embedder);

    auto prompt = step == Step::Reduction ? build_reduction_prompt(exemplars, input, deps.prompt_template)
                                          : build_injection_prompt(exemplars, input, deps.prompt_template);
    const auto response = deps.llm->complete(make_request(prompt, deps.decoding));

    std::vector<Speaker> expected_speakers;
    for (const auto& t : input.turns) expected_speakers.push_back(t.speaker);
    Segment parsed;
    try {
        parsed = parse_completion(response.text, cfg.granularity, expected_speakers, cfg.party);
    } catch (const Error& e) {
        throw ParseFailureError(response.text, std::string(step_name(step)) + " completion: " + e.what());
    }
    parsed.conversation_id = input.conversation_id;
    parsed.segment_index = input.segment_index;
    return StepOutput{std::move(parsed), std::move(prompt), response.text};
}

}  // namespace

StepOutput run_reduction(const Segment& segment, const TransferConfig& cfg, const TransferDeps& deps) {
    return run_step(Step::Reduction, segment, cfg, deps);
}

StepOutput run_injection(const Segment& style_free, const TransferConfig& cfg, const TransferDeps& deps) {
    return run_step(Step::Injection, style_free, cfg, deps);
}

Segment reduce_style(const Segment& segment, const TransferConfig& cfg, const TransferDeps& deps) {
    return run_reduction(segment, cfg, deps).segment;
}

Segment inject_style(const Segment& style_free, const TransferConfig& cfg, const TransferDeps& deps) {
    return run_injection(style_free, cfg, deps).segment;
}

std::vector<AlignedPair> align_outputs(const Segment& source, const Segment& target,
                                       const EmbeddingProvider& embedder, double threshold, Speaker party) {
    const auto src_idx = party_turn_indices(source.turns, party);
    const auto tgt_idx = party_turn_indices(target.turns, party);
    if (src_idx.empty() || tgt_idx.empty()) {
        throw Error(ErrorKind::NoAgentTurns, "alignment needs turns of the transferred party on both sides");
    }
    std::vector<EmbeddingVector> tgt_vecs;
    tgt_vecs.reserve(tgt_idx.size());
    for (auto t : tgt_idx) tgt_vecs.push_back(embed_text(embedder, target.turns[t].text));

    std::vector<AlignedPair> out;
    out.reserve(src_idx.size());
    for (std::size_t s = 0; s < src_idx.size(); ++s) {
        const auto sv = embed_text(embedder, source.turns[src_idx[s]].text);
        std::size_t best = 0;
        double best_sim = cosine_similarity(sv, tgt_vecs[0]);
        for (std::size_t t = 1; t < tgt_vecs.size(); ++t) {
            const double sim = cosine_similarity(sv, tgt_vecs[t]);
            if (sim > best_sim) {
                best_sim = sim;
                best = t;
            }
        }
        out.push_back(AlignedPair{s, best, best_sim, best_sim < threshold});
    }
    return out;
}

namespace {

TransferResult assemble(const Segment& segment, StepOutput reduced, StepOutput injected, const TransferConfig& cfg,
                        const TransferDeps& deps) {
    TransferResult r;
    r.source = segment;
    r.alignment = align_outputs(segment, injected.segment, *deps.embedder, cfg.alignment_threshold, cfg.party);
    r.style_free = std::move(reduced.segment);
    r.target = std::move(injected.segment);
    r.reduction_prompt_digest = stable_digest(reduced.prompt.text);
    r.injection_prompt_digest = stable_digest(injected.prompt.text);
    r.config = cfg;
    return r;
}

}  // namespace

TransferResult transfer(const Segment& segment, const TransferConfig& cfg, const TransferDeps& deps) {
    cfg.validate();
    auto reduced = run_reduction(segment, cfg, deps);
    auto injected = run_injection(reduced.segment, cfg, deps);
    return assemble(segment, std::move(reduced), std::move(injected), cfg, deps);
}

Json TransferResult::to_json() const {
    Json align = Json::array();
    for (const auto& a : alignment) {
        align.push_back(Json{{"source_turn", a.source_agent_turn_index},
                             {"target_turn", a.target_agent_turn_index},
                             {"similarity", a.similarity},
                             {"discarded", a.discarded}});
    }
    return Json{{"status", "ok"},
                {"source", segment_to_json(source)},
                {"style_free", segment_to_json(style_free)},
                {"target", segment_to_json(target)},
                {"alignment", std::move(align)},
                {"prompt_digests", Json{{"reduction", reduction_prompt_digest}, {"injection", injection_prompt_digest}}},
                {"config", config.to_json()}};
}

TransferResult TransferResult::from_json(const Json& j) {
    TransferResult r;
    try {
        r.source = segment_from_json(j.at("source"));
        r.style_free = segment_from_json(j.at("style_free"));
        r.target = segment_from_json(j.at("target"));
        for (const auto& a : j.at("alignment")) {
            r.alignment.push_back(AlignedPair{a.at("source_turn").get<std::size_t>(), a.at("target_turn").get<std::size_t>(),
                                              a.at("similarity").get<double>(), a.at("discarded").get<bool>()});
        }
        r.reduction_prompt_digest = j.at("prompt_digests").at("reduction").get<std::string>();
        r.injection_prompt_digest = j.at("prompt_digests").at("injection").get<std::string>();
        r.config = TransferConfig::from_json(j.at("config"));
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::MalformedRecord, std::string("transfer result: ") + e.what());
    }
    return r;
}

Json TransferFailure::to_json() const {
    Json j{{"status", "failed"},
           {"source", segment_to_json(source)},
           {"step", step},
           {"error_kind", error_kind},
           {"message", message}};
    j["raw_completion"] = raw_completion ? Json(*raw_completion) : Json(nullptr);
    return j;
}

Json BatchRecord::to_json() const {
    return result ? result->to_json() : failure->to_json();
}

namespace {

BatchRecord run_one(const Segment& segment, const TransferConfig& cfg, const TransferDeps& deps) {
    BatchRecord rec;
    std::string step = "reduction";
    try {
        auto reduced = run_reduction(segment, cfg, deps);
        step = "injection";
        auto injected = run_injection(reduced.segment, cfg, deps);
        step = "alignment";
        rec.result = assemble(segment, std::move(reduced), std::move(injected), cfg, deps);
    } catch (const ParseFailureError& e) {
        rec.failure = TransferFailure{segment, step, std::string(to_string(e.kind())), e.what(), e.raw_completion()};
    } catch (const Error& e) {
        rec.failure = TransferFailure{segment, step, std::string(to_string(e.kind())), e.what(), std::nullopt};
    }
    return rec;
}

}  // namespace

std::vector<BatchRecord> transfer_batch(std::span<const Segment> segments, const TransferConfig& cfg,
                                        const TransferDeps& deps, std::size_t workers) {
    cfg.validate();
    check_deps(deps);
    std::vector<BatchRecord> out(segments.size());
    workers = std::max<std::size_t>(1, std::min(workers, segments.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < segments.size(); ++i) out[i] = run_one(segments[i], cfg, deps);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (auto i = next.fetch_add(1); i < segments.size(); i = next.fetch_add(1)) {
                out[i] = run_one(segments[i], cfg, deps);
            }
        });
    }
    pool.clear();
    return out;
}

std::string serialize_batch(std::span<const BatchRecord> records) {
    std::string out;
    for (const auto& r : records) out += dump_line(r.to_json());
    return out;
}

std::vector<TransferResult> parse_transfer_results(std::string_view text, std::size_t* failures) {
    std::vector<TransferResult> out;
    std::size_t failed = 0;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto j = parse_record(line, line_no);
        if (j.value("status", std::string("ok")) != "ok") {
            ++failed;
            continue;
        }
        try {
            out.push_back(TransferResult::from_json(j));
        } catch (const Error& e) {
            throw MalformedRecordError(line_no, e.what());
        }
    }
    if (failures) *failures = failed;
    return out;
}

}  // namespace convstyle

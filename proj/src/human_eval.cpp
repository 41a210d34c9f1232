#include "convstyle/human_eval.hpp"

#include "convstyle/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <unordered_map>

namespace convstyle {

std::string_view to_string(TaskKind k) noexcept {
    switch (k) {
        case TaskKind::StyleStrength: return "style_strength";
        case TaskKind::Appropriateness: return "appropriateness";
        case TaskKind::SemanticCorrectness: return "semantic_correctness";
    }
    return "style_strength";
}

std::optional<TaskKind> parse_task_kind(std::string_view s) {
    if (s == "style_strength") return TaskKind::StyleStrength;
    if (s == "appropriateness") return TaskKind::Appropriateness;
    if (s == "semantic_correctness") return TaskKind::SemanticCorrectness;
    return std::nullopt;
}

std::string_view to_string(SimilarityLabel l) noexcept {
    switch (l) {
        case SimilarityLabel::Similar: return "similar";
        case SimilarityLabel::PartiallySimilar: return "partially_similar";
        case SimilarityLabel::Dissimilar: return "dissimilar";
    }
    return "similar";
}

std::optional<SimilarityLabel> parse_similarity_label(std::string_view s) {
    if (s == "similar") return SimilarityLabel::Similar;
    if (s == "partially_similar") return SimilarityLabel::PartiallySimilar;
    if (s == "dissimilar") return SimilarityLabel::Dissimilar;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Records

Json AnnotationTask::to_public_json() const {
    Json cands = Json::array();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        cands.push_back(Json{{"index", i}, {"text", candidates[i].text}});
    }
    Json j{{"task_id", task_id},
           {"kind", to_string(kind)},
           {"source_utterance", source_utterance},
           {"candidates", std::move(cands)},
           {"reference_style_examples", reference_style_examples}};
    j["context"] = context ? Json(*context) : Json(nullptr);
    return j;
}

Json AnnotationTask::to_private_json() const {
    Json j = to_public_json();
    Json keys = Json::array();
    for (const auto& c : candidates) keys.push_back(c.model_key);
    j["model_keys"] = std::move(keys);
    j["shuffle_seed"] = shuffle_seed;
    return j;
}

AnnotationTask AnnotationTask::from_private_json(const Json& j) {
    AnnotationTask t;
    try {
        t.task_id = j.at("task_id").get<std::string>();
        const auto kind = parse_task_kind(j.at("kind").get<std::string>());
        if (!kind) throw Error(ErrorKind::MalformedRecord, "unknown task kind");
        t.kind = *kind;
        if (j.contains("context") && !j["context"].is_null()) t.context = j["context"].get<std::string>();
        t.source_utterance = j.at("source_utterance").get<std::string>();
        const auto& cands = j.at("candidates");
        const auto& keys = j.at("model_keys");
        if (cands.size() != keys.size()) throw Error(ErrorKind::MalformedRecord, "candidate/model key count mismatch");
        for (std::size_t i = 0; i < cands.size(); ++i) {
            t.candidates.push_back(Candidate{keys.at(i).get<std::string>(), cands.at(i).at("text").get<std::string>()});
        }
        t.reference_style_examples = j.value("reference_style_examples", std::vector<std::string>{});
        t.shuffle_seed = j.value("shuffle_seed", std::uint64_t{0});
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::MalformedRecord, std::string("task record: ") + e.what());
    }
    return t;
}

Json Annotation::to_json() const {
    Json j{{"task_id", task_id}, {"annotator_id", annotator_id}};
    if (has_ranks()) {
        j["ranks"] = ranks();
    } else {
        Json arr = Json::array();
        for (auto l : labels()) arr.push_back(to_string(l));
        j["labels"] = std::move(arr);
    }
    return j;
}

Annotation Annotation::from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidAnnotation, "annotation is not an object");
    Annotation a;
    auto str = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
            throw Error(ErrorKind::InvalidAnnotation, std::string("missing \"") + key + "\"");
        }
        return it->get<std::string>();
    };
    a.task_id = str("task_id");
    a.annotator_id = str("annotator_id");
    const bool has_ranks = j.contains("ranks");
    const bool has_labels = j.contains("labels");
    if (has_ranks == has_labels) throw Error(ErrorKind::InvalidAnnotation, "exactly one of ranks / labels is required");
    if (has_ranks) {
        std::vector<int> ranks;
        if (!j["ranks"].is_array()) throw Error(ErrorKind::InvalidAnnotation, "ranks must be an array");
        for (const auto& r : j["ranks"]) {
            if (!r.is_number_integer()) throw Error(ErrorKind::InvalidAnnotation, "ranks must be integers");
            ranks.push_back(r.get<int>());
        }
        a.payload = std::move(ranks);
    } else {
        std::vector<SimilarityLabel> labels;
        if (!j["labels"].is_array()) throw Error(ErrorKind::InvalidAnnotation, "labels must be an array");
        for (const auto& l : j["labels"]) {
            const auto parsed = l.is_string() ? parse_similarity_label(l.get<std::string>()) : std::nullopt;
            if (!parsed) throw Error(ErrorKind::InvalidAnnotation, "unknown label");
            labels.push_back(*parsed);
        }
        a.payload = std::move(labels);
    }
    return a;
}

void validate_annotation(const Annotation& a, const AnnotationTask& task) {
    const auto k = task.candidates.size();
    if (is_ranking(task.kind)) {
        if (!a.has_ranks()) throw Error(ErrorKind::InvalidAnnotation, "ranking task needs ranks");
        if (a.ranks().size() != k) throw Error(ErrorKind::InvalidAnnotation, "one rank per candidate is required");
        for (int r : a.ranks()) {
            if (r < 1 || r > static_cast<int>(k)) throw Error(ErrorKind::InvalidAnnotation, "rank outside [1, k]");
        }
    } else {
        if (a.has_ranks()) throw Error(ErrorKind::InvalidAnnotation, "semantic task needs labels");
        if (a.labels().size() != k) throw Error(ErrorKind::InvalidAnnotation, "one label per candidate is required");
    }
}

// ---------------------------------------------------------------------------
// Task generation

namespace {

using SourceKey = std::tuple<std::string, std::size_t, std::size_t>;

struct ModelOutput {
    std::string source_text;
    std::optional<std::string> context;
    std::string target_text;
    double similarity = 0.0;
};

std::map<SourceKey, ModelOutput> index_results(const std::vector<TransferResult>& results) {
    std::map<SourceKey, ModelOutput> out;
    for (const auto& r : results) {
        const auto party = r.config.party;
        const auto src_idx = party_turn_indices(r.source.turns, party);
        const auto tgt_idx = party_turn_indices(r.target.turns, party);
        for (const auto& a : r.alignment) {
            const auto src_pos = src_idx.at(a.source_agent_turn_index);
            ModelOutput m;
            m.source_text = r.source.turns[src_pos].text;
            if (src_pos > 0 && r.source.turns[src_pos - 1].speaker == other(party)) {
                m.context = r.source.turns[src_pos - 1].text;
            }
            m.target_text = r.target.turns.at(tgt_idx.at(a.target_agent_turn_index)).text;
            m.similarity = a.similarity;
            out.emplace(SourceKey{r.source.conversation_id, r.source.segment_index, a.source_agent_turn_index},
                        std::move(m));
        }
    }
    return out;
}

}  // namespace

TaskBuildResult make_tasks(const std::map<std::string, std::vector<TransferResult>>& results_by_model, TaskKind kind,
                           const FilterConfig& filter, std::uint64_t rng_seed) {
    if (results_by_model.empty()) throw Error(ErrorKind::ModelsMisaligned, "no models given");
    std::map<std::string, std::map<SourceKey, ModelOutput>> indexed;
    for (const auto& [model, results] : results_by_model) indexed.emplace(model, index_results(results));

    const auto& reference = indexed.begin()->second;
    for (const auto& [model, outputs] : indexed) {
        if (outputs.size() != reference.size()) {
            throw Error(ErrorKind::ModelsMisaligned, "model " + model + " covers a different set of source utterances");
        }
        for (auto a = outputs.begin(), b = reference.begin(); a != outputs.end(); ++a, ++b) {
            if (a->first != b->first || a->second.source_text != b->second.source_text) {
                throw Error(ErrorKind::ModelsMisaligned, "model " + model + " was run on different source segments");
            }
        }
    }

    TaskBuildResult out;
    for (const auto& [key, ref] : reference) {
        ++out.source_utterances;
        AnnotationTask task;
        task.task_id = std::string(to_string(kind)) + ":" + std::get<0>(key) + ":" + std::to_string(std::get<1>(key)) +
                       ":" + std::to_string(std::get<2>(key));
        task.kind = kind;
        task.source_utterance = ref.source_text;
        if (kind == TaskKind::Appropriateness) task.context = ref.context;
        if (kind == TaskKind::StyleStrength) task.reference_style_examples = filter.reference_examples;

        for (const auto& [model, outputs] : indexed) {
            const auto& m = outputs.at(key);
            ++out.candidates_total;
            if (m.similarity < filter.min_similarity) {
                ++out.candidates_dropped_step1;
                continue;
            }
            task.candidates.push_back(Candidate{model, m.target_text});
        }
        if (task.candidates.empty() || task.candidates.size() < filter.min_candidates) {
            ++out.tasks_dropped_too_few;
            continue;
        }
        const bool none_changed = std::all_of(task.candidates.begin(), task.candidates.end(),
                                              [&](const Candidate& c) { return c.text == task.source_utterance; });
        const bool all_same = std::all_of(task.candidates.begin(), task.candidates.end(),
                                          [&](const Candidate& c) { return c.text == task.candidates.front().text; });
        if (none_changed || all_same) {
            ++out.tasks_dropped_step2;
            continue;
        }
        task.shuffle_seed = rng_seed ^ stable_hash(task.task_id);
        SeededRng rng(task.shuffle_seed);
        rng.shuffle(task.candidates);
        out.tasks.push_back(std::move(task));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rank statistics

RankScaleResult scale_ranks(std::span<const int> ranks) {
    const auto k = static_cast<int>(ranks.size());
    if (k < 1) throw Error(ErrorKind::RankOutOfRange, "no ranks given");
    std::vector<int> rev;
    rev.reserve(ranks.size());
    for (int r : ranks) {
        if (r < 1 || r > k) throw Error(ErrorKind::RankOutOfRange, "rank " + std::to_string(r) + " outside [1, " + std::to_string(k) + "]");
        rev.push_back(k - r + 1);
    }
    const auto [lo, hi] = std::minmax_element(rev.begin(), rev.end());
    RankScaleResult out;
    out.scaled.reserve(rev.size());
    if (*lo == *hi) {
        out.scaled.assign(rev.size(), 0.5);
        return out;
    }
    const double span = static_cast<double>(*hi - *lo);
    for (int v : rev) out.scaled.push_back(static_cast<double>(v - *lo) / span);
    return out;
}

namespace {

std::map<std::string, const AnnotationTask*> task_index(std::span<const AnnotationTask> tasks) {
    std::map<std::string, const AnnotationTask*> idx;
    for (const auto& t : tasks) idx.emplace(t.task_id, &t);
    return idx;
}

// Annotations grouped by task in task order, each group sorted by annotator id, so every aggregate
// is independent of arrival order.
std::vector<std::pair<const AnnotationTask*, std::vector<const Annotation*>>> group_by_task(
    std::span<const Annotation> annotations, std::span<const AnnotationTask> tasks) {
    const auto idx = task_index(tasks);
    std::map<std::string, std::vector<const Annotation*>> by_task;
    for (const auto& a : annotations) {
        if (!idx.contains(a.task_id)) throw Error(ErrorKind::UnknownTask, a.task_id);
        by_task[a.task_id].push_back(&a);
    }
    std::vector<std::pair<const AnnotationTask*, std::vector<const Annotation*>>> out;
    for (const auto& t : tasks) {
        auto it = by_task.find(t.task_id);
        if (it == by_task.end()) continue;
        auto group = it->second;
        std::stable_sort(group.begin(), group.end(),
                         [](const Annotation* a, const Annotation* b) { return a->annotator_id < b->annotator_id; });
        out.emplace_back(&t, std::move(group));
    }
    return out;
}

std::vector<double> fractional_ranks(std::span<const int> v) {
    std::vector<std::size_t> order(v.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> out(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        // Positions i..j (0-based) share the mean of ranks i+1..j+1.
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t p = i; p <= j; ++p) out[order[p]] = avg;
        i = j + 1;
    }
    return out;
}

}  // namespace

std::map<std::string, MeanStd> aggregate_rank_scores(std::span<const Annotation> annotations,
                                                     std::span<const AnnotationTask> tasks) {
    if (annotations.empty()) throw Error(ErrorKind::EmptyAnnotationSet, "no annotations");
    std::map<std::string, std::vector<double>> per_model;
    for (const auto& [task, group] : group_by_task(annotations, tasks)) {
        if (!is_ranking(task->kind)) continue;
        std::vector<double> sum(task->candidates.size(), 0.0);
        std::size_t n = 0;
        for (const auto* a : group) {
            validate_annotation(*a, *task);
            const auto scaled = scale_ranks(a->ranks()).scaled;
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += scaled[i];
            ++n;
        }
        for (std::size_t i = 0; i < sum.size(); ++i) {
            per_model[task->candidates[i].model_key].push_back(sum[i] / static_cast<double>(n));
        }
    }
    if (per_model.empty()) throw Error(ErrorKind::EmptyAnnotationSet, "no ranking annotations");
    std::map<std::string, MeanStd> out;
    for (const auto& [model, scores] : per_model) out.emplace(model, mean_std(scores));
    return out;
}

std::optional<double> spearman(std::span<const int> r1, std::span<const int> r2) {
    if (r1.size() != r2.size()) throw Error(ErrorKind::LengthMismatch, "rank vectors differ in length");
    if (r1.size() < 2) throw Error(ErrorKind::TooShort, "spearman needs at least two items");
    const auto a = fractional_ranks(r1);
    const auto b = fractional_ranks(r2);
    const double n = static_cast<double>(a.size());
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0;
    double va = 0.0;
    double vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return std::nullopt;
    return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

std::optional<double> rank_agreement(std::span<const Annotation> annotations, std::span<const AnnotationTask> tasks) {
    std::vector<double> per_task;
    for (const auto& [task, group] : group_by_task(annotations, tasks)) {
        if (!is_ranking(task->kind) || task->candidates.size() < 2) continue;
        std::vector<double> pair_values;
        for (std::size_t i = 0; i < group.size(); ++i) {
            for (std::size_t j = i + 1; j < group.size(); ++j) {
                if (auto rho = spearman(group[i]->ranks(), group[j]->ranks())) pair_values.push_back(*rho);
            }
        }
        if (!pair_values.empty()) per_task.push_back(mean_std(pair_values).mean);
    }
    if (per_task.empty()) return std::nullopt;
    return mean_std(per_task).mean;
}

double krippendorff_alpha(const std::vector<std::vector<std::optional<int>>>& data) {
    // Coincidence matrix over pairable units (units with at least two values).
    std::map<std::pair<int, int>, double> coincidence;
    std::map<int, double> marginals;
    double n = 0.0;
    for (const auto& unit : data) {
        std::vector<int> values;
        for (const auto& v : unit) {
            if (v) values.push_back(*v);
        }
        const auto m = values.size();
        if (m < 2) continue;
        const double w = 1.0 / static_cast<double>(m - 1);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                if (i != j) coincidence[{values[i], values[j]}] += w;
            }
        }
    }
    for (const auto& [ck, o] : coincidence) {
        marginals[ck.first] += o;
        n += o;
    }
    if (n == 0.0) throw Error(ErrorKind::NoPairableValues, "no unit has two or more values");

    double observed = 0.0;
    for (const auto& [ck, o] : coincidence) {
        if (ck.first != ck.second) observed += o;
    }
    double expected = 0.0;
    for (const auto& [c, nc] : marginals) {
        for (const auto& [k, nk] : marginals) {
            if (c != k) expected += nc * nk;
        }
    }
    if (observed == 0.0) return 1.0;
    return 1.0 - (n - 1.0) * observed / expected;
}

SimilarityLabel majority_vote(std::span<const SimilarityLabel> labels) {
    if (labels.empty()) throw Error(ErrorKind::EmptyInput, "no labels to vote on");
    std::map<SimilarityLabel, std::size_t> counts;
    for (auto l : labels) ++counts[l];
    std::size_t best = 0;
    for (const auto& [_, c] : counts) best = std::max(best, c);
    std::vector<SimilarityLabel> tied;
    for (const auto& [l, c] : counts) {
        if (c == best) tied.push_back(l);
    }
    if (tied.size() == 3) return SimilarityLabel::PartiallySimilar;
    return *std::max_element(tied.begin(), tied.end());
}

std::map<std::string, LabelSummary> aggregate_semantic_labels(std::span<const Annotation> annotations,
                                                              std::span<const AnnotationTask> tasks) {
    std::map<std::string, LabelSummary> out;
    for (const auto& [task, group] : group_by_task(annotations, tasks)) {
        if (is_ranking(task->kind)) continue;
        for (std::size_t c = 0; c < task->candidates.size(); ++c) {
            std::vector<SimilarityLabel> votes;
            for (const auto* a : group) {
                validate_annotation(*a, *task);
                votes.push_back(a->labels()[c]);
            }
            auto& summary = out[task->candidates[c].model_key];
            ++summary.majority_counts[majority_vote(votes)];
            ++summary.items;
        }
    }
    return out;
}

double label_agreement(std::span<const Annotation> annotations, std::span<const AnnotationTask> tasks) {
    std::set<std::string> annotators;
    for (const auto& a : annotations) annotators.insert(a.annotator_id);
    const std::vector<std::string> columns(annotators.begin(), annotators.end());
    std::vector<std::vector<std::optional<int>>> matrix;
    for (const auto& [task, group] : group_by_task(annotations, tasks)) {
        if (is_ranking(task->kind)) continue;
        for (std::size_t c = 0; c < task->candidates.size(); ++c) {
            std::vector<std::optional<int>> row(columns.size());
            for (const auto* a : group) {
                validate_annotation(*a, *task);
                const auto col = std::lower_bound(columns.begin(), columns.end(), a->annotator_id) - columns.begin();
                row[static_cast<std::size_t>(col)] = static_cast<int>(a->labels()[c]);
            }
            matrix.push_back(std::move(row));
        }
    }
    return krippendorff_alpha(matrix);
}

std::map<std::pair<std::string, std::string>, WinRate> pairwise_win_rates(std::span<const Annotation> annotations,
                                                                          std::span<const AnnotationTask> tasks) {
    if (annotations.empty()) throw Error(ErrorKind::EmptyAnnotationSet, "no annotations");
    std::map<std::pair<std::string, std::string>, WinRate> out;
    for (const auto& [task, group] : group_by_task(annotations, tasks)) {
        if (!is_ranking(task->kind)) continue;
        for (const auto* a : group) {
            validate_annotation(*a, *task);
            const auto& r = a->ranks();
            for (std::size_t i = 0; i < r.size(); ++i) {
                for (std::size_t j = 0; j < r.size(); ++j) {
                    if (i == j) continue;
                    auto& w = out[{task->candidates[i].model_key, task->candidates[j].model_key}];
                    ++w.comparisons;
                    if (r[i] < r[j]) ++w.wins;
                }
            }
        }
    }
    return out;
}

Json summarize_results(std::span<const Annotation> annotations, std::span<const AnnotationTask> tasks) {
    Json out = Json::object();
    for (auto kind : {TaskKind::StyleStrength, TaskKind::Appropriateness, TaskKind::SemanticCorrectness}) {
        std::vector<AnnotationTask> kind_tasks;
        for (const auto& t : tasks) {
            if (t.kind == kind) kind_tasks.push_back(t);
        }
        std::set<std::string> ids;
        for (const auto& t : kind_tasks) ids.insert(t.task_id);
        std::vector<Annotation> kind_annotations;
        for (const auto& a : annotations) {
            if (ids.contains(a.task_id)) kind_annotations.push_back(a);
        }
        if (kind_tasks.empty() || kind_annotations.empty()) continue;

        Json section = Json::object();
        if (is_ranking(kind)) {
            Json scores = Json::object();
            for (const auto& [model, s] : aggregate_rank_scores(kind_annotations, kind_tasks)) {
                scores[model] = Json{{"mean", s.mean}, {"std", s.std}, {"n", s.n}};
            }
            section["scores"] = std::move(scores);
            const auto agreement = rank_agreement(kind_annotations, kind_tasks);
            section["spearman_agreement"] = agreement ? Json(*agreement) : Json(nullptr);
            Json pairwise = Json::array();
            for (const auto& [pair, w] : pairwise_win_rates(kind_annotations, kind_tasks)) {
                pairwise.push_back(Json{{"model", pair.first},
                                        {"other", pair.second},
                                        {"wins", w.wins},
                                        {"comparisons", w.comparisons},
                                        {"percent", w.percent()}});
            }
            section["pairwise"] = std::move(pairwise);
        } else {
            Json labels = Json::object();
            for (const auto& [model, summary] : aggregate_semantic_labels(kind_annotations, kind_tasks)) {
                Json counts = Json::object();
                for (auto l : {SimilarityLabel::Similar, SimilarityLabel::PartiallySimilar, SimilarityLabel::Dissimilar}) {
                    const auto it = summary.majority_counts.find(l);
                    counts[std::string(to_string(l))] = it == summary.majority_counts.end() ? 0 : it->second;
                }
                labels[model] = Json{{"majority_counts", std::move(counts)}, {"items", summary.items}};
            }
            section["labels"] = std::move(labels);
            try {
                section["krippendorff_alpha"] = label_agreement(kind_annotations, kind_tasks);
            } catch (const Error&) {
                section["krippendorff_alpha"] = nullptr;
            }
        }
        out[std::string(to_string(kind))] = std::move(section);
    }
    return out;
}

std::string serialize_tasks(std::span<const AnnotationTask> tasks) {
    std::string out;
    for (const auto& t : tasks) out += dump_line(t.to_private_json());
    return out;
}

std::vector<AnnotationTask> parse_tasks(std::string_view text) {
    std::vector<AnnotationTask> out;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            out.push_back(AnnotationTask::from_private_json(parse_record(line, line_no)));
        } catch (const MalformedRecordError&) {
            throw;
        } catch (const Error& e) {
            throw MalformedRecordError(line_no, e.what());
        }
    }
    return out;
}

std::string serialize_annotations(std::span<const Annotation> annotations) {
    std::string out;
    for (const auto& a : annotations) out += dump_line(a.to_json());
    return out;
}

std::vector<Annotation> parse_annotations(std::string_view text) {
    std::vector<Annotation> out;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            out.push_back(Annotation::from_json(parse_record(line, line_no)));
        } catch (const MalformedRecordError&) {
            throw;
        } catch (const Error& e) {
            throw MalformedRecordError(line_no, e.what());
        }
    }
    return out;
}

}  // namespace convstyle

#include "convstyle/downstream_intent.hpp"

#include "convstyle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace convstyle {

std::string_view to_string(Split s) noexcept {
    switch (s) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
    }
    return "train";
}

std::optional<Split> parse_split(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "validation") return Split::Validation;
    if (s == "test") return Split::Test;
    return std::nullopt;
}

std::set<std::string> IntentDataset::labels() const {
    std::set<std::string> out;
    for (const auto& e : examples) out.insert(e.intent);
    return out;
}

std::vector<IntentDataset> parse_intent_file(std::string_view text) {
    std::vector<IntentDataset> out;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto j = parse_record(line, line_no);
        auto utterance = require_string(j, "utterance", line_no);
        auto intent = require_string(j, "intent", line_no);
        const StyleDomain domain(require_string(j, "style_domain", line_no));
        const auto split = parse_split(require_string(j, "split", line_no));
        if (!split) throw MalformedRecordError(line_no, "split must be train, validation or test");
        if (trim(utterance).empty()) throw MalformedRecordError(line_no, "blank utterance");
        if (intent.empty()) throw MalformedRecordError(line_no, "blank intent");

        auto it = std::find_if(out.begin(), out.end(), [&](const IntentDataset& d) {
            return d.style_domain == domain && d.split == *split;
        });
        if (it == out.end()) {
            out.push_back(IntentDataset{domain, *split, {}});
            it = std::prev(out.end());
        }
        it->examples.push_back(IntentExample{std::move(utterance), std::move(intent)});
    }
    return out;
}

std::string serialize_intent_dataset(const IntentDataset& dataset) {
    std::string out;
    for (const auto& e : dataset.examples) {
        out += dump_line(Json{{"utterance", e.utterance},
                              {"intent", e.intent},
                              {"style_domain", dataset.style_domain.name()},
                              {"split", to_string(dataset.split)}});
    }
    return out;
}

const IntentDataset& find_dataset(std::span<const IntentDataset> datasets, const StyleDomain& domain, Split split) {
    for (const auto& d : datasets) {
        if (d.style_domain == domain && d.split == split) return d;
    }
    throw Error(ErrorKind::EmptyCorpus,
                "no " + std::string(to_string(split)) + " examples for style " + domain.name());
}

IntentTransferOutcome transfer_training_set(const IntentDataset& dataset, const TransferConfig& cfg,
                                            const TransferDeps& deps, std::size_t workers) {
    if (dataset.split != Split::Train) throw Error(ErrorKind::InvalidConfig, "only a train split is restyled");
    if (cfg.party != Speaker::Customer || cfg.granularity != Granularity::Utterance) {
        throw Error(ErrorKind::InvalidConfig, "intent transfer runs on customer utterances");
    }
    std::vector<Segment> segments;
    segments.reserve(dataset.examples.size());
    for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
        segments.push_back(Segment{"intent-" + std::to_string(i), 0,
                                   {Turn::make(Speaker::Customer, dataset.examples[i].utterance)},
                                   Granularity::Utterance});
    }
    const auto records = transfer_batch(segments, cfg, deps, workers);

    IntentTransferOutcome out;
    out.dataset = dataset;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (!rec.ok()) {
            ++out.failures;
            out.failure_records.push_back(*rec.failure);
            continue;
        }
        const auto idx = party_turn_indices(rec.result->target.turns, Speaker::Customer);
        out.dataset.examples[i].utterance = rec.result->target.turns.at(idx.front()).text;
        ++out.transferred;
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

double cosine_or_zero(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

}  // namespace

CentroidIntentClassifier CentroidIntentClassifier::train(const IntentDataset& train, const EmbeddingProvider& embedder) {
    if (train.labels().size() < 2) throw Error(ErrorKind::SingleClass, "intent classifier needs at least two labels");
    std::map<std::string, std::vector<double>> sums;
    std::map<std::string, std::size_t> counts;
    for (const auto& e : train.examples) {
        const auto v = embed_text(embedder, e.utterance);
        auto& sum = sums[e.intent];
        if (sum.empty()) sum.assign(v.values.size(), 0.0);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v.values[i];
        ++counts[e.intent];
    }
    for (auto& [label, sum] : sums) {
        const double n = static_cast<double>(counts[label]);
        for (auto& x : sum) x /= n;
    }
    return CentroidIntentClassifier(embedder, std::move(sums));
}

std::string CentroidIntentClassifier::predict(std::string_view utterance) const {
    const auto v = embed_text(*embedder_, utterance);
    const std::string* best = nullptr;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (const auto& [label, centroid] : centroids_) {
        const double sim = cosine_or_zero(v.values, centroid);
        if (sim > best_sim) {
            best_sim = sim;
            best = &label;
        }
    }
    return *best;
}

std::set<std::string> CentroidIntentClassifier::labels() const {
    std::set<std::string> out;
    for (const auto& [label, _] : centroids_) out.insert(label);
    return out;
}

Json F1Report::to_json() const {
    Json classes = Json::object();
    for (const auto& [label, s] : per_class) {
        classes[label] = Json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
    }
    return Json{{"macro_f1", macro_f1},
                {"micro_f1", micro_f1},
                {"weighted_f1", weighted_f1},
                {"accuracy", accuracy},
                {"per_class", std::move(classes)}};
}

F1Report f1_report(std::span<const std::string> gold, std::span<const std::string> predicted) {
    if (gold.size() != predicted.size()) throw Error(ErrorKind::LengthMismatch, "gold and predicted differ in length");
    if (gold.empty()) throw Error(ErrorKind::EmptyInput, "no examples to score");

    struct Counts {
        std::size_t tp = 0, fp = 0, fn = 0;
    };
    std::map<std::string, Counts> counts;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i] == predicted[i]) {
            ++counts[gold[i]].tp;
            ++correct;
        } else {
            ++counts[gold[i]].fn;
            ++counts[predicted[i]].fp;
        }
    }

    F1Report r;
    const double total = static_cast<double>(gold.size());
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& [label, c] : counts) {
        ClassScores s;
        s.support = c.tp + c.fn;
        s.precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
        s.recall = s.support == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(s.support);
        s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
        r.macro_f1 += s.f1;
        r.weighted_f1 += s.f1 * static_cast<double>(s.support) / total;
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
        r.per_class.emplace(label, s);
    }
    r.macro_f1 /= static_cast<double>(counts.size());
    const double micro_p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double micro_r = static_cast<double>(tp) / static_cast<double>(tp + fn);
    r.micro_f1 = micro_p + micro_r == 0.0 ? 0.0 : 2.0 * micro_p * micro_r / (micro_p + micro_r);
    r.accuracy = static_cast<double>(correct) / total;
    return r;
}

F1Report evaluate_f1(const CentroidIntentClassifier& model, const IntentDataset& test) {
    if (test.examples.empty()) throw Error(ErrorKind::EmptyInput, "empty test set");
    const auto known = model.labels();
    std::vector<std::string> gold;
    std::vector<std::string> predicted;
    for (const auto& e : test.examples) {
        if (!known.contains(e.intent)) throw Error(ErrorKind::UnknownLabel, "test label " + e.intent + " unseen in training");
        gold.push_back(e.intent);
        predicted.push_back(model.predict(e.utterance));
    }
    return f1_report(gold, predicted);
}

// ---------------------------------------------------------------------------

double paired_permutation_p_value(std::span<const double> differences, std::uint64_t seed) {
    const auto n = differences.size();
    if (n == 0) throw Error(ErrorKind::EmptyInput, "no paired differences");
    double observed = 0.0;
    for (double d : differences) observed += d;
    observed = std::abs(observed);
    // Sums that equal the observed one up to rounding count as extreme.
    const double tolerance = 1e-12 * (1.0 + observed);

    auto flipped_sum = [&](auto&& sign_of) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += sign_of(i) ? -differences[i] : differences[i];
        return std::abs(s);
    };

    if (n <= 20) {
        const std::uint64_t total = std::uint64_t{1} << n;
        std::uint64_t extreme = 0;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            if (flipped_sum([&](std::size_t i) { return (mask >> i) & 1U; }) >= observed - tolerance) ++extreme;
        }
        return static_cast<double>(extreme) / static_cast<double>(total);
    }

    constexpr std::size_t kDraws = 100000;
    SeededRng rng(seed);
    std::size_t extreme = 1;  // the observed assignment itself
    for (std::size_t k = 0; k < kDraws; ++k) {
        std::vector<bool> signs(n);
        for (std::size_t i = 0; i < n; ++i) signs[i] = rng.below(2) == 1;
        if (flipped_sum([&](std::size_t i) { return signs[i]; }) >= observed - tolerance) ++extreme;
    }
    return static_cast<double>(extreme) / static_cast<double>(kDraws + 1);
}

Json DownstreamReport::to_json() const {
    Json rs = Json::array();
    for (const auto& r : runs) {
        rs.push_back(Json{{"seed", r.seed}, {"original", r.original.to_json()}, {"transferred", r.transferred.to_json()}});
    }
    auto ms = [](const MeanStd& m) { return Json{{"mean", m.mean}, {"std", m.std}, {"n", m.n}}; };
    return Json{{"runs", std::move(rs)},
                {"original_macro_f1", ms(original_macro)},
                {"transferred_macro_f1", ms(transferred_macro)},
                {"mean_difference", mean_difference},
                {"p_value", p_value}};
}

DownstreamReport compare_downstream(const IntentDataset& original_train, const IntentDataset& transferred_train,
                                    const IntentDataset& test, const EmbeddingProvider& embedder,
                                    const DownstreamConfig& cfg) {
    if (original_train.examples.size() != transferred_train.examples.size()) {
        throw Error(ErrorKind::LengthMismatch, "original and transferred training sets differ in size");
    }
    for (std::size_t i = 0; i < original_train.examples.size(); ++i) {
        if (original_train.examples[i].intent != transferred_train.examples[i].intent) {
            throw Error(ErrorKind::InvalidConfig, "training sets are not index-aligned");
        }
    }
    if (cfg.repeats == 0 || !(cfg.train_fraction > 0.0 && cfg.train_fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "repeats must be positive and train_fraction in (0, 1]");
    }
    // Subsampling is stratified so every label keeps at least one example.
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < original_train.examples.size(); ++i) {
        by_label[original_train.examples[i].intent].push_back(i);
    }

    DownstreamReport report;
    std::vector<double> orig_macro;
    std::vector<double> xfer_macro;
    std::vector<double> diffs;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t seed = cfg.seed + r;
        SeededRng rng(seed);
        std::vector<std::size_t> idx;
        for (const auto& [label, members] : by_label) {
            const auto take = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(cfg.train_fraction * static_cast<double>(members.size()))));
            for (auto k : rng.sample_without_replacement(members.size(), take)) idx.push_back(members[k]);
        }
        std::sort(idx.begin(), idx.end());
        IntentDataset a{original_train.style_domain, Split::Train, {}};
        IntentDataset b{transferred_train.style_domain, Split::Train, {}};
        for (auto i : idx) {
            a.examples.push_back(original_train.examples[i]);
            b.examples.push_back(transferred_train.examples[i]);
        }
        DownstreamRun run{seed, evaluate_f1(CentroidIntentClassifier::train(a, embedder), test),
                          evaluate_f1(CentroidIntentClassifier::train(b, embedder), test)};
        orig_macro.push_back(run.original.macro_f1);
        xfer_macro.push_back(run.transferred.macro_f1);
        diffs.push_back(run.transferred.macro_f1 - run.original.macro_f1);
        report.runs.push_back(std::move(run));
    }
    report.original_macro = mean_std(orig_macro);
    report.transferred_macro = mean_std(xfer_macro);
    report.mean_difference = mean_std(diffs).mean;
    report.p_value = paired_permutation_p_value(diffs, cfg.seed);
    return report;
}

}  // namespace convstyle

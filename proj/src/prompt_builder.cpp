#include "convstyle/prompt_builder.hpp"

#include "convstyle/error.hpp"
#include "convstyle/util.hpp"

namespace convstyle {

void PromptTemplate::validate() const {
    auto require = [](const std::string& v, const char* name) {
        if (v.empty()) throw Error(ErrorKind::InvalidTemplate, std::string(name) + " is empty");
    };
    require(reduction_header, "reduction_header");
    require(injection_header, "injection_header");
    require(example_separator, "example_separator");
    require(input_marker, "input_marker");
    require(output_marker, "output_marker");
    require(stop_sequence, "stop_sequence");
    if (stop_sequence != example_separator) {
        throw Error(ErrorKind::InvalidTemplate, "stop_sequence must equal example_separator");
    }
    for (const auto* field : {&reduction_header, &injection_header, &input_marker, &output_marker}) {
        if (field->find(example_separator) != std::string::npos) {
            throw Error(ErrorKind::InvalidTemplate, "template text contains the example separator");
        }
    }
    if (input_marker.find('\n') != std::string::npos || output_marker.find('\n') != std::string::npos) {
        throw Error(ErrorKind::InvalidTemplate, "markers must be single-line");
    }
}

namespace {

enum class Step { Reduction, Injection };

PromptText build(Step step, std::span<const ExemplarPair> exemplars, const Segment& input,
                 const PromptTemplate& tmpl) {
    tmpl.validate();
    if (exemplars.empty()) throw Error(ErrorKind::EmptyExemplars, "prompt needs at least one exemplar");
    for (const auto& ex : exemplars) {
        if (ex.granularity != input.granularity) {
            throw Error(ErrorKind::GranularityMismatch,
                        "exemplar is " + std::string(to_string(ex.granularity)) + ", input is " +
                            std::string(to_string(input.granularity)));
        }
    }

    std::string text = step == Step::Reduction ? tmpl.reduction_header : tmpl.injection_header;
    text += "\n\n";
    for (const auto& ex : exemplars) {
        const auto& from = step == Step::Reduction ? ex.styled : ex.style_free;
        const auto& to = step == Step::Reduction ? ex.style_free : ex.styled;
        text += tmpl.input_marker + "\n" + render_transcript(from) + "\n";
        text += tmpl.output_marker + "\n" + render_transcript(to);
        text += tmpl.example_separator;
    }
    text += tmpl.input_marker + "\n" + render_transcript(input) + "\n";
    text += tmpl.output_marker + "\n";
    return PromptText{std::move(text), tmpl.stop_sequence, input.granularity};
}

struct TaggedLine {
    Speaker speaker;
    std::string text;
};

std::optional<TaggedLine> match_tag(std::string_view line) {
    line = trim(line);
    for (auto [tag, speaker] : {std::pair{std::string_view("[Customer]"), Speaker::Customer},
                                std::pair{std::string_view("[Agent]"), Speaker::Agent}}) {
        if (line.substr(0, tag.size()) == tag) {
            const auto rest = trim(line.substr(tag.size()));
            if (rest.empty()) return std::nullopt;
            return TaggedLine{speaker, std::string(rest)};
        }
    }
    return std::nullopt;
}

}  // namespace

PromptText build_reduction_prompt(std::span<const ExemplarPair> exemplars, const Segment& input,
                                  const PromptTemplate& tmpl) {
    return build(Step::Reduction, exemplars, input, tmpl);
}

PromptText build_injection_prompt(std::span<const ExemplarPair> exemplars, const Segment& input,
                                  const PromptTemplate& tmpl) {
    return build(Step::Injection, exemplars, input, tmpl);
}

std::optional<std::string> extract_input_transcript(std::string_view prompt, const PromptTemplate& tmpl) {
    const std::string tail = "\n" + tmpl.output_marker + "\n";
    if (prompt.size() < tail.size() || prompt.substr(prompt.size() - tail.size()) != tail) return std::nullopt;
    const auto body_end = prompt.size() - tail.size();
    const std::string head = tmpl.input_marker + "\n";
    const auto pos = prompt.rfind(head, body_end);
    if (pos == std::string_view::npos) return std::nullopt;
    const auto start = pos + head.size();
    if (start > body_end) return std::nullopt;
    return std::string(prompt.substr(start, body_end - start));
}

Segment parse_completion(std::string_view raw, Granularity granularity,
                         const std::optional<std::vector<Speaker>>& /*expected_speakers*/, Speaker party) {
    std::vector<Turn> turns;
    bool pending_blank = false;
    for (auto line : split_lines(raw)) {
        const auto tagged = match_tag(line);
        if (turns.empty()) {
            if (tagged) turns.push_back(Turn{tagged->speaker, tagged->text});
            continue;
        }
        if (tagged) {
            turns.push_back(Turn{tagged->speaker, tagged->text});
            pending_blank = false;
            continue;
        }
        if (trim(line).empty() && !pending_blank) {
            pending_blank = true;
            continue;
        }
        break;
    }
    if (turns.empty()) throw Error(ErrorKind::NoParseableTurns, "completion has no tagged turns");

    Segment out;
    out.granularity = granularity;
    if (granularity == Granularity::Utterance) {
        const auto idx = party_turn_indices(turns, party);
        if (idx.empty()) {
            throw Error(ErrorKind::NoAgentTurn,
                        std::string("utterance completion has no ") + std::string(to_string(party)) + " turn");
        }
        out.turns.push_back(turns[idx.front()]);
    } else {
        out.turns = std::move(turns);
    }
    return out;
}

}  // namespace convstyle

#include "convstyle/dialogue.hpp"

#include "convstyle/error.hpp"
#include "convstyle/json_io.hpp"
#include "convstyle/util.hpp"

#include <istream>
#include <sstream>
#include <unordered_set>

namespace convstyle {

std::string_view to_string(Speaker s) noexcept {
    return s == Speaker::Customer ? "customer" : "agent";
}

std::optional<Speaker> parse_speaker(std::string_view s) {
    const auto lower = to_lower_ascii(s);
    if (lower == "customer") return Speaker::Customer;
    if (lower == "agent") return Speaker::Agent;
    return std::nullopt;
}

Speaker other(Speaker s) noexcept {
    return s == Speaker::Customer ? Speaker::Agent : Speaker::Customer;
}

namespace {

// Collapses every run of CR/LF characters into one space so a turn always renders on one line.
std::string flatten_newlines(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_break = false;
    for (char c : text) {
        if (c == '\n' || c == '\r') {
            if (!in_break) out.push_back(' ');
            in_break = true;
        } else {
            out.push_back(c);
            in_break = false;
        }
    }
    return out;
}

}  // namespace

Turn Turn::make(Speaker speaker, std::string_view text) {
    const auto flat = flatten_newlines(text);
    const auto trimmed = trim(flat);
    if (trimmed.empty()) throw Error(ErrorKind::EmptyTurn, "turn text is blank");
    return Turn{speaker, std::string(trimmed)};
}

std::string_view to_string(Granularity g) noexcept {
    switch (g) {
        case Granularity::Utterance: return "utterance";
        case Granularity::TwoTurn: return "two_turn";
        case Granularity::LongWindow: return "long_window";
    }
    return "utterance";
}

std::optional<Granularity> parse_granularity(std::string_view s) {
    if (s == "utterance") return Granularity::Utterance;
    if (s == "two_turn") return Granularity::TwoTurn;
    if (s == "long_window") return Granularity::LongWindow;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON encodings

Json parse_record(std::string_view line, std::size_t line_no) {
    Json j;
    try {
        j = Json::parse(line);
    } catch (const Json::exception& e) {
        throw MalformedRecordError(line_no, e.what());
    }
    if (!j.is_object()) throw MalformedRecordError(line_no, "record is not an object");
    return j;
}

std::string require_string(const Json& j, const char* key, std::size_t line_no) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        throw MalformedRecordError(line_no, std::string("missing string field \"") + key + "\"");
    }
    return it->get<std::string>();
}

Json turns_to_json(std::span<const Turn> turns) {
    Json arr = Json::array();
    for (const auto& t : turns) {
        arr.push_back(Json{{"speaker", to_string(t.speaker)}, {"text", t.text}});
    }
    return arr;
}

namespace {

std::vector<Turn> turns_from_json_at(const Json& j, std::size_t line_no, const WarningSink& warn) {
    if (!j.is_array()) throw MalformedRecordError(line_no, "\"turns\" is not an array");
    std::vector<Turn> turns;
    turns.reserve(j.size());
    for (const auto& t : j) {
        if (!t.is_object()) throw MalformedRecordError(line_no, "turn is not an object");
        const auto speaker_text = require_string(t, "speaker", line_no);
        const auto speaker = parse_speaker(speaker_text);
        if (!speaker) throw MalformedRecordError(line_no, "unknown speaker \"" + speaker_text + "\"");
        const auto text = require_string(t, "text", line_no);
        if (warn && text.find_first_of("\r\n") != std::string::npos) {
            warn("line " + std::to_string(line_no) + ": newline inside turn text replaced by a space");
        }
        turns.push_back(Turn::make(*speaker, text));
    }
    return turns;
}

}  // namespace

std::vector<Turn> turns_from_json(const Json& j, const WarningSink& warn) {
    return turns_from_json_at(j, 0, warn);
}

Json segment_to_json(const Segment& s) {
    return Json{{"conversation_id", s.conversation_id},
                {"segment_index", s.segment_index},
                {"granularity", to_string(s.granularity)},
                {"turns", turns_to_json(s.turns)}};
}

namespace {

Segment segment_from_json_at(const Json& j, std::size_t line_no, const WarningSink& warn) {
    Segment s;
    s.conversation_id = require_string(j, "conversation_id", line_no);
    auto idx = j.find("segment_index");
    if (idx == j.end() || !idx->is_number_unsigned()) {
        throw MalformedRecordError(line_no, "missing unsigned field \"segment_index\"");
    }
    s.segment_index = idx->get<std::size_t>();
    const auto g = parse_granularity(require_string(j, "granularity", line_no));
    if (!g) throw MalformedRecordError(line_no, "unknown granularity");
    s.granularity = *g;
    auto turns = j.find("turns");
    if (turns == j.end()) throw MalformedRecordError(line_no, "missing \"turns\"");
    s.turns = turns_from_json_at(*turns, line_no, warn);
    if (s.turns.empty()) throw MalformedRecordError(line_no, "segment has no turns");
    return s;
}

}  // namespace

Segment segment_from_json(const Json& j, const WarningSink& warn) {
    return segment_from_json_at(j, 0, warn);
}

std::string serialize_segments(std::span<const Segment> segments) {
    std::string out;
    for (const auto& s : segments) out += dump_line(segment_to_json(s));
    return out;
}

std::vector<Segment> parse_segments(std::string_view text, const WarningSink& warn) {
    std::vector<Segment> out;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        out.push_back(segment_from_json_at(parse_record(line, line_no), line_no, warn));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Corpus ingestion

Corpus parse_corpus(std::string_view text, const StyleDomain& style, const WarningSink& warn) {
    Corpus corpus;
    corpus.style_domain = style;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto j = parse_record(line, line_no);
        Conversation conv;
        conv.id = require_string(j, "conversation_id", line_no);
        conv.style_domain = style;
        if (auto sd = j.find("style_domain"); sd != j.end()) {
            if (!sd->is_string()) throw MalformedRecordError(line_no, "\"style_domain\" is not a string");
            if (sd->get<std::string>() != style.name()) {
                throw MalformedRecordError(line_no, "style_domain \"" + sd->get<std::string>() +
                                                        "\" does not match corpus style \"" +
                                                        style.name() + "\"");
            }
        }
        auto turns = j.find("turns");
        if (turns == j.end()) throw MalformedRecordError(line_no, "missing \"turns\"");
        conv.turns = turns_from_json_at(*turns, line_no, warn);
        if (conv.turns.empty()) throw MalformedRecordError(line_no, "conversation has no turns");
        if (!seen.insert(conv.id).second) {
            throw Error(ErrorKind::DuplicateId, "conversation id \"" + conv.id + "\" repeated");
        }
        corpus.conversations.push_back(std::move(conv));
    }
    return corpus;
}

Corpus parse_corpus(std::istream& in, const StyleDomain& style, const WarningSink& warn) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_corpus(ss.str(), style, warn);
}

std::string serialize_corpus(const Corpus& corpus) {
    std::string out;
    for (const auto& c : corpus.conversations) {
        out += dump_line(Json{{"conversation_id", c.id},
                              {"style_domain", c.style_domain.name()},
                              {"turns", turns_to_json(c.turns)}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Segmentation

std::vector<std::size_t> party_turn_indices(std::span<const Turn> turns, Speaker party) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < turns.size(); ++i) {
        if (turns[i].speaker == party) out.push_back(i);
    }
    return out;
}

std::vector<Segment> segment_conversation(const Conversation& conv, Granularity granularity,
                                          Speaker party) {
    std::vector<Segment> out;
    auto emit = [&](std::vector<Turn> turns) {
        out.push_back(Segment{conv.id, out.size(), std::move(turns), granularity});
    };
    const auto& turns = conv.turns;
    switch (granularity) {
        case Granularity::Utterance:
            for (auto i : party_turn_indices(turns, party)) emit({turns[i]});
            break;
        case Granularity::TwoTurn:
            for (auto i : party_turn_indices(turns, party)) {
                if (i > 0 && turns[i - 1].speaker == other(party)) {
                    emit({turns[i - 1], turns[i]});
                } else {
                    emit({turns[i]});
                }
            }
            break;
        case Granularity::LongWindow: {
            constexpr std::size_t kBlock = 4;
            const std::size_t n = turns.size();
            std::size_t start = 0;
            while (start < n) {
                std::size_t end = std::min(start + kBlock, n);
                // A single leftover turn joins the block before it.
                if (n - end == 1) end = n;
                emit(std::vector<Turn>(turns.begin() + static_cast<std::ptrdiff_t>(start),
                                       turns.begin() + static_cast<std::ptrdiff_t>(end)));
                start = end;
            }
            break;
        }
    }
    return out;
}

void validate_segment(const Segment& s, Speaker party) {
    auto fail = [&](const std::string& why) {
        throw Error(ErrorKind::MalformedRecord, "segment " + s.conversation_id + "#" +
                                                    std::to_string(s.segment_index) + ": " + why);
    };
    const auto n = s.turns.size();
    switch (s.granularity) {
        case Granularity::Utterance:
            if (n != 1) fail("utterance segment must have exactly 1 turn");
            if (s.turns[0].speaker != party) fail("utterance segment turn has the wrong speaker");
            break;
        case Granularity::TwoTurn:
            if (n < 1 || n > 2) fail("two-turn segment must have 1 or 2 turns");
            if (s.turns.back().speaker != party) fail("two-turn segment must end with the transferred party");
            if (n == 2 && s.turns.front().speaker != other(party)) fail("two-turn segment must alternate speakers");
            break;
        case Granularity::LongWindow:
            // A one-turn conversation is its own single window.
            if (n < 1 || n > 5) fail("long-window segment must have 1..5 turns");
            break;
    }
    for (const auto& t : s.turns) {
        if (trim(t.text).empty()) throw Error(ErrorKind::EmptyTurn, "blank turn in segment");
    }
}

// ---------------------------------------------------------------------------
// Transcript rendering

std::string render_transcript(std::span<const Turn> turns) {
    std::string out;
    for (std::size_t i = 0; i < turns.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out += turns[i].speaker == Speaker::Customer ? "[Customer] " : "[Agent] ";
        out += turns[i].text;
    }
    return out;
}

}  // namespace convstyle

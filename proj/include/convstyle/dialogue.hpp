#pragma once

#include <compare>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace convstyle {

enum class Speaker { Customer, Agent };

std::string_view to_string(Speaker s) noexcept;
/// Case-insensitive "customer" / "agent".
std::optional<Speaker> parse_speaker(std::string_view s);
Speaker other(Speaker s) noexcept;

/// Name of a style domain ("H1", "B", ...). STYLE_FREE is reserved for the pivot.
class StyleDomain {
public:
    StyleDomain() = default;
    explicit StyleDomain(std::string name) : name_(std::move(name)) {}

    static StyleDomain style_free() { return StyleDomain(std::string(kStyleFree)); }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] bool is_style_free() const noexcept { return name_ == kStyleFree; }

    auto operator<=>(const StyleDomain&) const = default;

    static constexpr std::string_view kStyleFree = "STYLE_FREE";

private:
    std::string name_;
};

struct Turn {
    Speaker speaker = Speaker::Agent;
    std::string text;

    /// Trims `text`; throws Error(EmptyTurn) when nothing is left.
    static Turn make(Speaker speaker, std::string_view text);

    bool operator==(const Turn&) const = default;
};

enum class Granularity { Utterance, TwoTurn, LongWindow };

std::string_view to_string(Granularity g) noexcept;
std::optional<Granularity> parse_granularity(std::string_view s);

struct Conversation {
    std::string id;
    StyleDomain style_domain;
    std::vector<Turn> turns;

    bool operator==(const Conversation&) const = default;
};

struct Segment {
    std::string conversation_id;
    std::size_t segment_index = 0;
    std::vector<Turn> turns;
    Granularity granularity = Granularity::Utterance;

    bool operator==(const Segment&) const = default;
};

struct Corpus {
    StyleDomain style_domain;
    std::vector<Conversation> conversations;
};

/// Receives non-fatal ingestion diagnostics (e.g. a newline replaced inside a turn).
using WarningSink = std::function<void(const std::string&)>;

/// Reads newline-delimited conversation records. Record order and turn order are preserved.
/// Throws MalformedRecordError, Error(EmptyTurn) or Error(DuplicateId).
Corpus parse_corpus(std::istream& in, const StyleDomain& style, const WarningSink& warn = {});
Corpus parse_corpus(std::string_view text, const StyleDomain& style, const WarningSink& warn = {});

/// One record per line, speakers lower-case, trailing newline after each record.
std::string serialize_corpus(const Corpus& corpus);

/// Splits a conversation into transfer units. `party` is the side whose turns are transferred;
/// agent-side transfer is the default, the downstream intent protocol uses Customer.
std::vector<Segment> segment_conversation(const Conversation& conv, Granularity granularity,
                                          Speaker party = Speaker::Agent);

/// Checks the per-granularity shape rules for a segment produced from source data.
/// Throws Error(MalformedRecord) describing the first violation.
void validate_segment(const Segment& segment, Speaker party = Speaker::Agent);

/// "[Customer] text" / "[Agent] text", one line per turn, no trailing newline.
std::string render_transcript(std::span<const Turn> turns);
inline std::string render_transcript(const Segment& s) { return render_transcript(s.turns); }
inline std::string render_transcript(const Conversation& c) { return render_transcript(c.turns); }

/// Indices into `turns` of every turn spoken by `party`, in order.
std::vector<std::size_t> party_turn_indices(std::span<const Turn> turns, Speaker party);

}  // namespace convstyle

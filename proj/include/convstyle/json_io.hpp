#pragma once

// JSON encodings of the dialogue types shared by every file format in the toolkit.

#include "convstyle/dialogue.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace convstyle {

using Json = nlohmann::json;

Json turns_to_json(std::span<const Turn> turns);
/// `where` is used in error messages only.
std::vector<Turn> turns_from_json(const Json& j, const WarningSink& warn = {});

Json segment_to_json(const Segment& s);
Segment segment_from_json(const Json& j, const WarningSink& warn = {});

/// Newline-delimited segment files.
std::string serialize_segments(std::span<const Segment> segments);
std::vector<Segment> parse_segments(std::string_view text, const WarningSink& warn = {});

/// Parses one JSON line; throws MalformedRecordError(line_no) on syntax errors or non-objects.
Json parse_record(std::string_view line, std::size_t line_no);

/// Fetches a required string field or throws MalformedRecordError(line_no).
std::string require_string(const Json& j, const char* key, std::size_t line_no);

/// Compact dump; keys are sorted by nlohmann's default object type, so output is byte-stable.
inline std::string dump_line(const Json& j) { return j.dump() + "\n"; }

}  // namespace convstyle

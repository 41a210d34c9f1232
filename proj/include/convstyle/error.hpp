#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace convstyle {

enum class ErrorKind {
    // dialogue-core
    MalformedRecord,
    EmptyTurn,
    DuplicateId,
    // embedding
    EmptyInput,
    ProviderUnavailable,
    DimensionMismatch,
    ZeroVector,
    NoSuchPartyTurns,
    // exemplar-store
    TurnCountMismatch,
    SpeakerSequenceMismatch,
    KTooLarge,
    NoAgentTurnsInQuery,
    // prompt-builder
    GranularityMismatch,
    EmptyExemplars,
    NoParseableTurns,
    NoAgentTurn,
    InvalidTemplate,
    // llm-gateway
    EndpointError,
    Timeout,
    ScriptMiss,
    // transfer-pipeline
    ParseFailure,
    NoAgentTurns,
    InvalidConfig,
    MissingExemplars,
    // style-analytics
    EmptyCorpus,
    SingleDomain,
    // auto-eval
    DegenerateVocabulary,
    DirectionMismatch,
    // human-eval
    ModelsMisaligned,
    RankOutOfRange,
    UnknownTask,
    EmptyAnnotationSet,
    LengthMismatch,
    TooShort,
    NoPairableValues,
    InvalidAnnotation,
    // downstream-intent
    SingleClass,
    UnknownLabel,
    // io
    IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure surfaced by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// MalformedRecord with the offending 1-based line number attached.
class MalformedRecordError : public Error {
public:
    MalformedRecordError(std::size_t line_no, const std::string& detail)
        : Error(ErrorKind::MalformedRecord, "line " + std::to_string(line_no) + ": " + detail),
          line_no_(line_no) {}

    [[nodiscard]] std::size_t line_no() const noexcept { return line_no_; }

private:
    std::size_t line_no_;
};

/// Errors tied to a position in an exemplar file (pair_index is 0-based).
class PairError : public Error {
public:
    PairError(ErrorKind kind, std::size_t pair_index)
        : Error(kind, "pair " + std::to_string(pair_index)), pair_index_(pair_index) {}

    [[nodiscard]] std::size_t pair_index() const noexcept { return pair_index_; }

private:
    std::size_t pair_index_;
};

class EndpointFailure : public Error {
public:
    EndpointFailure(int status, const std::string& detail)
        : Error(ErrorKind::EndpointError, "status " + std::to_string(status) + ": " + detail),
          status_(status) {}

    [[nodiscard]] int status() const noexcept { return status_; }

private:
    int status_;
};

/// A completion that could not be parsed into turns. The raw text is kept for audit.
class ParseFailureError : public Error {
public:
    ParseFailureError(std::string raw, const std::string& cause)
        : Error(ErrorKind::ParseFailure, cause), raw_(std::move(raw)) {}

    [[nodiscard]] const std::string& raw_completion() const noexcept { return raw_; }

private:
    std::string raw_;
};

}  // namespace convstyle

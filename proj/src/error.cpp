#include "convstyle/error.hpp"

namespace convstyle {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MalformedRecord: return "MalformedRecord";
        case ErrorKind::EmptyTurn: return "EmptyTurn";
        case ErrorKind::DuplicateId: return "DuplicateId";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::ZeroVector: return "ZeroVector";
        case ErrorKind::NoSuchPartyTurns: return "NoSuchPartyTurns";
        case ErrorKind::TurnCountMismatch: return "TurnCountMismatch";
        case ErrorKind::SpeakerSequenceMismatch: return "SpeakerSequenceMismatch";
        case ErrorKind::KTooLarge: return "KTooLarge";
        case ErrorKind::NoAgentTurnsInQuery: return "NoAgentTurnsInQuery";
        case ErrorKind::GranularityMismatch: return "GranularityMismatch";
        case ErrorKind::EmptyExemplars: return "EmptyExemplars";
        case ErrorKind::NoParseableTurns: return "NoParseableTurns";
        case ErrorKind::NoAgentTurn: return "NoAgentTurn";
        case ErrorKind::InvalidTemplate: return "InvalidTemplate";
        case ErrorKind::EndpointError: return "EndpointError";
        case ErrorKind::Timeout: return "Timeout";
        case ErrorKind::ScriptMiss: return "ScriptMiss";
        case ErrorKind::ParseFailure: return "ParseFailure";
        case ErrorKind::NoAgentTurns: return "NoAgentTurns";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::MissingExemplars: return "MissingExemplars";
        case ErrorKind::EmptyCorpus: return "EmptyCorpus";
        case ErrorKind::SingleDomain: return "SingleDomain";
        case ErrorKind::DegenerateVocabulary: return "DegenerateVocabulary";
        case ErrorKind::DirectionMismatch: return "DirectionMismatch";
        case ErrorKind::ModelsMisaligned: return "ModelsMisaligned";
        case ErrorKind::RankOutOfRange: return "RankOutOfRange";
        case ErrorKind::UnknownTask: return "UnknownTask";
        case ErrorKind::EmptyAnnotationSet: return "EmptyAnnotationSet";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::TooShort: return "TooShort";
        case ErrorKind::NoPairableValues: return "NoPairableValues";
        case ErrorKind::InvalidAnnotation: return "InvalidAnnotation";
        case ErrorKind::SingleClass: return "SingleClass";
        case ErrorKind::UnknownLabel: return "UnknownLabel";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace convstyle

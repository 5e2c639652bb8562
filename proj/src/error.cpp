#include "seqfeat/error.hpp"

namespace seqfeat {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::EmptyName: return "EmptyName";
    case ErrorCode::ReservedCharacterInName: return "ReservedCharacterInName";
    case ErrorCode::NonMonotonicIndex: return "NonMonotonicIndex";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownSeries: return "UnknownSeries";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::NonPositiveWindow: return "NonPositiveWindow";
    case ErrorCode::NonPositiveStride: return "NonPositiveStride";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::DisjointSpans: return "DisjointSpans";
    case ErrorCode::DuplicateFeature: return "DuplicateFeature";
    case ErrorCode::InvalidDescriptor: return "InvalidDescriptor";
    case ErrorCode::EmptyAxis: return "EmptyAxis";
    case ErrorCode::ReservedCharacter: return "ReservedCharacter";
    case ErrorCode::MalformedName: return "MalformedName";
    case ErrorCode::FunctionFailure: return "FunctionFailure";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::NonFloatOutput: return "NonFloatOutput";
    case ErrorCode::UnknownBuiltin: return "UnknownBuiltin";
    case ErrorCode::BadParam: return "BadParam";
    case ErrorCode::NotSerializable: return "NotSerializable";
    case ErrorCode::DynamicStepUnresolvable: return "DynamicStepUnresolvable";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::OverlappingOutputs: return "OverlappingOutputs";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateHeader: return "DuplicateHeader";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

} // namespace seqfeat

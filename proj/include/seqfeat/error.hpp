#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seqfeat {

enum class ErrorCode {
    // series
    EmptyName,
    ReservedCharacterInName,
    NonMonotonicIndex,
    LengthMismatch,
    KindMismatch,
    TooShort,
    InvalidRange,
    DuplicateName,
    UnknownSeries,
    TypeMismatch,
    // segmentation
    NonPositiveWindow,
    NonPositiveStride,
    EmptySeries,
    DisjointSpans,
    // features
    DuplicateFeature,
    InvalidDescriptor,
    EmptyAxis,
    ReservedCharacter,
    MalformedName,
    FunctionFailure,
    UnknownColumn,
    NonFloatOutput,
    UnknownBuiltin,
    BadParam,
    NotSerializable,
    // processing
    DynamicStepUnresolvable,
    StepFailure,
    OverlappingOutputs,
    // chunking
    BadSpec,
    // io
    ParseError,
    DuplicateHeader,
    IoError,
    ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `code()` identifies the failure class;
/// `what()` names the offending series/column/row where one exists.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace seqfeat

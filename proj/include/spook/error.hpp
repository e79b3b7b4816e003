#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spook {

struct SourceLocation {
    std::string file;
    int line = 0;
    int column = 0;

    std::string str() const;
    bool operator==(const SourceLocation&) const = default;
};

enum class ErrorCode {
    SyntaxError,
    DuplicateName,
    UnknownReference,
    UnknownAttribute,
    UnknownInstance,
    NonSimpleChain,
    IncompatibleOverride,
    BadValue,
    InvalidKB,
    CycleDetected,
    CyclicLocalOrder,
    RecursionDepthExceeded,
    ImpossibleEvidence,
    InputHasCPD,
    StateSpaceTooLarge,
    NaiveCapExceeded,
    RangeMismatch,
    Unsupported,
    ContradictoryEvidence,
    UnknownKB,
    UnknownSession,
    NotFound,
    Timeout,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library. Carries a stable code for the
/// service layer and, for source-level problems, the offending location.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message,
          std::optional<SourceLocation> location = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    const std::optional<SourceLocation>& location() const noexcept { return location_; }
    const std::string& message() const noexcept { return message_; }

    /// `file:line:col: message` when located, otherwise just the message.
    std::string diagnostic() const;

private:
    ErrorCode code_;
    std::string message_;
    std::optional<SourceLocation> location_;
};

}  // namespace spook

#include "spook/error.hpp"

namespace spook {

std::string SourceLocation::str() const {
    return (file.empty() ? std::string("<input>") : file) + ":" + std::to_string(line) + ":" +
           std::to_string(column);
}

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::DuplicateName: return "DuplicateName";
        case ErrorCode::UnknownReference: return "UnknownReference";
        case ErrorCode::UnknownAttribute: return "UnknownAttribute";
        case ErrorCode::UnknownInstance: return "UnknownInstance";
        case ErrorCode::NonSimpleChain: return "NonSimpleChain";
        case ErrorCode::IncompatibleOverride: return "IncompatibleOverride";
        case ErrorCode::BadValue: return "BadValue";
        case ErrorCode::InvalidKB: return "InvalidKB";
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::CyclicLocalOrder: return "CyclicLocalOrder";
        case ErrorCode::RecursionDepthExceeded: return "RecursionDepthExceeded";
        case ErrorCode::ImpossibleEvidence: return "ImpossibleEvidence";
        case ErrorCode::InputHasCPD: return "InputHasCPD";
        case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
        case ErrorCode::NaiveCapExceeded: return "NaiveCapExceeded";
        case ErrorCode::RangeMismatch: return "RangeMismatch";
        case ErrorCode::Unsupported: return "Unsupported";
        case ErrorCode::ContradictoryEvidence: return "ContradictoryEvidence";
        case ErrorCode::UnknownKB: return "UnknownKB";
        case ErrorCode::UnknownSession: return "UnknownSession";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::Timeout: return "Timeout";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<SourceLocation> location)
    : std::runtime_error(location ? location->str() + ": " + message : message),
      code_(code),
      message_(message),
      location_(std::move(location)) {}

std::string Error::diagnostic() const {
    return location_ ? location_->str() + ": " + message_ : message_;
}

}  // namespace spook

#include "lpvembed/error.hpp"

namespace lpvembed {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnsupportedFunction: return "UnsupportedFunction";
        case ErrorCode::NonAffineFunctionArgument: return "NonAffineFunctionArgument";
        case ErrorCode::NegativeExponent: return "NegativeExponent";
        case ErrorCode::ArityMismatch: return "ArityMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonzeroDzw: return "NonzeroDzw";
        case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
        case ErrorCode::ExpressionArityMismatch: return "ExpressionArityMismatch";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::NonzeroAtOrigin: return "NonzeroAtOrigin";
        case ErrorCode::InvalidOrdering: return "InvalidOrdering";
        case ErrorCode::SingularA: return "SingularA";
        case ErrorCode::EigenvalueFailure: return "EigenvalueFailure";
        case ErrorCode::ColumnSpaceViolation: return "ColumnSpaceViolation";
        case ErrorCode::EmbeddingDegenerate: return "EmbeddingDegenerate";
        case ErrorCode::ChannelCountMismatch: return "ChannelCountMismatch";
        case ErrorCode::Divergence: return "Divergence";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NyquistViolation: return "NyquistViolation";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::UnknownExample: return "UnknownExample";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

ParseError::ParseError(ErrorCode code, std::size_t position, const std::string& message)
    : Error(code, message + " (at position " + std::to_string(position) + ")"), position_(position) {}

}  // namespace lpvembed

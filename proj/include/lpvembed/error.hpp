#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lpvembed {

enum class ErrorCode {
    // expression language
    SyntaxError,
    UnsupportedFunction,
    NonAffineFunctionArgument,
    NegativeExponent,
    ArityMismatch,
    // model validation
    DimensionMismatch,
    NonzeroDzw,
    NonFiniteEntry,
    ExpressionArityMismatch,
    FormatError,
    IoError,
    // embedding pipeline
    NonzeroAtOrigin,
    InvalidOrdering,
    SingularA,
    EigenvalueFailure,
    ColumnSpaceViolation,
    EmbeddingDegenerate,
    ChannelCountMismatch,
    // simulation
    Divergence,
    ShapeMismatch,
    NyquistViolation,
    InvalidArgument,
    UnknownExample,
};

/// Stable identifier, e.g. "NonzeroDzw". Used as the CLI error prefix.
const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failure with the byte offset into the source text.
class ParseError : public Error {
public:
    ParseError(ErrorCode code, std::size_t position, const std::string& message);

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace lpvembed

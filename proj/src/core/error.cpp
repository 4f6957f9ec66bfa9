#include "probeforge/core/error.hpp"

namespace probeforge {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Dimension: return "dimension error";
    case ErrorCode::Integrity: return "integrity error";
    case ErrorCode::Format: return "format error";
    case ErrorCode::Registry: return "registry error";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Traversal: return "traversal error";
    case ErrorCode::Parameter: return "parameter error";
    case ErrorCode::Numeric: return "numeric error";
    case ErrorCode::Degeneracy: return "degeneracy error";
    case ErrorCode::Compatibility: return "compatibility error";
    case ErrorCode::Input: return "input error";
    case ErrorCode::UndefinedSimilarity: return "undefined-similarity error";
    case ErrorCode::Transport: return "transport error";
    case ErrorCode::NotFound: return "not-found error";
    case ErrorCode::Io: return "i/o error";
    }
    return "error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

} // namespace probeforge

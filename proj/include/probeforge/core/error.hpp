#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace probeforge {

enum class ErrorCode {
    Dimension,
    Integrity,
    Format,
    Registry,
    Parse,
    Traversal,
    Parameter,
    Numeric,
    Degeneracy,
    Compatibility,
    Input,
    UndefinedSimilarity,
    Transport,
    NotFound,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the toolkit carries one of the error classes above
/// so callers (and the CLI exit-code mapping) can branch on the class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

} // namespace probeforge

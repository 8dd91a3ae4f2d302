#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fogsim {

enum class ErrorCode {
    InsufficientData,
    InvalidSample,
    InvalidParameter,
    DivisionDomain,
    DegenerateSample,
    UnfittableFamily,
    UnknownPair,
    Unpartitionable,
    InvalidWorkflow,
    DegenerateSpec,
    ConfigError,
    ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library. `context` carries a field path
// (config errors) or a line number (parse errors) when one applies.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string context = {});

    ErrorCode code() const noexcept { return code_; }
    const std::string& context() const noexcept { return context_; }

private:
    ErrorCode code_;
    std::string context_;
};

}  // namespace fogsim

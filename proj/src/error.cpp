#include "fogsim/error.hpp"

namespace fogsim {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::InvalidSample: return "InvalidSample";
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::DivisionDomain: return "DivisionDomain";
        case ErrorCode::DegenerateSample: return "DegenerateSample";
        case ErrorCode::UnfittableFamily: return "UnfittableFamily";
        case ErrorCode::UnknownPair: return "UnknownPair";
        case ErrorCode::Unpartitionable: return "Unpartitionable";
        case ErrorCode::InvalidWorkflow: return "InvalidWorkflow";
        case ErrorCode::DegenerateSpec: return "DegenerateSpec";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string context)
    : std::runtime_error(std::string(to_string(code)) + ": " + message +
                         (context.empty() ? std::string{} : " (" + context + ")")),
      code_(code),
      context_(std::move(context)) {}

}  // namespace fogsim

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edascope {

// Stable error codes surfaced by the CLI and the HTTP service.
enum class ErrorCode {
    MalformedDocument = 10,
    UnsupportedFormat = 11,
    IoError = 12,
    ParseFailure = 20,
    InvalidArgument = 21,
    EmptyDocument = 30,
    InvalidHyperparameter = 40,
    SeedConflict = 41,
    UnknownSequence = 50,
    EmptySequence = 51,
    FormatError = 52,
    DimensionMismatch = 53,
    EmptyQuery = 60,
    NotFound = 61,
    IndexNotLoaded = 62,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace edascope

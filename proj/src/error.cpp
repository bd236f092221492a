#include "edascope/error.hpp"

namespace edascope {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedDocument: return "MalformedDocument";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ParseFailure: return "ParseFailure";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::EmptyDocument: return "EmptyDocument";
        case ErrorCode::InvalidHyperparameter: return "InvalidHyperparameter";
        case ErrorCode::SeedConflict: return "SeedConflict";
        case ErrorCode::UnknownSequence: return "UnknownSequence";
        case ErrorCode::EmptySequence: return "EmptySequence";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyQuery: return "EmptyQuery";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::IndexNotLoaded: return "IndexNotLoaded";
    }
    return "Unknown";
}

}  // namespace edascope

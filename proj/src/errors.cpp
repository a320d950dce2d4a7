#include "perfdrift/errors.hpp"

namespace perfdrift {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::duplicate_point: return "duplicate-point";
    case ErrorCode::unit_mismatch: return "unit-mismatch";
    case ErrorCode::too_short: return "too-short";
    case ErrorCode::invalid_series: return "invalid-series";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::schema_error: return "schema-error";
    case ErrorCode::value_error: return "value-error";
    case ErrorCode::storage_error: return "storage-error";
    case ErrorCode::load_error: return "load-error";
    case ErrorCode::unsupported_size: return "unsupported-size";
    case ErrorCode::degenerate_sample: return "degenerate-sample";
    case ErrorCode::unpaired_input: return "unpaired-input";
    case ErrorCode::degenerate_difference: return "degenerate-difference";
    }
    return "error";
}

} // namespace perfdrift

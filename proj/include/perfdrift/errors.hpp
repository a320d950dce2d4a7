#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace perfdrift {

enum class ErrorCode {
    invalid_argument,
    duplicate_point,
    unit_mismatch,
    too_short,
    invalid_series,
    parse_error,
    schema_error,
    value_error,
    storage_error,
    load_error,
    unsupported_size,
    degenerate_sample,
    unpaired_input,
    degenerate_difference,
};

std::string_view to_string(ErrorCode code);

/// All library failures are reported as an Error carrying a typed code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace perfdrift

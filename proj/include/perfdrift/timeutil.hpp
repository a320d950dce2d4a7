#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace perfdrift {

/// Parses an ISO 8601 UTC instant ("2025-01-09T20:04:00Z", optionally with a
/// fractional-second part that is truncated, offset "Z" or "+00:00") into
/// seconds since the Unix epoch. Rejects non-UTC offsets and invalid calendar
/// dates with value-error.
std::int64_t parse_iso8601_utc(std::string_view text);

/// Formats epoch seconds as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601_utc(std::int64_t epoch_seconds);

/// Current wall-clock time as epoch seconds.
std::int64_t now_epoch_seconds();

} // namespace perfdrift

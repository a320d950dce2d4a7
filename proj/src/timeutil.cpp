#include "perfdrift/timeutil.hpp"

#include "perfdrift/errors.hpp"

#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>

namespace perfdrift {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// civil-days algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

bool is_leap(std::int64_t y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr std::array<unsigned, 12> days = {31, 28, 31, 30, 31, 30,
                                                      31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return days[m - 1];
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

} // namespace

std::int64_t parse_iso8601_utc(std::string_view text) {
    const auto bad = [&](const std::string& why) -> std::int64_t {
        fail(ErrorCode::value_error, "invalid timestamp '" + std::string(text) + "': " + why);
    };

    // Offset suffix: "Z" or "+00:00" only.
    std::string_view body = text;
    if (body.size() >= 1 && (body.back() == 'Z' || body.back() == 'z')) {
        body.remove_suffix(1);
    } else if (body.size() >= 6 && (body.substr(body.size() - 6) == "+00:00" ||
                                    body.substr(body.size() - 6) == "-00:00")) {
        body.remove_suffix(6);
    } else {
        return bad("missing UTC designator (expected 'Z' or '+00:00')");
    }

    // Optional fractional seconds, truncated.
    if (auto dot = body.find('.'); dot != std::string_view::npos) {
        std::string_view frac = body.substr(dot + 1);
        if (!all_digits(frac)) return bad("malformed fractional seconds");
        body = body.substr(0, dot);
    }

    // "YYYY-MM-DDTHH:MM:SS"
    if (body.size() != 19 || body[4] != '-' || body[7] != '-' ||
        (body[10] != 'T' && body[10] != 't') || body[13] != ':' || body[16] != ':') {
        return bad("expected YYYY-MM-DDTHH:MM:SS");
    }
    const std::string_view fields[6] = {body.substr(0, 4),   body.substr(5, 2),
                                        body.substr(8, 2),   body.substr(11, 2),
                                        body.substr(14, 2),  body.substr(17, 2)};
    for (auto f : fields) {
        if (!all_digits(f)) return bad("non-numeric date/time field");
    }
    const int year = to_int(fields[0]);
    const int month = to_int(fields[1]);
    const int day = to_int(fields[2]);
    const int hour = to_int(fields[3]);
    const int minute = to_int(fields[4]);
    const int second = to_int(fields[5]);

    if (month < 1 || month > 12) return bad("month out of range");
    if (day < 1 || day > static_cast<int>(days_in_month(year, month)))
        return bad("day out of range");
    if (hour > 23 || minute > 59 || second > 59) return bad("time of day out of range");

    return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_iso8601_utc(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    std::int64_t year;
    unsigned month, day;
    civil_from_days(days, year, month, day);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(year), month, day,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

std::int64_t now_epoch_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

} // namespace perfdrift

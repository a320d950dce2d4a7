#include "perfdrift/model.hpp"

#include "perfdrift/errors.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace perfdrift {

namespace {

bool is_hex_lower(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
}

bool is_key_safe(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' || c == '_' ||
           c == '-';
}

// Lowercase + percent-encode one key component. '%' itself is always encoded
// so decoding stays unambiguous.
std::string canonical_component(std::string_view raw) {
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(raw.size());
    for (char ch : raw) {
        char c = ch;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (is_key_safe(c)) {
            out.push_back(c);
        } else {
            const auto b = static_cast<unsigned char>(c);
            out.push_back('%');
            out.push_back(hex[b >> 4]);
            out.push_back(hex[b & 0xf]);
        }
    }
    return out;
}

bool is_canonical_segment(std::string_view seg) {
    if (seg.empty() || seg == "." || seg == "..") return false;
    for (std::size_t i = 0; i < seg.size(); ++i) {
        const char c = seg[i];
        if (is_key_safe(c) || c == '=' || c == ',') continue;
        if (c == '%') {
            if (i + 2 >= seg.size() || !is_hex_lower(seg[i + 1]) || !is_hex_lower(seg[i + 2]))
                return false;
            i += 2;
            continue;
        }
        return false;
    }
    return true;
}

std::pair<std::int64_t, std::string_view> order_key(const MeasurementPoint& p) {
    return {p.timestamp, p.commit};
}

} // namespace

std::string_view to_string(Trigger t) {
    switch (t) {
    case Trigger::push: return "push";
    case Trigger::schedule: return "schedule";
    case Trigger::manual: return "manual";
    }
    return "push";
}

Trigger trigger_from_string(std::string_view s) {
    if (s == "push") return Trigger::push;
    if (s == "schedule") return Trigger::schedule;
    if (s == "manual") return Trigger::manual;
    fail(ErrorCode::value_error, "unknown trigger '" + std::string(s) + "'");
}

std::string_view to_string(StatTest t) {
    switch (t) {
    case StatTest::shapiro_wilk: return "shapiro_wilk";
    case StatTest::paired_t: return "paired_t";
    case StatTest::welch_t: return "welch_t";
    }
    return "paired_t";
}

const std::string& Series::unit() const {
    static const std::string empty;
    return points.empty() ? empty : points.front().unit;
}

std::vector<double> Series::values() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.value);
    return v;
}

void validate_point(const MeasurementPoint& point) {
    if (point.commit.size() < 7 || point.commit.size() > 40)
        fail(ErrorCode::invalid_argument,
             "commit '" + point.commit + "' must be 7-40 lowercase hex chars");
    for (char c : point.commit) {
        if (!is_hex_lower(c))
            fail(ErrorCode::invalid_argument,
                 "commit '" + point.commit + "' must be 7-40 lowercase hex chars");
    }
    if (point.unit.empty()) fail(ErrorCode::invalid_argument, "unit must be non-empty");
    if (!std::isfinite(point.value))
        fail(ErrorCode::invalid_argument, "value must be finite");
    const bool time_unit = point.unit == "ns" || point.unit == "us" || point.unit == "ms" ||
                           point.unit == "s";
    if (time_unit && point.value < 0.0)
        fail(ErrorCode::invalid_argument,
             "value must be non-negative for time unit '" + point.unit + "'");
}

std::string make_series_key(const std::string& benchmark, const std::string& metric,
                            const TagMap& env) {
    if (benchmark.empty()) fail(ErrorCode::invalid_argument, "benchmark must be non-empty");
    if (metric.empty()) fail(ErrorCode::invalid_argument, "metric must be non-empty");

    std::string key = canonical_component(benchmark);
    key += '/';
    key += canonical_component(metric);
    if (!env.empty()) {
        key += '/';
        bool first = true;
        for (const auto& [name, value] : env) {  // std::map iterates name-sorted
            if (name.empty())
                fail(ErrorCode::invalid_argument, "env tag name must be non-empty");
            if (!first) key += ',';
            first = false;
            key += canonical_component(name);
            key += '=';
            key += canonical_component(value);
        }
    }
    return key;
}

bool is_canonical_series_key(std::string_view key) {
    if (key.empty()) return false;
    std::size_t start = 0;
    std::size_t segments = 0;
    while (true) {
        const std::size_t slash = key.find('/', start);
        const std::string_view seg =
            slash == std::string_view::npos ? key.substr(start) : key.substr(start, slash - start);
        if (!is_canonical_segment(seg)) return false;
        ++segments;
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    return segments >= 2;
}

std::string canonicalize_series_key(std::string_view raw) {
    static constexpr char hex[] = "0123456789abcdef";
    if (raw.empty()) fail(ErrorCode::invalid_series, "series key must be non-empty");
    std::string key;
    key.reserve(raw.size());
    std::size_t start = 0;
    std::size_t segments = 0;
    while (start <= raw.size()) {
        const std::size_t slash = raw.find('/', start);
        const std::string_view seg = slash == std::string_view::npos
                                         ? raw.substr(start)
                                         : raw.substr(start, slash - start);
        if (segments > 0) key += '/';
        if (is_canonical_segment(seg)) {
            key += seg;
        } else {
            std::string enc;
            enc.reserve(seg.size());
            for (char ch : seg) {
                char c = ch;
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
                if (is_key_safe(c) || c == '=' || c == ',') {
                    enc.push_back(c);
                } else {
                    const auto b = static_cast<unsigned char>(c);
                    enc.push_back('%');
                    enc.push_back(hex[b >> 4]);
                    enc.push_back(hex[b & 0xf]);
                }
            }
            if (!is_canonical_segment(enc))
                fail(ErrorCode::invalid_series,
                     "series key segment '" + std::string(seg) + "' is invalid");
            key += enc;
        }
        ++segments;
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    if (segments < 2)
        fail(ErrorCode::invalid_series,
             "series key '" + std::string(raw) + "' needs at least benchmark/metric segments");
    return key;
}

Series append_point(Series series, MeasurementPoint point) {
    validate_point(point);
    if (!series.empty() && point.unit != series.unit())
        fail(ErrorCode::unit_mismatch, "point unit '" + point.unit + "' does not match series unit '" +
                                           series.unit() + "'");

    const auto pos = std::lower_bound(
        series.points.begin(), series.points.end(), point,
        [](const MeasurementPoint& a, const MeasurementPoint& b) {
            return order_key(a) < order_key(b);
        });
    if (pos != series.points.end() && order_key(*pos) == order_key(point))
        fail(ErrorCode::duplicate_point,
             "point (" + std::to_string(point.timestamp) + ", " + point.commit +
                 ") already present");
    series.points.insert(pos, std::move(point));
    return series;
}

void DetectionConfig::validate() const {
    if (!(alpha > 0.0) || alpha > 2.0)
        fail(ErrorCode::invalid_argument, "alpha must be in (0, 2]");
    if (!(p_threshold > 0.0) || !(p_threshold < 1.0))
        fail(ErrorCode::invalid_argument, "p_threshold must be in (0, 1)");
    if (!(magnitude_threshold >= 0.0) || !std::isfinite(magnitude_threshold))
        fail(ErrorCode::invalid_argument, "magnitude_threshold must be >= 0");
    if (permutations < 1) fail(ErrorCode::invalid_argument, "permutations must be >= 1");
    if (min_segment < 2) fail(ErrorCode::invalid_argument, "min_segment must be >= 2");
    // With R permutations the smallest reachable p-value is 1/(R+1); require
    // that it can reach p_threshold at all.
    const int needed = static_cast<int>(std::ceil(1.0 / p_threshold - 1e-9)) - 1;
    if (permutations < needed)
        fail(ErrorCode::invalid_argument,
             "permutations=" + std::to_string(permutations) + " cannot reach p_threshold=" +
                 std::to_string(p_threshold) + " (need >= " + std::to_string(needed) + ")");
}

} // namespace perfdrift

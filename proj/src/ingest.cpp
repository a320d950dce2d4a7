#include "perfdrift/ingest.hpp"

#include "perfdrift/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace perfdrift {

namespace {

using nlohmann::json;

std::string element_prefix(std::size_t index) {
    return "element " + std::to_string(index) + ": ";
}

/// Fetches a required string field, with schema errors naming field + index.
std::string require_string(const json& obj, const char* field, std::size_t index) {
    const auto it = obj.find(field);
    if (it == obj.end())
        fail(ErrorCode::schema_error,
             element_prefix(index) + "missing required field \"" + field + "\"");
    if (!it->is_string())
        fail(ErrorCode::schema_error,
             element_prefix(index) + "field \"" + field + "\" must be a string");
    return it->get<std::string>();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv_row(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

} // namespace

ResultFormat result_format_from_string(std::string_view s) {
    if (s == "gha-json") return ResultFormat::gha_json;
    if (s == "moobench-csv") return ResultFormat::moobench_csv;
    fail(ErrorCode::value_error, "unknown result format '" + std::string(s) + "'");
}

BenchmarkResultFile parse_gha_json(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::parse_error,
             "malformed document at byte " + std::to_string(e.byte) + ": " + e.what());
    } catch (const json::exception& e) {
        // e.g. a literal like 1e999 that has no double representation
        fail(ErrorCode::value_error, std::string("unrepresentable number: ") + e.what());
    }
    if (!doc.is_array())
        fail(ErrorCode::schema_error, "top-level value must be an array of benchmark entries");
    if (doc.empty()) fail(ErrorCode::schema_error, "empty result set: no benchmark entries");

    BenchmarkResultFile out;
    out.format = ResultFormat::gha_json;
    out.entries.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& el = doc[i];
        if (!el.is_object())
            fail(ErrorCode::schema_error, element_prefix(i) + "must be an object");
        BenchmarkEntry entry;
        entry.name = require_string(el, "name", i);
        entry.unit = require_string(el, "unit", i);
        const auto vit = el.find("value");
        if (vit == el.end())
            fail(ErrorCode::schema_error, element_prefix(i) + "missing required field \"value\"");
        if (!vit->is_number())
            fail(ErrorCode::schema_error, element_prefix(i) + "field \"value\" must be a number");
        entry.value = vit->get<double>();
        if (!std::isfinite(entry.value))
            fail(ErrorCode::value_error, element_prefix(i) + "field \"value\" is not finite");
        const auto xit = el.find("extra");
        if (xit != el.end()) {
            if (!xit->is_string())
                fail(ErrorCode::schema_error,
                     element_prefix(i) + "field \"extra\" must be a string when present");
            entry.extra = xit->get<std::string>();
        }
        out.entries.push_back(std::move(entry));
    }
    return out;
}

BenchmarkResultFile parse_moobench_csv(std::string_view bytes, const std::string& value_column,
                                       const std::string& benchmark_name) {
    if (trim(bytes).empty()) fail(ErrorCode::parse_error, "empty file");

    // Split into lines; tolerate CRLF; a trailing newline is not a row.
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= bytes.size()) {
        const std::size_t nl = bytes.find('\n', start);
        std::string_view line =
            nl == std::string_view::npos ? bytes.substr(start) : bytes.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) fail(ErrorCode::parse_error, "empty file");

    const auto header = split_csv_row(lines[0]);
    std::size_t column = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == value_column) {
            column = i;
            break;
        }
    }
    if (column == header.size())
        fail(ErrorCode::schema_error,
             "column '" + value_column + "' not found in header '" + std::string(lines[0]) + "'");

    BenchmarkResultFile out;
    out.format = ResultFormat::moobench_csv;
    out.entries.reserve(lines.size() - 1);
    for (std::size_t row = 1; row < lines.size(); ++row) {
        const std::size_t line_no = row + 1;  // 1-based, header is line 1
        const auto fields = split_csv_row(lines[row]);
        if (fields.size() != header.size())
            fail(ErrorCode::value_error, "row " + std::to_string(line_no) + ": expected " +
                                             std::to_string(header.size()) + " fields, got " +
                                             std::to_string(fields.size()));
        const std::string_view field = trim(fields[column]);
        double v = 0.0;
        const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc{} || end != field.data() + field.size() || !std::isfinite(v))
            fail(ErrorCode::value_error, "row " + std::to_string(line_no) + ": cannot parse '" +
                                             std::string(field) + "' as a number");
        out.entries.push_back(BenchmarkEntry{benchmark_name, "ns", v, ""});
    }
    if (out.entries.empty())
        fail(ErrorCode::schema_error, "no data rows after the header");
    return out;
}

Aggregate aggregate_from_string(std::string_view s) {
    if (s == "mean") return Aggregate::mean;
    if (s == "median") return Aggregate::median;
    if (s == "min") return Aggregate::min;
    fail(ErrorCode::value_error, "unknown aggregate '" + std::string(s) + "'");
}

double aggregate_values(Aggregate how, std::vector<double> values) {
    if (values.empty()) fail(ErrorCode::invalid_argument, "nothing to aggregate");
    switch (how) {
    case Aggregate::mean:
        return std::accumulate(values.begin(), values.end(), 0.0) /
               static_cast<double>(values.size());
    case Aggregate::median: {
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    }
    case Aggregate::min:
        return *std::min_element(values.begin(), values.end());
    }
    fail(ErrorCode::invalid_argument, "unknown aggregate");
}

} // namespace perfdrift

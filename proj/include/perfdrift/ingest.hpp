#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace perfdrift {

/// One benchmark entry parsed from a result file.
struct BenchmarkEntry {
    std::string name;
    std::string unit;
    double value = 0.0;
    std::string extra;  // opaque annotation carried through, may be empty
};

enum class ResultFormat { gha_json, moobench_csv };

ResultFormat result_format_from_string(std::string_view s);

/// Parsed benchmark-result file; `entries` is non-empty on success.
struct BenchmarkResultFile {
    ResultFormat format = ResultFormat::gha_json;
    std::vector<BenchmarkEntry> entries;
};

/// Parses a github-action-benchmark result array:
///   [{"name": "...", "unit": "...", "value": 123.4, "extra": "..."}]
/// Malformed text → parse-error with the byte offset; a missing or mistyped
/// field → schema-error naming the field and the element index; non-finite
/// values → value-error; an empty array → schema-error.
BenchmarkResultFile parse_gha_json(std::string_view bytes);

/// Parses a header-bearing CSV of benchmark iterations. `value_column` names
/// the column holding durations in ns ('.' decimal separator, no grouping);
/// every data row becomes one entry named `benchmark_name` with unit "ns".
/// Missing column → schema-error; unparsable number → value-error with the
/// 1-based line number; empty input → parse-error.
BenchmarkResultFile parse_moobench_csv(std::string_view bytes, const std::string& value_column,
                                       const std::string& benchmark_name);

/// How a run's iteration values collapse into the single stored point.
enum class Aggregate { mean, median, min };

Aggregate aggregate_from_string(std::string_view s);

/// Applies the aggregator to a non-empty value list.
double aggregate_values(Aggregate how, std::vector<double> values);

} // namespace perfdrift

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace perfdrift {

/// What started the benchmark run that produced a point.
enum class Trigger { push, schedule, manual };

std::string_view to_string(Trigger t);
Trigger trigger_from_string(std::string_view s);

using TagMap = std::map<std::string, std::string>;

/// One benchmark result: a single run of one benchmark on one commit.
struct MeasurementPoint {
    std::string commit;      // 7-40 lowercase hex chars
    std::int64_t timestamp;  // seconds since epoch, UTC
    double value = 0.0;
    std::string unit;        // e.g. "ns"
    TagMap env;              // environment tags (os-image, runner-kind, ...)
    Trigger trigger = Trigger::push;
};

/// Ordered sequence of points for one (benchmark, metric, environment) key.
/// Points are kept sorted by (timestamp, commit); ties are forbidden and all
/// points share one unit.
struct Series {
    std::string key;
    std::vector<MeasurementPoint> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const std::string& unit() const;
    std::vector<double> values() const;
};

/// A detected distribution shift. `index` is the first index of the right
/// segment (0-based), so the shift sits between points[index-1] and
/// points[index].
struct ChangePoint {
    std::size_t index = 0;
    std::string before_commit;
    std::string after_commit;
    double qhat = 0.0;
    double p_value = 1.0;
    double magnitude = 0.0;  // mean(after segment)/mean(before segment) - 1
};

/// Tuning for change detection. Defaults follow the production configuration:
/// p-value threshold 0.001 against 999 permutations, 5% magnitude floor.
struct DetectionConfig {
    double alpha = 1.0;                // divergence exponent, in (0, 2]
    double p_threshold = 0.001;        // in (0, 1)
    double magnitude_threshold = 0.05; // >= 0
    int permutations = 999;            // >= 1
    int min_segment = 5;               // >= 2
    std::uint64_t seed = 0;

    /// Throws invalid-argument when any field is out of range or when
    /// `permutations` is too small for the p-value 1/(R+1) to ever reach
    /// `p_threshold`.
    void validate() const;
};

enum class StatTest { shapiro_wilk, paired_t, welch_t };

std::string_view to_string(StatTest t);

/// Outcome of one statistical test. `significant` is only meaningful for the
/// t variants (p < 0.05 decision rule); `degenerate` marks the zero-variance
/// conventions.
struct StatTestResult {
    StatTest test = StatTest::paired_t;
    double statistic = 0.0;  // w or t
    double p_value = 1.0;
    double df = 0.0;         // 0 for shapiro_wilk
    std::size_t n_x = 0;
    std::size_t n_y = 0;
    bool significant = false;
    bool degenerate = false;
};

/// Throws the op-specific error when the point violates a type invariant:
/// malformed commit, empty unit, non-finite value, or a negative value with a
/// time unit (ns/us/ms/s).
void validate_point(const MeasurementPoint& point);

/// Builds the canonical filesystem-safe series key:
///   benchmark "/" metric ["/" tag1=v1 "," tag2=v2 ...]
/// Components are lowercased and characters outside [a-z0-9._-] are
/// percent-encoded (lowercase hex); tags are sorted by name.
std::string make_series_key(const std::string& benchmark, const std::string& metric,
                            const TagMap& env);

/// True when `key` already is a canonical series key (safe to use as a store
/// path; "." and ".." segments are rejected).
bool is_canonical_series_key(std::string_view key);

/// Canonicalizes a user-supplied key string ("MooBench/Total time" →
/// "moobench/total%20time"). '/' separates segments; '=' and ',' stay
/// structural. Already-canonical segments pass through unchanged, so the
/// function is idempotent. Keys with fewer than two segments or with "." /
/// ".." segments are invalid-series errors.
std::string canonicalize_series_key(std::string_view raw);

/// Inserts a point preserving (timestamp, commit) order. Duplicate
/// (timestamp, commit) pairs and unit mismatches are errors.
Series append_point(Series series, MeasurementPoint point);

} // namespace perfdrift

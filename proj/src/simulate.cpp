#include "perfdrift/simulate.hpp"

#include "perfdrift/errors.hpp"
#include "perfdrift/rng.hpp"

#include <cmath>
#include <cstdio>

namespace perfdrift {

namespace {

// 2025-01-01T00:00:00Z; runs are spaced at the 3-hour scheduler cadence.
constexpr std::int64_t kSimEpoch = 1735689600;
constexpr std::int64_t kRunSpacing = 3 * 3600;

} // namespace

void SimSpec::validate() const {
    if (n_points == 0) fail(ErrorCode::invalid_argument, "n_points must be positive");
    if (!(base_mean > 0.0) || !std::isfinite(base_mean))
        fail(ErrorCode::invalid_argument, "base_mean must be a positive real");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].start >= n_points)
            fail(ErrorCode::invalid_argument,
                 "segment start " + std::to_string(segments[i].start) +
                     " is out of range for " + std::to_string(n_points) + " points");
        if (i > 0 && segments[i].start <= segments[i - 1].start)
            fail(ErrorCode::invalid_argument, "segment starts must be strictly increasing");
        if (!std::isfinite(segments[i].shift) || segments[i].shift <= -1.0)
            fail(ErrorCode::invalid_argument, "segment shift must be finite and > -1");
    }
    if (!(noise_sigma_rel >= 0.0) || !std::isfinite(noise_sigma_rel))
        fail(ErrorCode::invalid_argument, "noise_sigma_rel must be >= 0");
    if (!(outlier_prob >= 0.0) || !(outlier_prob < 1.0))
        fail(ErrorCode::invalid_argument, "outlier_prob must be in [0, 1)");
    if (!(outlier_scale >= 1.0) || !std::isfinite(outlier_scale))
        fail(ErrorCode::invalid_argument, "outlier_scale must be >= 1");
}

double SimSpec::shift_at(std::size_t i) const {
    double shift = 0.0;
    for (const SimSegment& seg : segments) {
        if (seg.start > i) break;  // starts are strictly increasing
        shift = seg.shift;
    }
    return shift;
}

Series simulate(const SimSpec& spec) {
    spec.validate();
    SplitMix64 rng(spec.seed);

    Series series;
    series.points.reserve(spec.n_points);
    for (std::size_t i = 0; i < spec.n_points; ++i) {
        // Draw both variates unconditionally so the stream layout (and thus
        // every value) is stable across noise/outlier settings.
        const double eps = spec.noise_sigma_rel * rng.next_gaussian();
        const double u = rng.next_unit();

        double value = spec.base_mean * (1.0 + spec.shift_at(i)) * (1.0 + eps);
        if (u < spec.outlier_prob) value *= spec.outlier_scale;
        if (value < 0.0) value = 0.0;  // time units cannot go negative

        MeasurementPoint p;
        char commit[16];
        std::snprintf(commit, sizeof commit, "c%06x", static_cast<unsigned>(i));
        p.commit = commit;
        p.timestamp = kSimEpoch + static_cast<std::int64_t>(i) * kRunSpacing;
        p.value = value;
        p.unit = "ns";
        p.trigger = Trigger::schedule;
        series.points.push_back(std::move(p));
    }
    return series;
}

} // namespace perfdrift

#pragma once

#include "perfdrift/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace perfdrift {

/// Everything the markdown change report renders: the issue-body-style
/// notification for one series.
struct ChangeReport {
    std::string series_key;
    std::int64_t generated_at = 0;  // epoch seconds; by convention the last point's timestamp
    DetectionConfig config;
    std::size_t n_points = 0;
    std::vector<ChangePoint> changes;  // sorted by index
};

/// Renders the report as markdown. Deterministic: identical reports produce
/// identical bytes. An empty change list renders the literal summary
/// "no significant change points detected". Magnitudes are rendered signed
/// with one decimal place ("+30.0%"), p-values with 3 significant digits.
std::string render_markdown(const ChangeReport& report);

/// One plotted point. `x` is the run ordinal (not wall-clock), `y` the value
/// after clipping; `original` always preserves the stored value.
struct PlotPoint {
    std::size_t x = 0;
    std::string label;  // short commit + timestamp
    double y = 0.0;
    bool clipped = false;
    double original = 0.0;
};

/// Plot data for one series with optional display clipping and change-point
/// markers. Clipping is presentation-only: detection always runs on the
/// unclipped values and the store is never rewritten.
struct PlotSpec {
    std::vector<PlotPoint> points;
    std::optional<double> clip_threshold;
    std::vector<std::size_t> change_markers;  // indices into points
};

/// Builds the plot spec: values above `clip` plot at the clip level with
/// clipped=true; markers at each change point's index. Indices outside
/// [1, n-1] are invalid-argument.
PlotSpec make_plot_spec(const Series& series, const std::vector<ChangePoint>& changes,
                        std::optional<double> clip);

/// Emits a standalone SVG 1.1 document: the series polyline, clipped points
/// drawn distinctly (class "clipped"), change markers as red dots
/// (class "change"), and the clip level as a dashed line when set.
/// Deterministic bytes; an empty plot is invalid-argument.
std::string emit_svg(const PlotSpec& plot);

/// JSON body shared by `detect --output json` and the HTTP changes endpoint
/// so the two surfaces stay byte-identical: {"changes":[{...}, ...]}.
std::string detection_json(const std::vector<ChangePoint>& changes);

} // namespace perfdrift

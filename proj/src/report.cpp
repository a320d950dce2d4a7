#include "perfdrift/report.hpp"

#include "perfdrift/errors.hpp"
#include "perfdrift/timeutil.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>

namespace perfdrift {

namespace {

std::string strf(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    char buf[256];
    const int n = std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return std::string(buf, n < 0 ? 0 : static_cast<std::size_t>(n));
}

std::string short_commit(const std::string& commit) { return commit.substr(0, 7); }

const char* direction_arrow(double magnitude) {
    if (magnitude > 0.0) return "↑";
    if (magnitude < 0.0) return "↓";
    return "→";
}

} // namespace

std::string render_markdown(const ChangeReport& report) {
    std::string md;
    md += "# change report: `" + report.series_key + "`\n\n";
    md += "- generated at: " + format_iso8601_utc(report.generated_at) + "\n";
    md += "- points analyzed: " + std::to_string(report.n_points) + "\n";
    md += strf("- config: alpha=%g, p-threshold=%g, magnitude-threshold=%g, permutations=%d, "
               "min-segment=%d, seed=",
               report.config.alpha, report.config.p_threshold, report.config.magnitude_threshold,
               report.config.permutations, report.config.min_segment);
    md += std::to_string(report.config.seed);
    md += "\n\n";

    if (report.changes.empty()) {
        md += "no significant change points detected.\n";
        return md;
    }

    md += std::to_string(report.changes.size()) + " significant change point" +
          (report.changes.size() == 1 ? "" : "s") + " detected.\n\n";
    md += "| # | index | before | after | direction | magnitude | p-value | qhat |\n";
    md += "|--:|------:|:-------|:------|:---------:|----------:|--------:|-----:|\n";
    for (std::size_t i = 0; i < report.changes.size(); ++i) {
        const ChangePoint& c = report.changes[i];
        md += strf("| %zu | %zu | `%s` | `%s` | %s | %s | %s | %s |\n", i + 1, c.index,
                   short_commit(c.before_commit).c_str(), short_commit(c.after_commit).c_str(),
                   direction_arrow(c.magnitude), strf("%+.1f%%", c.magnitude * 100.0).c_str(),
                   strf("%.3g", c.p_value).c_str(), strf("%.6g", c.qhat).c_str());
    }
    return md;
}

PlotSpec make_plot_spec(const Series& series, const std::vector<ChangePoint>& changes,
                        std::optional<double> clip) {
    PlotSpec spec;
    spec.clip_threshold = clip;
    const std::size_t n = series.size();
    for (const ChangePoint& c : changes) {
        if (c.index < 1 || c.index >= n)
            fail(ErrorCode::invalid_argument,
                 "change index " + std::to_string(c.index) + " is out of range for a series of " +
                     std::to_string(n) + " points");
        spec.change_markers.push_back(c.index);
    }
    spec.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const MeasurementPoint& mp = series.points[i];
        PlotPoint p;
        p.x = i;
        p.label = short_commit(mp.commit) + " " + format_iso8601_utc(mp.timestamp);
        p.original = mp.value;
        p.y = mp.value;
        if (clip && mp.value > *clip) {
            p.y = *clip;
            p.clipped = true;
        }
        spec.points.push_back(std::move(p));
    }
    return spec;
}

std::string emit_svg(const PlotSpec& plot) {
    if (plot.points.empty())
        fail(ErrorCode::invalid_argument, "cannot plot an empty series");

    constexpr double kWidth = 880.0, kHeight = 440.0;
    constexpr double kLeft = 70.0, kRight = 20.0, kTop = 20.0, kBottom = 50.0;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const std::size_t n = plot.points.size();

    double ymin = plot.points[0].y, ymax = plot.points[0].y;
    for (const PlotPoint& p : plot.points) {
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    double pad = (ymax - ymin) * 0.08;
    if (pad <= 0.0) pad = std::max(1.0, std::fabs(ymax) * 0.1);
    const double ylo = ymin - pad, yhi = ymax + pad;

    const auto sx = [&](std::size_t i) {
        if (n == 1) return kLeft + plot_w / 2.0;
        return kLeft + static_cast<double>(i) * plot_w / static_cast<double>(n - 1);
    };
    const auto sy = [&](double v) { return kTop + plot_h - (v - ylo) / (yhi - ylo) * plot_h; };

    std::string svg;
    svg += strf("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\">\n",
                kWidth, kHeight, kWidth, kHeight);
    svg += strf("<rect class=\"bg\" x=\"0\" y=\"0\" width=\"%.0f\" height=\"%.0f\" "
                "fill=\"#ffffff\"/>\n",
                kWidth, kHeight);
    // Axes and extent labels.
    svg += strf("<line class=\"axis\" x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                "stroke=\"#333333\"/>\n",
                kLeft, kTop + plot_h, kLeft + plot_w, kTop + plot_h);
    svg += strf("<line class=\"axis\" x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                "stroke=\"#333333\"/>\n",
                kLeft, kTop, kLeft, kTop + plot_h);
    svg += strf("<text class=\"ylab\" x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" "
                "font-family=\"sans-serif\" font-size=\"11\">%.6g</text>\n",
                kLeft - 6.0, sy(ymax) + 4.0, ymax);
    svg += strf("<text class=\"ylab\" x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" "
                "font-family=\"sans-serif\" font-size=\"11\">%.6g</text>\n",
                kLeft - 6.0, sy(ymin) + 4.0, ymin);
    svg += strf("<text class=\"xlab\" x=\"%.2f\" y=\"%.2f\" text-anchor=\"start\" "
                "font-family=\"sans-serif\" font-size=\"11\">%s</text>\n",
                kLeft, kTop + plot_h + 18.0, plot.points.front().label.c_str());
    if (n > 1)
        svg += strf("<text class=\"xlab\" x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" "
                    "font-family=\"sans-serif\" font-size=\"11\">%s</text>\n",
                    kLeft + plot_w, kTop + plot_h + 18.0, plot.points.back().label.c_str());

    if (plot.clip_threshold && *plot.clip_threshold >= ylo && *plot.clip_threshold <= yhi) {
        const double cy = sy(*plot.clip_threshold);
        svg += strf("<line class=\"clip\" x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                    "stroke=\"#cc8800\" stroke-dasharray=\"4 3\"/>\n",
                    kLeft, cy, kLeft + plot_w, cy);
        svg += strf("<text class=\"cliplab\" x=\"%.2f\" y=\"%.2f\" text-anchor=\"start\" "
                    "font-family=\"sans-serif\" font-size=\"11\" fill=\"#cc8800\">clip "
                    "%.6g</text>\n",
                    kLeft + plot_w - 90.0, cy - 4.0, *plot.clip_threshold);
    }

    svg += "<polyline class=\"series\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" "
           "points=\"";
    for (std::size_t i = 0; i < n; ++i) {
        if (i) svg += ' ';
        svg += strf("%.2f,%.2f", sx(i), sy(plot.points[i].y));
    }
    svg += "\"/>\n";

    // Per-run dots (kept readable by skipping them for very long series).
    if (n <= 400) {
        for (std::size_t i = 0; i < n; ++i) {
            if (plot.points[i].clipped) continue;
            svg += strf("<circle class=\"pt\" cx=\"%.2f\" cy=\"%.2f\" r=\"2\" "
                        "fill=\"#1f77b4\"/>\n",
                        sx(i), sy(plot.points[i].y));
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!plot.points[i].clipped) continue;
        svg += strf("<rect class=\"clipped\" x=\"%.2f\" y=\"%.2f\" width=\"7\" height=\"7\" "
                    "fill=\"#ff8c00\" data-original=\"%.17g\"/>\n",
                    sx(i) - 3.5, sy(plot.points[i].y) - 3.5, plot.points[i].original);
    }

    for (std::size_t idx : plot.change_markers) {
        const double cx = sx(idx);
        const double cy = idx < n ? sy(plot.points[idx].y) : kTop;
        svg += strf("<circle class=\"change\" cx=\"%.2f\" cy=\"%.2f\" r=\"4.5\" "
                    "fill=\"#d62728\"/>\n",
                    cx, cy);
    }

    svg += "</svg>\n";
    return svg;
}

std::string detection_json(const std::vector<ChangePoint>& changes) {
    nlohmann::ordered_json body;
    body["changes"] = nlohmann::ordered_json::array();
    for (const ChangePoint& c : changes) {
        nlohmann::ordered_json row;
        row["index"] = c.index;
        row["before_commit"] = c.before_commit;
        row["after_commit"] = c.after_commit;
        row["qhat"] = c.qhat;
        row["p_value"] = c.p_value;
        row["magnitude"] = c.magnitude;
        body["changes"].push_back(std::move(row));
    }
    return body.dump();
}

} // namespace perfdrift

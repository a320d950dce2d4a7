// perfdrift: change-point detection for continuously benchmarked code.
//
// Exit codes: 0 success / no change; 1 usage error; 2 data, parse, or I/O
// error; 3 detection reported at least one change point (so CI jobs can fail
// on regressions).

#include "perfdrift/edivisive.hpp"
#include "perfdrift/errors.hpp"
#include "perfdrift/ingest.hpp"
#include "perfdrift/model.hpp"
#include "perfdrift/report.hpp"
#include "perfdrift/service.hpp"
#include "perfdrift/simulate.hpp"
#include "perfdrift/stats.hpp"
#include "perfdrift/store.hpp"
#include "perfdrift/timeutil.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace perfdrift;

std::int64_t parse_timestamp_flag(const std::string& value) {
    if (value == "now") return now_epoch_seconds();
    return parse_iso8601_utc(value);
}

TagMap parse_env_flags(const std::vector<std::string>& kvs) {
    TagMap env;
    for (const std::string& kv : kvs) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            fail(ErrorCode::value_error, "--env expects k=v, got '" + kv + "'");
        env[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return env;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::parse_error, "cannot read input file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) fail(ErrorCode::parse_error, "cannot read input file '" + path + "'");
    return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::storage_error, "cannot write output file '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorCode::storage_error, "cannot write output file '" + path + "'");
}

/// Reads a one-number-per-line sample file; blank lines are skipped.
SampleVector read_sample_file(const std::string& path) {
    const std::string bytes = read_file(path);
    SampleVector sample;
    sample.label = path;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start <= bytes.size()) {
        const std::size_t nl = bytes.find('\n', start);
        std::string_view line = nl == std::string::npos
                                    ? std::string_view(bytes).substr(start)
                                    : std::string_view(bytes).substr(start, nl - start);
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.remove_suffix(1);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t'))
            line.remove_prefix(1);
        if (!line.empty()) {
            double v = 0.0;
            const auto [end, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
            if (ec != std::errc{} || end != line.data() + line.size())
                fail(ErrorCode::value_error, path + " line " + std::to_string(line_no) +
                                                 ": cannot parse '" + std::string(line) +
                                                 "' as a number");
            sample.values.push_back(v);
        }
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    if (sample.values.empty())
        fail(ErrorCode::parse_error, path + ": no values (expected one number per line)");
    return sample;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void print_shapiro(const char* tag, const SampleVector& sample) {
    std::printf("sample %s: path=%s n=%zu mean=%.6g\n", tag, sample.label.c_str(),
                sample.values.size(), mean_of(sample.values));
    try {
        const StatTestResult r = shapiro_wilk(sample);
        std::printf("  shapiro-wilk: (w, p) = (%.5f, %.6g)\n", r.statistic, r.p_value);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::unsupported_size || e.code() == ErrorCode::degenerate_sample) {
            std::printf("  shapiro-wilk: skipped (%s)\n", e.what());
        } else {
            throw;
        }
    }
}

struct SimShiftFlag {
    std::size_t index = 0;
    double shift = 0.0;
};

SimShiftFlag parse_shift_flag(const std::string& raw) {
    const std::size_t colon = raw.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= raw.size())
        fail(ErrorCode::value_error, "--shift expects IDX:REL, got '" + raw + "'");
    SimShiftFlag out;
    {
        const char* b = raw.data();
        const auto [end, ec] = std::from_chars(b, b + colon, out.index);
        if (ec != std::errc{} || end != b + colon)
            fail(ErrorCode::value_error, "--shift index '" + raw.substr(0, colon) +
                                             "' is not a non-negative integer");
    }
    {
        const char* b = raw.data() + colon + 1;
        const char* e = raw.data() + raw.size();
        const auto [end, ec] = std::from_chars(b, e, out.shift);
        if (ec != std::errc{} || end != e)
            fail(ErrorCode::value_error,
                 "--shift value '" + raw.substr(colon + 1) + "' is not a number");
    }
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"perfdrift: performance change detection for continuous benchmarking"};
    app.require_subcommand(1);
    int exit_code = 0;

    // ---- add -------------------------------------------------------------
    struct {
        std::string store, series, commit, timestamp, unit;
        std::string trigger = "push";
        double value = 0.0;
        std::vector<std::string> env;
    } add_opt;
    auto* add = app.add_subcommand("add", "Append one measurement to a series");
    add->add_option("--store", add_opt.store, "Store directory")
        ->envname("PERFDRIFT_STORE")
        ->required();
    add->add_option("--series", add_opt.series, "Series key, e.g. bench/metric[/tags]")->required();
    add->add_option("--commit", add_opt.commit, "Commit hash (7-40 hex chars)")->required();
    add->add_option("--timestamp", add_opt.timestamp, "ISO 8601 UTC instant, or 'now'")->required();
    add->add_option("--value", add_opt.value, "Measured value")->required();
    add->add_option("--unit", add_opt.unit, "Unit, e.g. ns")->required();
    add->add_option("--trigger", add_opt.trigger, "What started the run")
        ->check(CLI::IsMember({"push", "schedule", "manual"}));
    add->add_option("--env", add_opt.env, "Environment tag k=v (repeatable)");
    add->callback([&] {
        const std::string key = canonicalize_series_key(add_opt.series);
        MeasurementPoint p;
        p.commit = add_opt.commit;
        p.timestamp = parse_timestamp_flag(add_opt.timestamp);
        p.value = add_opt.value;
        p.unit = add_opt.unit;
        p.trigger = trigger_from_string(add_opt.trigger);
        p.env = parse_env_flags(add_opt.env);
        store_append(StoreLayout{add_opt.store}, key, p);
        std::printf("appended 1 point to %s\n", key.c_str());
    });

    // ---- ingest ----------------------------------------------------------
    struct {
        std::string store, format, prefix, commit, timestamp, file;
        std::string aggregate = "mean";
        std::string csv_column = "duration_ns";
        std::string benchmark = "moobench";
        std::string trigger = "push";
        std::vector<std::string> env;
    } ing_opt;
    auto* ingest = app.add_subcommand("ingest", "Parse a benchmark result file into the store");
    ingest->add_option("--store", ing_opt.store, "Store directory")
        ->envname("PERFDRIFT_STORE")
        ->required();
    ingest->add_option("--format", ing_opt.format, "Input format")
        ->check(CLI::IsMember({"gha-json", "moobench-csv"}))
        ->required();
    ingest->add_option("--series-prefix", ing_opt.prefix, "Key prefix; final key is prefix/name")
        ->required();
    ingest->add_option("--commit", ing_opt.commit, "Commit the results belong to")->required();
    ingest->add_option("--timestamp", ing_opt.timestamp, "Run timestamp (ISO 8601 UTC or 'now')")
        ->required();
    ingest->add_option("--aggregate", ing_opt.aggregate, "Collapse repeated entries per name")
        ->check(CLI::IsMember({"mean", "median", "min"}));
    ingest->add_option("--csv-column", ing_opt.csv_column,
                       "Value column for moobench-csv (default duration_ns)");
    ingest->add_option("--benchmark", ing_opt.benchmark,
                       "Entry name for formats without one (moobench-csv)");
    ingest->add_option("--trigger", ing_opt.trigger, "What started the run")
        ->check(CLI::IsMember({"push", "schedule", "manual"}));
    ingest->add_option("--env", ing_opt.env, "Environment tag k=v (repeatable)");
    ingest->add_option("file", ing_opt.file, "Result file")->required();
    ingest->callback([&] {
        const std::string bytes = read_file(ing_opt.file);
        const BenchmarkResultFile parsed =
            ing_opt.format == "gha-json"
                ? parse_gha_json(bytes)
                : parse_moobench_csv(bytes, ing_opt.csv_column, ing_opt.benchmark);
        const Aggregate agg = aggregate_from_string(ing_opt.aggregate);
        const std::int64_t ts = parse_timestamp_flag(ing_opt.timestamp);
        const Trigger trig = trigger_from_string(ing_opt.trigger);
        const TagMap env = parse_env_flags(ing_opt.env);

        // Group repeated entry names (notably every moobench-csv row) so each
        // run stores one point per benchmark name.
        std::vector<std::pair<std::string, std::vector<double>>> groups;
        std::map<std::string, std::size_t> group_index;
        std::map<std::string, std::string> group_unit;
        for (const BenchmarkEntry& e : parsed.entries) {
            const auto [it, fresh] = group_index.try_emplace(e.name, groups.size());
            if (fresh) {
                groups.emplace_back(e.name, std::vector<double>{});
                group_unit[e.name] = e.unit;
            } else if (group_unit[e.name] != e.unit) {
                fail(ErrorCode::unit_mismatch, "entries named '" + e.name +
                                                   "' mix units '" + group_unit[e.name] +
                                                   "' and '" + e.unit + "'");
            }
            groups[it->second].second.push_back(e.value);
        }

        const StoreLayout layout{ing_opt.store};
        for (auto& [name, values] : groups) {
            const std::size_t runs = values.size();
            MeasurementPoint p;
            p.commit = ing_opt.commit;
            p.timestamp = ts;
            p.value = aggregate_values(agg, std::move(values));
            p.unit = group_unit[name];
            p.trigger = trig;
            p.env = env;
            const std::string key = canonicalize_series_key(ing_opt.prefix + "/" + name);
            store_append(layout, key, p);
            std::printf("%s: %.6g %s (from %zu entries, %s)\n", key.c_str(), p.value,
                        p.unit.c_str(), runs, ing_opt.aggregate.c_str());
        }
    });

    // ---- detect ----------------------------------------------------------
    struct {
        std::string store, series;
        std::string output = "json";
        DetectionConfig config;
    } det_opt;
    auto* det = app.add_subcommand("detect", "Find change points in a stored series");
    det->add_option("--store", det_opt.store, "Store directory")
        ->envname("PERFDRIFT_STORE")
        ->required();
    det->add_option("--series", det_opt.series, "Series key")->required();
    det->add_option("--pvalue", det_opt.config.p_threshold, "Permutation p-value threshold");
    det->add_option("--magnitude", det_opt.config.magnitude_threshold,
                    "Minimum |relative mean change|");
    det->add_option("--alpha", det_opt.config.alpha, "Divergence exponent in (0,2]");
    det->add_option("--permutations", det_opt.config.permutations, "Permutation trials");
    det->add_option("--min-segment", det_opt.config.min_segment, "Minimum points per segment");
    det->add_option("--seed", det_opt.config.seed, "Permutation RNG seed");
    det->add_option("--output", det_opt.output, "Output format")
        ->check(CLI::IsMember({"json", "markdown"}));
    det->callback([&] {
        const std::string key = canonicalize_series_key(det_opt.series);
        const LoadResult loaded = store_load(StoreLayout{det_opt.store}, key);
        print_warnings(loaded.warnings);
        const std::vector<ChangePoint> changes = detect(loaded.series, det_opt.config);
        if (det_opt.output == "json") {
            std::printf("%s\n", detection_json(changes).c_str());
        } else {
            ChangeReport report;
            report.series_key = key;
            report.generated_at = loaded.series.empty() ? 0 : loaded.series.points.back().timestamp;
            report.config = det_opt.config;
            report.n_points = loaded.series.size();
            report.changes = changes;
            std::fputs(render_markdown(report).c_str(), stdout);
        }
        exit_code = changes.empty() ? 0 : 3;
    });

    // ---- validate ----------------------------------------------------------
    struct {
        std::string a, b;
        std::string test = "paired";
    } val_opt;
    auto* val = app.add_subcommand(
        "validate", "Normality-check two samples and test their difference");
    val->add_option("--a", val_opt.a, "Sample file (one number per line)")->required();
    val->add_option("--b", val_opt.b, "Sample file (one number per line)")->required();
    val->add_option("--test", val_opt.test, "Difference test")
        ->check(CLI::IsMember({"paired", "welch"}));
    val->callback([&] {
        SampleVector a = read_sample_file(val_opt.a);
        SampleVector b = read_sample_file(val_opt.b);
        print_shapiro("a", a);
        print_shapiro("b", b);
        const StatTestResult t =
            val_opt.test == "paired" ? paired_t_test(a, b) : welch_t_test(a, b);
        std::printf("%s t-test: t = %.6g, df = %.6g, p = %.6g%s\n", val_opt.test.c_str(),
                    t.statistic, t.df, t.p_value, t.degenerate ? " (degenerate input)" : "");
        std::printf("difference is %s (p %s 0.05)\n", t.significant ? "significant" : "not significant",
                    t.significant ? "<" : ">=");
    });

    // ---- report ------------------------------------------------------------
    struct {
        std::string store, series, markdown, svg;
        double clip = 0.0;
        bool has_clip = false;
        DetectionConfig config;
    } rep_opt;
    auto* rep = app.add_subcommand("report", "Render the change report for a series");
    rep->add_option("--store", rep_opt.store, "Store directory")
        ->envname("PERFDRIFT_STORE")
        ->required();
    rep->add_option("--series", rep_opt.series, "Series key")->required();
    rep->add_option("--markdown", rep_opt.markdown, "Markdown output path")->required();
    rep->add_option("--svg", rep_opt.svg, "SVG plot output path");
    auto* clip_opt = rep->add_option("--clip", rep_opt.clip, "Display clip level for the plot");
    rep->add_option("--pvalue", rep_opt.config.p_threshold, "Permutation p-value threshold");
    rep->add_option("--magnitude", rep_opt.config.magnitude_threshold,
                    "Minimum |relative mean change|");
    rep->add_option("--alpha", rep_opt.config.alpha, "Divergence exponent in (0,2]");
    rep->add_option("--permutations", rep_opt.config.permutations, "Permutation trials");
    rep->add_option("--min-segment", rep_opt.config.min_segment, "Minimum points per segment");
    rep->add_option("--seed", rep_opt.config.seed, "Permutation RNG seed");
    rep->callback([&] {
        rep_opt.has_clip = clip_opt->count() > 0;
        const std::string key = canonicalize_series_key(rep_opt.series);
        const LoadResult loaded = store_load(StoreLayout{rep_opt.store}, key);
        print_warnings(loaded.warnings);
        const std::vector<ChangePoint> changes = detect(loaded.series, rep_opt.config);

        ChangeReport report;
        report.series_key = key;
        report.generated_at = loaded.series.empty() ? 0 : loaded.series.points.back().timestamp;
        report.config = rep_opt.config;
        report.n_points = loaded.series.size();
        report.changes = changes;
        write_file(rep_opt.markdown, render_markdown(report));
        std::printf("wrote %s\n", rep_opt.markdown.c_str());

        if (!rep_opt.svg.empty()) {
            const PlotSpec plot = make_plot_spec(
                loaded.series, changes,
                rep_opt.has_clip ? std::optional<double>(rep_opt.clip) : std::nullopt);
            write_file(rep_opt.svg, emit_svg(plot));
            std::printf("wrote %s\n", rep_opt.svg.c_str());
        }
        exit_code = changes.empty() ? 0 : 3;
    });

    // ---- simulate ----------------------------------------------------------
    struct {
        std::size_t points = 0;
        double base = 0.0;
        std::vector<std::string> shifts;
        double noise = 0.0;
        double outlier_prob = 0.0;
        double outlier_scale = 1.0;
        std::uint64_t seed = 0;
        std::string out, store, series;
    } sim_opt;
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic series with known shifts");
    sim->add_option("--points", sim_opt.points, "Number of runs")->required();
    sim->add_option("--base", sim_opt.base, "Base mean value (ns)")->required();
    sim->add_option("--shift", sim_opt.shifts, "Level shift IDX:REL (repeatable)");
    sim->add_option("--noise", sim_opt.noise, "Relative noise sigma");
    sim->add_option("--outlier-prob", sim_opt.outlier_prob, "Per-run outlier probability");
    sim->add_option("--outlier-scale", sim_opt.outlier_scale, "Outlier multiplier (>= 1)");
    sim->add_option("--seed", sim_opt.seed, "RNG seed");
    sim->add_option("--out", sim_opt.out, "Write records to this file instead of a store");
    sim->add_option("--store", sim_opt.store, "Store directory")->envname("PERFDRIFT_STORE");
    sim->add_option("--series", sim_opt.series, "Series key to append under");
    sim->callback([&] {
        const bool to_file = !sim_opt.out.empty();
        const bool to_store = !sim_opt.store.empty() && !sim_opt.series.empty();
        if (to_file == to_store)
            throw CLI::RequiredError("simulate: exactly one of --out FILE or --store DIR "
                                     "--series KEY");
        SimSpec spec;
        spec.n_points = sim_opt.points;
        spec.base_mean = sim_opt.base;
        for (const std::string& s : sim_opt.shifts) {
            const SimShiftFlag f = parse_shift_flag(s);
            spec.segments.push_back(SimSegment{f.index, f.shift});
        }
        spec.noise_sigma_rel = sim_opt.noise;
        spec.outlier_prob = sim_opt.outlier_prob;
        spec.outlier_scale = sim_opt.outlier_scale;
        spec.seed = sim_opt.seed;
        const Series series = simulate(spec);

        if (to_file) {
            std::string bytes;
            for (const MeasurementPoint& p : series.points) bytes += store_record_line(p) + "\n";
            write_file(sim_opt.out, bytes);
            std::printf("wrote %zu records to %s\n", series.size(), sim_opt.out.c_str());
        } else {
            const std::string key = canonicalize_series_key(sim_opt.series);
            const StoreLayout layout{sim_opt.store};
            for (const MeasurementPoint& p : series.points) store_append(layout, key, p);
            std::printf("appended %zu points to %s\n", series.size(), key.c_str());
        }
    });

    // ---- serve -------------------------------------------------------------
    struct {
        std::string store;
        std::string listen = "127.0.0.1:8080";
    } srv_opt;
    auto* srv = app.add_subcommand("serve", "Run the HTTP ingest/query service");
    srv->add_option("--store", srv_opt.store, "Store directory")
        ->envname("PERFDRIFT_STORE")
        ->required();
    srv->add_option("--listen", srv_opt.listen, "HOST:PORT to bind")->required();
    srv->callback([&] {
        const std::size_t colon = srv_opt.listen.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 >= srv_opt.listen.size())
            fail(ErrorCode::value_error, "--listen expects HOST:PORT, got '" + srv_opt.listen + "'");
        const std::string host = srv_opt.listen.substr(0, colon);
        int port = 0;
        {
            const char* b = srv_opt.listen.data() + colon + 1;
            const char* e = srv_opt.listen.data() + srv_opt.listen.size();
            const auto [end, ec] = std::from_chars(b, e, port);
            if (ec != std::errc{} || end != e || port < 0 || port > 65535)
                fail(ErrorCode::value_error,
                     "invalid port in --listen '" + srv_opt.listen + "'");
        }
        httplib::Server server;
        configure_service(server, StoreLayout{srv_opt.store});
        std::printf("listening on %s:%d\n", host.c_str(), port);
        std::fflush(stdout);
        if (!server.listen(host, port))
            fail(ErrorCode::storage_error, "cannot listen on " + srv_opt.listen);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return exit_code;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const perfdrift::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

// Acceptance suite for the perfdrift toolkit. Each criterion prints exactly
// one PASS/FAIL line; the process exits nonzero when any criterion fails or
// overruns its wall-time limit. The suite exercises the installed behavior
// end to end: the detection engine against an independent brute-force oracle,
// pinned numeric conventions, statistical reference fixtures, store
// durability, and byte-parity between the CLI and the HTTP service.

#include "perfdrift/edivisive.hpp"
#include "perfdrift/errors.hpp"
#include "perfdrift/ingest.hpp"
#include "perfdrift/model.hpp"
#include "perfdrift/report.hpp"
#include "perfdrift/rng.hpp"
#include "perfdrift/service.hpp"
#include "perfdrift/simulate.hpp"
#include "perfdrift/stats.hpp"
#include "perfdrift/store.hpp"
#include "perfdrift/timeutil.hpp"

#include "oracle.hpp"

#include <httplib.h>
#include <json.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace perfdrift;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Harness plumbing
// ---------------------------------------------------------------------------

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "perfdrift-acc-XXXXXX").string();
        char* made = ::mkdtemp(tmpl.data());
        if (!made) throw std::runtime_error("mkdtemp failed");
        path = made;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

struct CliResult {
    int status = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(PERFDRIFT_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    CliResult r;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
    const int rc = ::pclose(pipe);
    r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return r;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    std::size_t count = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + needle.size()))
        ++count;
    return count;
}

std::string fmt(const char* f, ...) {
    va_list args;
    va_start(args, f);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

/// Collects the first failure reason; further checks are still evaluated so a
/// criterion reports its first broken expectation, not a partial count.
struct Checker {
    bool ok = true;
    std::string why;

    bool expect(bool cond, const std::string& reason) {
        if (!cond && ok) {
            ok = false;
            why = reason;
        }
        return cond;
    }
};

MeasurementPoint mk_point(std::size_t i, double value, std::int64_t base_ts = 1735689600) {
    MeasurementPoint p;
    p.commit = fmt("c%06zx", i);
    p.timestamp = base_ts + static_cast<std::int64_t>(i) * 10800;
    p.value = value;
    p.unit = "ns";
    p.trigger = Trigger::schedule;
    return p;
}

Series series_of(const std::vector<double>& values) {
    Series s;
    s.key = "bench/acceptance";
    for (std::size_t i = 0; i < values.size(); ++i) s.points.push_back(mk_point(i, values[i]));
    return s;
}

// ---------------------------------------------------------------------------
// Criterion 1: the engine's divergence and best-split agree with an
// independent brute-force oracle on randomized instances.
// ---------------------------------------------------------------------------
bool criterion_oracle(std::string& detail) {
    constexpr int kInstances = 100;
    constexpr double kTol = 1e-9;
    const double alphas[3] = {0.5, 1.0, 1.5};
    SplitMix64 rng(20250815);

    Checker chk;
    for (int inst = 0; inst < kInstances && chk.ok; ++inst) {
        const std::size_t n = 4 + static_cast<std::size_t>(rng.next_below(97));  // 4..100
        const double alpha = alphas[inst % 3];
        const double base = 5.0 + 20.0 * rng.next_unit();
        const bool with_step = (rng.next() & 1) != 0;
        const std::size_t step_at = with_step ? 1 + rng.next_below(n - 1) : n;
        const double shift = 3.0 * (rng.next_unit() - 0.25);

        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = base + (i >= step_at ? shift : 0.0) + rng.next_gaussian();
        }

        DetectionConfig config;
        config.alpha = alpha;
        config.min_segment = 2;

        // Whole-range best split, engine vs oracle.
        const auto engine = best_split(values, Segment{0, n}, config);
        const auto reference = oracle::best_split(values, 0, n, 2, alpha);
        if (!chk.expect(engine.has_value() == reference.has_value(),
                        fmt("instance %d: split existence disagrees", inst)))
            break;
        if (engine) {
            chk.expect(engine->tau == reference->tau,
                       fmt("instance %d (n=%zu, alpha=%g): tau %zu vs oracle %zu", inst, n,
                           alpha, engine->tau, reference->tau));
            const double scale = std::max(1.0, std::fabs(reference->qhat));
            chk.expect(std::fabs(engine->qhat - reference->qhat) <= kTol * scale,
                       fmt("instance %d: qhat %.17g vs oracle %.17g", inst, engine->qhat,
                           reference->qhat));
        }

        // One random admissible cut, divergence vs oracle.
        if (n >= 4) {
            const std::size_t cut = 2 + rng.next_below(n - 3);
            const std::span<const double> all(values);
            const double q_engine = divergence(all.subspan(0, cut), all.subspan(cut), alpha);
            const double q_oracle = oracle::divergence(all.subspan(0, cut), all.subspan(cut), alpha);
            const double scale = std::max(1.0, std::fabs(q_oracle));
            chk.expect(std::fabs(q_engine - q_oracle) <= kTol * scale,
                       fmt("instance %d: divergence %.17g vs oracle %.17g", inst, q_engine,
                           q_oracle));
        }
    }
    detail = chk.ok
                 ? fmt("%d/%d randomized instances agree (tau exact, qhat within 1e-9 relative)",
                       kInstances, kInstances)
                 : chk.why;
    return chk.ok;
}

// ---------------------------------------------------------------------------
// Criterion 2: a clean 20+20 step is reported as exactly one change with the
// exact permutation floor p = 0.001, and a configuration whose permutation
// count cannot reach the threshold is rejected.
// ---------------------------------------------------------------------------
bool criterion_step_exactness(std::string& detail) {
    Checker chk;

    std::vector<double> values(40, 1000.0);
    for (std::size_t i = 20; i < 40; ++i) values[i] = 1300.0;
    const Series series = series_of(values);

    const std::vector<ChangePoint> changes = detect(series, DetectionConfig{});
    chk.expect(changes.size() == 1, fmt("expected 1 change, got %zu", changes.size()));
    if (changes.size() == 1) {
        const ChangePoint& c = changes[0];
        chk.expect(c.index == 20, fmt("index %zu != 20", c.index));
        chk.expect(c.p_value == 0.001, fmt("p %.17g != 0.001 exactly", c.p_value));
        chk.expect(std::fabs(c.magnitude - 0.3) < 1e-12,
                   fmt("magnitude %.17g not 0.3", c.magnitude));
        chk.expect(c.before_commit == "c000013" && c.after_commit == "c000014",
                   "change commits mismatch");
        chk.expect(c.qhat > 0.0, "qhat not positive");
    }

    // permutations=100 cannot reach p <= 0.001 (floor is 1/101); must be rejected.
    DetectionConfig bad;
    bad.permutations = 100;
    bool rejected = false;
    try {
        bad.validate();
    } catch (const Error& e) {
        rejected = e.code() == ErrorCode::invalid_argument;
    }
    chk.expect(rejected, "permutations=100 at p-threshold 0.001 was not rejected");

    bool detect_rejected = false;
    try {
        detect(series, bad);
    } catch (const Error&) {
        detect_rejected = true;
    }
    chk.expect(detect_rejected, "detect accepted an unreachable p-threshold configuration");

    detail = chk.ok ? "one change at index 20 with exact p=0.001, magnitude +0.300; "
                      "unreachable threshold configuration rejected"
                    : chk.why;
    return chk.ok;
}

// ---------------------------------------------------------------------------
// Criterion 3: the 5% magnitude gate suppresses a +4% shift and passes a +6%
// shift with the exact relative magnitude.
// ---------------------------------------------------------------------------
bool criterion_magnitude_gate(std::string& detail) {
    Checker chk;

    std::vector<double> small(60, 1000.0);
    for (std::size_t i = 30; i < 60; ++i) small[i] = 1040.0;
    const std::vector<ChangePoint> suppressed = detect(series_of(small), DetectionConfig{});
    chk.expect(suppressed.empty(),
               fmt("+4%% shift should be gated, got %zu change(s)", suppressed.size()));

    std::vector<double> larger(60, 1000.0);
    for (std::size_t i = 30; i < 60; ++i) larger[i] = 1060.0;
    const std::vector<ChangePoint> reported = detect(series_of(larger), DetectionConfig{});
    chk.expect(reported.size() == 1,
               fmt("+6%% shift: expected 1 change, got %zu", reported.size()));
    if (reported.size() == 1) {
        chk.expect(reported[0].index == 30, fmt("index %zu != 30", reported[0].index));
        chk.expect(std::fabs(reported[0].magnitude - 0.060) <= 1e-9,
                   fmt("magnitude %.17g not within 1e-9 of 0.060", reported[0].magnitude));
        chk.expect(reported[0].p_value == 0.001, "p not at the exact permutation floor");
    }

    detail = chk.ok ? "+4% suppressed by the 5% gate; +6% reported with magnitude 0.060 +- 1e-9"
                    : chk.why;
    return chk.ok;
}

// ---------------------------------------------------------------------------
// Criterion 4: false-positive rate on stationary Gaussian series.
// ---------------------------------------------------------------------------
bool criterion_false_positives(std::string& detail) {
    constexpr int kSeries = 200;
    constexpr int kAllowed = 2;
    int flagged = 0;
    for (int i = 0; i < kSeries; ++i) {
        SimSpec spec;
        spec.n_points = 60;
        spec.base_mean = 1000.0;
        spec.noise_sigma_rel = 0.05;
        spec.seed = 1000 + static_cast<std::uint64_t>(i);
        const Series s = simulate(spec);
        if (!detect(s, DetectionConfig{}).empty()) ++flagged;
    }
    detail = fmt("%d/%d stationary series flagged (allowed: <= %d) at p<=0.001", flagged,
                 kSeries, kAllowed);
    return flagged <= kAllowed;
}

// ---------------------------------------------------------------------------
// Criterion 5: power and localization on a +30% shift under 1% noise.
// ---------------------------------------------------------------------------
bool criterion_power(std::string& detail) {
    constexpr int kRuns = 100;
    int localized = 0;   // some change within +-1 of the true index
    int exactly_one = 0; // exactly one change, and it is within +-1
    for (int i = 0; i < kRuns; ++i) {
        SimSpec spec;
        spec.n_points = 60;
        spec.base_mean = 1000.0;
        spec.segments = {{30, 0.30}};
        spec.noise_sigma_rel = 0.01;
        spec.seed = 5000 + static_cast<std::uint64_t>(i);
        const Series s = simulate(spec);
        const std::vector<ChangePoint> changes = detect(s, DetectionConfig{});

        bool near = false;
        for (const ChangePoint& c : changes) {
            if (c.index >= 29 && c.index <= 31) near = true;
        }
        if (near) ++localized;
        if (near && changes.size() == 1) ++exactly_one;
    }
    detail = fmt("localized within +-1 index in %d/%d runs (need >= 95); "
                 "exactly one change in %d/%d (need >= 90)",
                 localized, kRuns, exactly_one, kRuns);
    return localized >= 95 && exactly_one >= 90;
}

// ---------------------------------------------------------------------------
// Criterion 6: statistical routines match the reference fixtures.
// ---------------------------------------------------------------------------
bool criterion_stat_fixtures(std::string& detail) {
    Checker chk;
    const std::string path = std::string(PERFDRIFT_FIXTURE_DIR) + "/stat_fixtures.json";
    std::ifstream in(path);
    if (!in.good()) {
        detail = "missing fixture file " + path;
        return false;
    }
    json fixtures;
    in >> fixtures;

    std::size_t shapiro_n = 0;
    for (const auto& fx : fixtures.at("shapiro")) {
        SampleVector s;
        for (const auto& v : fx.at("values")) s.values.push_back(v.get<double>());
        const StatTestResult r = shapiro_wilk(s);
        const std::string name = fx.at("name").get<std::string>();
        chk.expect(std::fabs(r.statistic - fx.at("w").get<double>()) <= 1e-3,
                   "shapiro w mismatch on " + name);
        chk.expect(std::fabs(r.p_value - fx.at("p").get<double>()) <= 5e-3,
                   "shapiro p mismatch on " + name);
        ++shapiro_n;
    }
    chk.expect(shapiro_n == 20, fmt("expected 20 shapiro fixtures, found %zu", shapiro_n));

    std::size_t paired_n = 0;
    for (const auto& fx : fixtures.at("paired_t")) {
        SampleVector x, y;
        for (const auto& v : fx.at("x")) x.values.push_back(v.get<double>());
        for (const auto& v : fx.at("y")) y.values.push_back(v.get<double>());
        const StatTestResult r = paired_t_test(x, y);
        chk.expect(std::fabs(r.p_value - fx.at("p").get<double>()) <= 1e-6,
                   "paired p mismatch on " + fx.at("name").get<std::string>());
        chk.expect(std::fabs(r.statistic - fx.at("t").get<double>()) <= 1e-9,
                   "paired t mismatch on " + fx.at("name").get<std::string>());
        ++paired_n;
    }

    std::size_t welch_n = 0;
    for (const auto& fx : fixtures.at("welch_t")) {
        SampleVector x, y;
        for (const auto& v : fx.at("x")) x.values.push_back(v.get<double>());
        for (const auto& v : fx.at("y")) y.values.push_back(v.get<double>());
        const StatTestResult r = welch_t_test(x, y);
        chk.expect(std::fabs(r.p_value - fx.at("p").get<double>()) <= 1e-6, "welch p mismatch");
        chk.expect(std::fabs(r.df - fx.at("df").get<double>()) <= 1e-8, "welch df mismatch");
        ++welch_n;
    }

    std::size_t sf_n = 0;
    for (const auto& fx : fixtures.at("t_sf")) {
        const double got = student_t_sf(fx.at("t").get<double>(), fx.at("df").get<double>());
        chk.expect(std::fabs(got - fx.at("sf").get<double>()) <= 1e-10,
                   fmt("t_sf mismatch at t=%g df=%g", fx.at("t").get<double>(),
                       fx.at("df").get<double>()));
        ++sf_n;
    }

    detail = chk.ok ? fmt("%zu shapiro (w+-1e-3, p+-5e-3), %zu paired, %zu welch (p+-1e-6), "
                          "%zu t-tail values (+-1e-10) match the references",
                          shapiro_n, paired_n, welch_n, sf_n)
                    : chk.why;
    return chk.ok;
}

// ---------------------------------------------------------------------------
// Criterion 7: display clipping preserves originals and never rewrites the
// store.
// ---------------------------------------------------------------------------
bool criterion_clipping(std::string& detail) {
    Checker chk;
    TempDir tmp;
    const StoreLayout layout{tmp.path};
    const std::string key = "bench/clip";

    for (std::size_t i = 0; i < 40; ++i) {
        store_append(layout, key, mk_point(i, i == 7 ? 35624.0 : 2500.0));
    }
    const fs::path file = store_file_path(layout, key);
    const std::string bytes_before = read_file(file);

    const LoadResult loaded = store_load(layout, key);
    const PlotSpec spec = make_plot_spec(loaded.series, {}, 4500.0);
    chk.expect(spec.points[7].clipped, "spike not marked clipped");
    chk.expect(spec.points[7].y == 4500.0, fmt("clipped y %.17g != 4500", spec.points[7].y));
    chk.expect(spec.points[7].original == 35624.0, "original value lost");
    for (std::size_t i = 0; i < spec.points.size() && chk.ok; ++i) {
        if (i == 7) continue;
        chk.expect(!spec.points[i].clipped, fmt("point %zu wrongly clipped", i));
        chk.expect(spec.points[i].y == 2500.0, fmt("point %zu y altered", i));
    }

    const std::string svg = emit_svg(spec);
    chk.expect(count_occurrences(svg, "class=\"clipped\"") == 1,
               "expected exactly one clipped marker in the svg");
    chk.expect(svg.find("data-original=\"35624\"") != std::string::npos,
               "svg lost the unclipped value");

    // The full CLI report pipeline over the same store must leave it untouched.
    const CliResult rep = run_cli("report --store " + tmp.path.string() + " --series " + key +
                                  " --markdown " + (tmp.path / "r.md").string() + " --svg " +
                                  (tmp.path / "r.svg").string() + " --clip 4500");
    chk.expect(rep.status == 0 || rep.status == 3,
               fmt("report exited %d: %s", rep.status, rep.output.c_str()));
    chk.expect(read_file(tmp.path / "r.svg").find("data-original=\"35624\"") != std::string::npos,
               "cli-rendered svg lost the unclipped value");
    chk.expect(read_file(file) == bytes_before, "report run modified the store file");

    detail = chk.ok ? "spike plots at the 4500 clip with data-original=35624; "
                      "store bytes identical before/after the report run"
                    : chk.why;
    return chk.ok;
}

// ---------------------------------------------------------------------------
// Criterion 8: CLI pipeline end to end (ingest -> detect -> report), exit
// codes, and byte-determinism across reruns.
// ---------------------------------------------------------------------------
bool criterion_cli_pipeline(std::string& detail) {
    Checker chk;
    TempDir tmp;
    const std::string store = (tmp.path / "store").string();

    // 40 per-commit result files through the ingest surface.
    for (std::size_t i = 0; i < 40; ++i) {
        const double value = i < 20 ? 2500.0 : 3250.0;
        const fs::path rf = tmp.path / fmt("result-%02zu.json", i);
        write_file(rf, fmt(R"([{"name":"Binary-File","unit":"ns","value":%.1f}])", value));
        char ts[32];
        const std::time_t t = 1735689600 + static_cast<std::time_t>(i) * 10800;
        std::tm tm_utc{};
        gmtime_r(&t, &tm_utc);
        std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        const CliResult r = run_cli("ingest --store " + store +
                                    " --format gha-json --series-prefix kieker --commit " +
                                    fmt("c%06zx", i) + " --timestamp " + ts + " " + rf.string());
        if (!chk.expect(r.status == 0, fmt("ingest %zu exited %d: %s", i, r.status,
                                           r.output.c_str())))
            break;
    }

    const std::string detect_args = "detect --store " + store +
                                    " --series kieker/binary-file --output json";
    const CliResult det = run_cli(detect_args);
    chk.expect(det.status == 3, fmt("detect exited %d, want 3", det.status));
    if (chk.ok) {
        const json body = json::parse(det.output);
        chk.expect(body.at("changes").size() == 1, "expected exactly one change");
        if (body.at("changes").size() == 1) {
            chk.expect(body["changes"][0].at("index") == 20, "change not at index 20");
            chk.expect(body["changes"][0].at("p_value") == 0.001, "p not 0.001");
        }
    }
    const CliResult det2 = run_cli(detect_args);
    chk.expect(det2.status == 3 && det2.output == det.output,
               "detect rerun was not byte-identical");

    const fs::path md1 = tmp.path / "report1.md", svg1 = tmp.path / "plot1.svg";
    const fs::path md2 = tmp.path / "report2.md", svg2 = tmp.path / "plot2.svg";
    const std::string rep_args = "report --store " + store + " --series kieker/binary-file";
    const CliResult rep1 = run_cli(rep_args + " --markdown " + md1.string() + " --svg " +
                                   svg1.string());
    chk.expect(rep1.status == 3, fmt("report exited %d, want 3", rep1.status));
    chk.expect(read_file(md1).find("+30.0%") != std::string::npos,
               "markdown report lost the +30.0% magnitude");
    chk.expect(count_occurrences(read_file(svg1), "class=\"change\"") == 1,
               "svg must carry exactly one change marker");
    const CliResult rep2 = run_cli(rep_args + " --markdown " + md2.string() + " --svg " +
                                   svg2.string());
    chk.expect(rep2.status == 3, "report rerun exit code changed");
    chk.expect(read_file(md2) == read_file(md1), "markdown reruns differ");
    chk.expect(read_file(svg2) == read_file(svg1), "svg reruns differ");

    // A quiet series exits 0 through the same pipeline.
    const CliResult sim = run_cli("simulate --points 30 --base 2500 --seed 4 --store " + store +
                                  " --series kieker/quiet");
    chk.expect(sim.status == 0, "simulate exited nonzero");
    const CliResult quiet = run_cli("detect --store " + store + " --series kieker/quiet");
    chk.expect(quiet.status == 0, fmt("quiet detect exited %d, want 0", quiet.status));
    chk.expect(quiet.output.find(R"({"changes":[]})") != std::string::npos,
               "quiet detect did not print an empty change set");

    detail = chk.ok ? "ingest -> detect (exit 3) -> report over 40 commits; reruns "
                      "byte-identical; quiet series exits 0"
                    : chk.why;
    return chk.ok;
}

// ---------------------------------------------------------------------------
// Criterion 9: crash-truncated store files always load; complete lines are
// kept, the partial tail is skipped with a warning.
// ---------------------------------------------------------------------------
bool criterion_truncation(std::string& detail) {
    Checker chk;
    TempDir tmp;
    const StoreLayout layout{tmp.path};
    const std::string key = "bench/durable";
    for (std::size_t i = 0; i < 30; ++i) {
        store_append(layout, key, mk_point(i, 2500.0 + static_cast<double>(i)));
    }
    const fs::path file = store_file_path(layout, key);
    const std::string full = read_file(file);
    chk.expect(count_occurrences(full, "\n") == 30, "expected 30 records in the store file");

    SplitMix64 rng(424242);
    int boundary_cuts = 0;
    for (int trial = 0; trial < 50 && chk.ok; ++trial) {
        const std::size_t cut = rng.next_below(full.size() + 1);
        const std::string prefix = full.substr(0, cut);
        const fs::path trial_file =
            store_file_path(StoreLayout{tmp.path / fmt("t%02d", trial)}, key);
        write_file(trial_file, prefix);

        std::size_t complete = 0;
        for (char c : prefix)
            if (c == '\n') ++complete;
        const bool clean_cut = prefix.empty() || prefix.back() == '\n';
        if (clean_cut) ++boundary_cuts;

        try {
            const LoadResult r = store_load(StoreLayout{tmp.path / fmt("t%02d", trial)}, key);
            chk.expect(r.series.size() == complete,
                       fmt("cut at %zu: loaded %zu points, want %zu complete records", cut,
                           r.series.size(), complete));
            chk.expect(r.warnings.size() == (clean_cut ? 0u : 1u),
                       fmt("cut at %zu: %zu warnings, want %u", cut, r.warnings.size(),
                           clean_cut ? 0u : 1u));
            if (!clean_cut && !r.warnings.empty())
                chk.expect(r.warnings[0].find("unterminated") != std::string::npos,
                           "truncation warning text missing");
            // The kept prefix is intact: values still ascend from 2500.
            for (std::size_t i = 0; i < r.series.size(); ++i)
                chk.expect(r.series.points[i].value == 2500.0 + static_cast<double>(i),
                           fmt("cut at %zu: record %zu corrupted", cut, i));
        } catch (const Error& e) {
            chk.expect(false, fmt("cut at %zu: load threw: %s", cut, e.what()));
        }
    }

    detail = chk.ok ? fmt("50 random truncation points load cleanly (%d at line boundaries); "
                          "complete records kept, partial tails warned and skipped",
                          boundary_cuts)
                    : chk.why;
    return chk.ok;
}

// ---------------------------------------------------------------------------
// Criterion 10: the HTTP changes endpoint and the detect CLI return
// byte-identical JSON over randomized stores.
// ---------------------------------------------------------------------------
bool criterion_service_parity(std::string& detail) {
    Checker chk;
    TempDir tmp;
    const StoreLayout layout{tmp.path};

    // Ten series with varied structure: none, one, or two true shifts.
    std::vector<std::string> keys;
    for (int i = 0; i < 10; ++i) {
        SimSpec spec;
        spec.n_points = 40 + static_cast<std::size_t>(5 * i);
        spec.base_mean = 1000.0 + 150.0 * i;
        spec.noise_sigma_rel = 0.02;
        spec.seed = 777 + static_cast<std::uint64_t>(i);
        if (i % 3 == 1) spec.segments = {{spec.n_points / 2, 0.25}};
        if (i % 3 == 2)
            spec.segments = {{spec.n_points / 3, 0.2}, {2 * spec.n_points / 3, -0.15}};
        const Series s = simulate(spec);
        const std::string key = fmt("bench/series-%d", i);
        for (const MeasurementPoint& p : s.points) store_append(layout, key, p);
        keys.push_back(key);
    }

    httplib::Server server;
    configure_service(server, layout);
    const int port = server.bind_to_any_port("127.0.0.1");
    chk.expect(port > 0, "could not bind the test server");
    std::thread listener([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    int with_changes = 0;
    for (const std::string& key : keys) {
        if (!chk.ok) break;
        httplib::Client client("127.0.0.1", port);
        const auto http = client.Get("/api/v1/changes/" + key);
        if (!chk.expect(http && http->status == 200, "GET /changes failed for " + key)) break;

        const CliResult cli = run_cli("detect --store " + tmp.path.string() + " --series " + key +
                                      " --output json");
        chk.expect(cli.status == 0 || cli.status == 3,
                   fmt("detect exited %d for %s", cli.status, key.c_str()));
        std::string cli_body = cli.output;
        if (!cli_body.empty() && cli_body.back() == '\n') cli_body.pop_back();
        chk.expect(http->body == cli_body,
                   "HTTP and CLI detection differ for " + key + ": http=" + http->body +
                       " cli=" + cli_body);
        if (http->body != R"({"changes":[]})") ++with_changes;
        const bool cli_says_changes = cli.status == 3;
        chk.expect(cli_says_changes == (http->body != R"({"changes":[]})"),
                   "exit code does not match the change list for " + key);
    }

    server.stop();
    listener.join();

    chk.expect(with_changes >= 3, fmt("expected several seeded shifts, saw %d", with_changes));
    detail = chk.ok ? fmt("10/10 series byte-identical between GET /api/v1/changes and "
                          "detect --output json (%d with changes)",
                          with_changes)
                    : chk.why;
    return chk.ok;
}

// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* title;
    double limit_seconds;
    std::function<bool(std::string&)> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "best split matches the brute-force divergence oracle", 10.0, criterion_oracle},
        {2, "clean step: one change at the exact permutation floor", 5.0,
         criterion_step_exactness},
        {3, "magnitude gate suppresses +4% and reports +6%", 5.0, criterion_magnitude_gate},
        {4, "false-positive rate on stationary series", 120.0, criterion_false_positives},
        {5, "power and localization on a +30% shift", 120.0, criterion_power},
        {6, "statistical routines match reference fixtures", 10.0, criterion_stat_fixtures},
        {7, "plot clipping preserves originals, store stays untouched", 10.0,
         criterion_clipping},
        {8, "cli pipeline: ingest, detect, report, deterministic reruns", 60.0,
         criterion_cli_pipeline},
        {9, "truncated store files load to the last complete record", 30.0,
         criterion_truncation},
        {10, "http service and cli emit byte-identical detections", 60.0,
         criterion_service_parity},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        std::string detail;
        bool ok = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("unexpected exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok && elapsed > c.limit_seconds) {
            ok = false;
            detail = fmt("over time limit (%.1fs > %.0fs): ", elapsed, c.limit_seconds) + detail;
        }
        std::printf("%s criterion %2d: %s — %s [%.2fs, limit %.0fs]\n", ok ? "PASS" : "FAIL",
                    c.id, c.title, detail.c_str(), elapsed, c.limit_seconds);
        std::fflush(stdout);
        if (!ok) ++failures;
    }

    if (failures) {
        std::printf("%d of %zu acceptance criteria FAILED\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
    return 0;
}

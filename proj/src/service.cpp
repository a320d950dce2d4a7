#include "perfdrift/service.hpp"

#include "perfdrift/edivisive.hpp"
#include "perfdrift/errors.hpp"
#include "perfdrift/ingest.hpp"
#include "perfdrift/report.hpp"
#include "perfdrift/timeutil.hpp"

#include <httplib.h>
#include <json.hpp>

#include <charconv>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

namespace perfdrift {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

int status_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::storage_error:
    case ErrorCode::load_error:
        return 500;
    default:
        return 400;
    }
}

void respond_error(httplib::Response& res, int status, std::string_view code,
                   const std::string& message) {
    ordered_json body;
    body["error"] = std::string(code);
    body["message"] = message;
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void respond_error(httplib::Response& res, const Error& e) {
    // Error::what() is "<code>: <detail>"; the body carries the code in its
    // own field, so strip the prefix from the message.
    std::string message = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (message.rfind(prefix, 0) == 0) message = message.substr(prefix.size());
    respond_error(res, status_for(e.code()), to_string(e.code()), message);
}

std::string require_string_field(const json& body, const char* name) {
    const auto it = body.find(name);
    if (it == body.end())
        fail(ErrorCode::schema_error, std::string("missing required field \"") + name + "\"");
    if (!it->is_string())
        fail(ErrorCode::schema_error, std::string("field \"") + name + "\" must be a string");
    return it->get<std::string>();
}

double param_double(const httplib::Request& req, const char* name, double fallback) {
    if (!req.has_param(name)) return fallback;
    const std::string raw = req.get_param_value(name);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc{} || end != raw.data() + raw.size())
        fail(ErrorCode::value_error,
             std::string("parameter ") + name + "='" + raw + "' is not a number");
    return v;
}

template <typename Int>
Int param_int(const httplib::Request& req, const char* name, Int fallback) {
    if (!req.has_param(name)) return fallback;
    const std::string raw = req.get_param_value(name);
    Int v{};
    const auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc{} || end != raw.data() + raw.size())
        fail(ErrorCode::value_error,
             std::string("parameter ") + name + "='" + raw + "' is not a valid integer");
    return v;
}

ordered_json series_to_json(const LoadResult& loaded) {
    ordered_json body;
    body["key"] = loaded.series.key;
    body["unit"] = loaded.series.unit();
    body["points"] = ordered_json::array();
    for (const MeasurementPoint& p : loaded.series.points) {
        ordered_json rec;
        rec["ts"] = format_iso8601_utc(p.timestamp);
        rec["commit"] = p.commit;
        rec["value"] = p.value;
        rec["unit"] = p.unit;
        rec["trigger"] = std::string(to_string(p.trigger));
        ordered_json env = ordered_json::object();
        for (const auto& [k, v] : p.env) env[k] = v;
        rec["env"] = std::move(env);
        body["points"].push_back(std::move(rec));
    }
    body["warnings"] = loaded.warnings;
    return body;
}

} // namespace

void configure_service(httplib::Server& server, StoreLayout layout,
                       std::size_t max_payload_bytes) {
    server.set_payload_max_length(max_payload_bytes);

    // Store-wide append lock: the single-writer-per-key contract, implemented
    // conservatively. Reads never take it.
    auto append_mutex = std::make_shared<std::mutex>();

    server.Post("/api/v1/result", [layout, append_mutex](const httplib::Request& req,
                                                         httplib::Response& res) {
        try {
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::exception& e) {
                fail(ErrorCode::parse_error, std::string("malformed request body: ") + e.what());
            }
            if (!body.is_object())
                fail(ErrorCode::schema_error, "request body must be an object");

            const std::string prefix = require_string_field(body, "prefix");
            const std::string commit = require_string_field(body, "commit");
            const std::int64_t ts = parse_iso8601_utc(require_string_field(body, "timestamp"));
            Trigger trigger = Trigger::push;
            if (body.contains("trigger")) trigger = trigger_from_string(require_string_field(body, "trigger"));
            TagMap env;
            if (const auto it = body.find("env"); it != body.end()) {
                if (!it->is_object())
                    fail(ErrorCode::schema_error, "field \"env\" must be an object");
                for (const auto& [k, v] : it->items()) {
                    if (!v.is_string())
                        fail(ErrorCode::schema_error,
                             "env value for \"" + k + "\" must be a string");
                    env[k] = v.get<std::string>();
                }
            }
            const auto eit = body.find("entries");
            if (eit == body.end())
                fail(ErrorCode::schema_error, "missing required field \"entries\"");
            // Validated by the same parser the ingest CLI uses.
            const BenchmarkResultFile parsed = parse_gha_json(eit->dump());

            ordered_json keys = ordered_json::array();
            {
                std::lock_guard<std::mutex> lock(*append_mutex);
                for (const BenchmarkEntry& entry : parsed.entries) {
                    const std::string key = canonicalize_series_key(prefix + "/" + entry.name);
                    MeasurementPoint p;
                    p.commit = commit;
                    p.timestamp = ts;
                    p.value = entry.value;
                    p.unit = entry.unit;
                    p.env = env;
                    p.trigger = trigger;
                    store_append(layout, key, p);
                    keys.push_back(key);
                }
            }
            ordered_json out;
            out["appended"] = keys.size();
            out["keys"] = std::move(keys);
            res.status = 201;
            res.set_content(out.dump(), "application/json");
        } catch (const Error& e) {
            respond_error(res, e);
        } catch (const std::exception& e) {
            respond_error(res, 500, "internal-error", e.what());
        }
    });

    server.Get(R"(/api/v1/series/(.+))", [layout](const httplib::Request& req,
                                                  httplib::Response& res) {
        try {
            const std::string key = canonicalize_series_key(req.matches[1].str());
            const LoadResult loaded = store_load(layout, key);
            res.status = 200;
            res.set_content(series_to_json(loaded).dump(), "application/json");
        } catch (const Error& e) {
            respond_error(res, e);
        } catch (const std::exception& e) {
            respond_error(res, 500, "internal-error", e.what());
        }
    });

    server.Get(R"(/api/v1/changes/(.+))", [layout](const httplib::Request& req,
                                                   httplib::Response& res) {
        try {
            const std::string key = canonicalize_series_key(req.matches[1].str());
            DetectionConfig config;
            config.p_threshold = param_double(req, "pvalue", config.p_threshold);
            config.magnitude_threshold = param_double(req, "magnitude", config.magnitude_threshold);
            config.alpha = param_double(req, "alpha", config.alpha);
            config.permutations = param_int(req, "permutations", config.permutations);
            config.min_segment = param_int(req, "min_segment", config.min_segment);
            config.seed = param_int(req, "seed", config.seed);

            const LoadResult loaded = store_load(layout, key);
            const std::vector<ChangePoint> changes = detect(loaded.series, config);
            res.status = 200;
            res.set_content(detection_json(changes), "application/json");
        } catch (const Error& e) {
            respond_error(res, e);
        } catch (const std::exception& e) {
            respond_error(res, 500, "internal-error", e.what());
        }
    });
}

} // namespace perfdrift

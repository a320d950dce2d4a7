#include "perfdrift/store.hpp"

#include "perfdrift/errors.hpp"
#include "perfdrift/timeutil.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace perfdrift {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void require_canonical(std::string_view key) {
    if (!is_canonical_series_key(key))
        fail(ErrorCode::invalid_series, "'" + std::string(key) + "' is not a canonical series key");
}

[[noreturn]] void storage_errno(const std::string& what, const std::filesystem::path& path) {
    fail(ErrorCode::storage_error, what + " " + path.string() + ": " + std::strerror(errno));
}

MeasurementPoint record_to_point(const json& rec, std::size_t line_no) {
    const auto bad = [line_no](const std::string& msg) -> std::string {
        return "line " + std::to_string(line_no) + ": " + msg;
    };
    if (!rec.is_object()) fail(ErrorCode::load_error, bad("record is not an object"));

    const auto str_field = [&](const char* name) -> std::string {
        const auto it = rec.find(name);
        if (it == rec.end()) fail(ErrorCode::load_error, bad(std::string("missing field \"") + name + "\""));
        if (!it->is_string())
            fail(ErrorCode::load_error, bad(std::string("field \"") + name + "\" must be a string"));
        return it->get<std::string>();
    };

    MeasurementPoint p;
    try {
        p.timestamp = parse_iso8601_utc(str_field("ts"));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::load_error) throw;
        fail(ErrorCode::load_error, bad(e.what()));
    }
    p.commit = str_field("commit");
    const auto vit = rec.find("value");
    if (vit == rec.end() || !vit->is_number())
        fail(ErrorCode::load_error, bad("field \"value\" must be a number"));
    p.value = vit->get<double>();
    p.unit = str_field("unit");
    try {
        p.trigger = trigger_from_string(str_field("trigger"));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::load_error) throw;
        fail(ErrorCode::load_error, bad(e.what()));
    }
    const auto eit = rec.find("env");
    if (eit != rec.end()) {
        if (!eit->is_object()) fail(ErrorCode::load_error, bad("field \"env\" must be an object"));
        for (const auto& [k, v] : eit->items()) {
            if (!v.is_string())
                fail(ErrorCode::load_error, bad("env value for \"" + k + "\" must be a string"));
            p.env[k] = v.get<std::string>();
        }
    }
    try {
        validate_point(p);
    } catch (const Error& e) {
        fail(ErrorCode::load_error, bad(e.what()));
    }
    return p;
}

} // namespace

std::string store_record_line(const MeasurementPoint& point) {
    ordered_json rec;
    rec["ts"] = format_iso8601_utc(point.timestamp);
    rec["commit"] = point.commit;
    rec["value"] = point.value;
    rec["unit"] = point.unit;
    rec["trigger"] = std::string(to_string(point.trigger));
    ordered_json env = ordered_json::object();
    for (const auto& [k, v] : point.env) env[k] = v;  // TagMap iterates key-sorted
    rec["env"] = std::move(env);
    return rec.dump();
}

std::filesystem::path store_file_path(const StoreLayout& layout, std::string_view key) {
    require_canonical(key);
    std::filesystem::path p = layout.root;
    std::size_t start = 0;
    while (true) {
        const std::size_t slash = key.find('/', start);
        if (slash == std::string_view::npos) {
            p /= std::string(key.substr(start)) + ".jsonl";
            break;
        }
        p /= key.substr(start, slash - start);
        start = slash + 1;
    }
    return p;
}

void store_append(const StoreLayout& layout, const std::string& key,
                  const MeasurementPoint& point) {
    validate_point(point);
    const std::filesystem::path path = store_file_path(layout, key);

    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
        fail(ErrorCode::storage_error,
             "cannot create " + path.parent_path().string() + ": " + ec.message());

    const std::string line = store_record_line(point) + "\n";
    const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd < 0) storage_errno("cannot open", path);

    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            const int saved = errno;
            ::close(fd);
            errno = saved;
            storage_errno("cannot write", path);
        }
        written += static_cast<std::size_t>(n);
    }
    if (layout.fsync_on_append && ::fsync(fd) != 0) {
        const int saved = errno;
        ::close(fd);
        errno = saved;
        storage_errno("cannot fsync", path);
    }
    if (::close(fd) != 0) storage_errno("cannot close", path);
}

LoadResult store_load(const StoreLayout& layout, const std::string& key) {
    require_canonical(key);
    LoadResult out;
    out.series.key = key;

    const std::filesystem::path path = store_file_path(layout, key);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return out;

    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::storage_error, "cannot open " + path.string() + " for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) fail(ErrorCode::storage_error, "cannot read " + path.string());
    const std::string bytes = buf.str();

    struct Keyed {
        std::pair<std::int64_t, std::string> order;
        MeasurementPoint point;
    };
    std::vector<Keyed> kept;
    std::map<std::pair<std::int64_t, std::string>, std::size_t> seen;  // order key → line no

    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < bytes.size()) {
        const std::size_t nl = bytes.find('\n', start);
        if (nl == std::string_view::npos) {
            out.warnings.push_back("ignoring unterminated trailing record (crash remnant?)");
            break;
        }
        ++line_no;
        const std::string_view line(bytes.data() + start, nl - start);
        start = nl + 1;

        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            fail(ErrorCode::load_error,
                 "line " + std::to_string(line_no) + ": malformed record: " + e.what());
        }
        MeasurementPoint p = record_to_point(rec, line_no);

        auto order = std::make_pair(p.timestamp, p.commit);
        const auto it = seen.find(order);
        if (it != seen.end()) {
            out.warnings.push_back("line " + std::to_string(line_no) + ": duplicate point (" +
                                   format_iso8601_utc(p.timestamp) + ", " + p.commit +
                                   ") already recorded at line " + std::to_string(it->second) +
                                   "; dropping the later record");
            continue;
        }
        if (!kept.empty() && p.unit != kept.front().point.unit) {
            out.warnings.push_back("line " + std::to_string(line_no) + ": unit '" + p.unit +
                                   "' does not match series unit '" + kept.front().point.unit +
                                   "'; dropping the record");
            continue;
        }
        seen.emplace(order, line_no);
        kept.push_back(Keyed{std::move(order), std::move(p)});
    }

    std::sort(kept.begin(), kept.end(),
              [](const Keyed& a, const Keyed& b) { return a.order < b.order; });
    out.series.points.reserve(kept.size());
    for (auto& k : kept) out.series.points.push_back(std::move(k.point));
    return out;
}

} // namespace perfdrift

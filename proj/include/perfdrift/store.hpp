#pragma once

#include "perfdrift/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace perfdrift {

/// On-disk layout: one append-only file of newline-delimited records per
/// series key, rooted at `root`. Key segments map to subdirectories; the last
/// segment gets a ".jsonl" suffix so a key can never collide with another
/// key's directory.
struct StoreLayout {
    std::filesystem::path root;
    bool fsync_on_append = false;
};

/// File that holds `key`'s records. `key` must be canonical.
std::filesystem::path store_file_path(const StoreLayout& layout, std::string_view key);

/// Appends exactly one record for `point` to `key`'s file, creating parent
/// directories as needed. The record is written with a single write call so a
/// crash can only ever leave one unterminated trailing line. I/O failures are
/// storage-errors. Callers are responsible for serializing appends to one key
/// (single-writer-per-key contract); appends to different keys are
/// independent files and may run in parallel.
void store_append(const StoreLayout& layout, const std::string& key,
                  const MeasurementPoint& point);

/// What store_load returns: the sorted, invariant-checked series plus
/// warnings for records that were dropped (duplicates, unit mismatches) or
/// ignored (unterminated trailing line).
struct LoadResult {
    Series series;
    std::vector<std::string> warnings;
};

/// Loads `key`'s series. A missing file is an empty series. Complete records
/// that fail to parse or violate point invariants are load-errors naming the
/// line; a trailing line without '\n' (crash remnant) is skipped with a
/// warning; later records duplicating an earlier (timestamp, commit) are
/// dropped with a warning. Points are returned sorted by (timestamp, commit).
LoadResult store_load(const StoreLayout& layout, const std::string& key);

/// Serializes one point as a store record line (without the trailing '\n').
/// Exposed so other emitters (simulator file output) write the same schema.
std::string store_record_line(const MeasurementPoint& point);

} // namespace perfdrift

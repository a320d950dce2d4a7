#pragma once

#include "perfdrift/store.hpp"

#include <cstddef>

namespace httplib {
class Server;
}

namespace perfdrift {

/// Registers the HTTP API on `server`:
///   POST /api/v1/result              append benchmark entries (201 + keys)
///   GET  /api/v1/series/{key}        stored series (200; empty if unknown)
///   GET  /api/v1/changes/{key}       on-demand detection (200, same JSON as
///                                    the detect CLI; params pvalue, magnitude,
///                                    seed, alpha, permutations, min_segment)
/// Malformed bodies/params → 400 with a typed error; storage faults → 500;
/// bodies over `max_payload_bytes` (default 1 MiB) → 413. Appends are
/// serialized store-wide; reads run concurrently.
void configure_service(httplib::Server& server, StoreLayout layout,
                       std::size_t max_payload_bytes = std::size_t{1} << 20);

} // namespace perfdrift

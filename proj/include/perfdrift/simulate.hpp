#pragma once

#include "perfdrift/model.hpp"

#include <cstdint>
#include <vector>

namespace perfdrift {

/// A level shift starting at `start`: from that index on (until the next
/// segment begins) values sit at base_mean * (1 + shift).
struct SimSegment {
    std::size_t start = 0;
    double shift = 0.0;
};

/// Synthetic-series recipe standing in for real benchmark runs: a base level,
/// optional step changes, multiplicative Gaussian noise, and rare outlier
/// spikes mimicking the occasional wildly slow run.
struct SimSpec {
    std::size_t n_points = 0;
    double base_mean = 0.0;          // > 0
    std::vector<SimSegment> segments;  // starts strictly increasing, < n_points
    double noise_sigma_rel = 0.0;    // >= 0
    double outlier_prob = 0.0;       // in [0, 1)
    double outlier_scale = 1.0;      // >= 1
    std::uint64_t seed = 0;

    void validate() const;

    /// Ground-truth relative shift in effect at index i.
    double shift_at(std::size_t i) const;
};

/// Deterministically generates the series for `spec`:
///   value_i = base_mean * (1 + shift_at(i)) * (1 + eps_i),  eps_i ~ N(0, sigma^2),
/// multiplied by outlier_scale with probability outlier_prob, clamped at 0.
/// Commits are "c000000"+i (hex), timestamps start 2025-01-01T00:00:00Z and
/// advance 3 hours per run (the scheduler cadence), unit "ns",
/// trigger "schedule". The returned series has an empty key.
Series simulate(const SimSpec& spec);

} // namespace perfdrift

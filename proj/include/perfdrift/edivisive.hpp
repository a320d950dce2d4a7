#pragma once

#include "perfdrift/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace perfdrift {

/// Half-open index range [start, end) into one series' value vector.
struct Segment {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - start; }
};

/// Best split found inside one segment: the index of the first element of the
/// right part and the divergence there.
struct SplitCandidate {
    std::size_t tau = 0;
    double qhat = 0.0;
};

/// Sample energy divergence between two samples,
///
///   Q(X,Y;a) = (mn/(m+n)) * [ (2/(mn)) * sum_ij |x_i - y_j|^a
///                             - (2/m^2) * sum_{i<k} |x_i - x_k|^a
///                             - (2/n^2) * sum_{j<k} |y_j - y_k|^a ]
///
/// with the within-sample terms normalized over all m^2 (n^2) ordered pairs,
/// so Q(X,X;a) == 0 and Q >= 0 for a in (0,2]. Symmetric in x and y, bit-exact.
double divergence(std::span<const double> x, std::span<const double> y, double alpha);

/// Scans all admissible split positions of `segment` (both sides at least
/// config.min_segment long) and returns the tau maximizing the divergence
/// between the two sides; ties go to the smallest tau. Returns nullopt when
/// the segment is shorter than 2*min_segment.
std::optional<SplitCandidate> best_split(std::span<const double> values, Segment segment,
                                         const DetectionConfig& config);

/// Permutation significance of an observed split divergence:
///   p = (1 + #{trials with best-split qhat >= observed}) / (permutations + 1).
/// Each trial shuffles the values of `segment` only (conditional test) with a
/// seed derived from (config.seed, segment, trial index), so the result is
/// deterministic and independent of evaluation order. p is in [1/(R+1), 1].
double permutation_pvalue(std::span<const double> values, Segment segment,
                          double observed_qhat, const DetectionConfig& config);

/// Hierarchical divisive change-point detection over a series. Repeatedly
/// takes the strongest admissible split across all current segments, accepts
/// it when its permutation p-value is at most config.p_threshold, and stops at
/// the first insignificant candidate. Accepted splits whose relative mean
/// change is below config.magnitude_threshold are dropped from the result.
/// Returned change points are sorted by index.
std::vector<ChangePoint> detect(const Series& series, const DetectionConfig& config);

} // namespace perfdrift

#include "perfdrift/edivisive.hpp"

#include "perfdrift/errors.hpp"
#include "perfdrift/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace perfdrift {

namespace {

// |d|^alpha with fast paths for the common exponents.
struct AlphaPow {
    double alpha;

    double operator()(double d) const {
        const double a = std::fabs(d);
        if (alpha == 1.0) return a;
        if (alpha == 2.0) return a * a;
        return std::pow(a, alpha);
    }
};

void check_alpha(double alpha) {
    if (!(alpha > 0.0) || !(alpha <= 2.0))
        fail(ErrorCode::invalid_argument, "alpha must be in (0, 2]");
}

double qhat_from_sums(long double cross, long double within_left, long double within_right,
                      std::size_t m_size, std::size_t n_size) {
    const long double m = static_cast<long double>(m_size);
    const long double n = static_cast<long double>(n_size);
    const long double bracket =
        2.0L * cross / (m * n) - 2.0L * within_left / (m * m) - 2.0L * within_right / (n * n);
    return static_cast<double>(m * n / (m + n) * bracket);
}

// Best split of values[s, e) with extended-precision running sums. The scan
// moves one element from the right part to the left part per step, updating
// the three pair sums in O(e - s); the whole scan is O((e - s)^2).
std::optional<SplitCandidate> scan_best_split(const double* values, std::size_t s,
                                              std::size_t e, std::size_t min_segment,
                                              const AlphaPow& pw) {
    const std::size_t len = e - s;
    if (len < 2 * min_segment) return std::nullopt;

    const std::size_t first_tau = s + min_segment;
    const std::size_t last_tau = e - min_segment;

    long double within_left = 0.0L;
    long double within_right = 0.0L;
    long double cross = 0.0L;
    for (std::size_t i = s; i < first_tau; ++i)
        for (std::size_t k = i + 1; k < first_tau; ++k) within_left += pw(values[i] - values[k]);
    for (std::size_t j = first_tau; j < e; ++j)
        for (std::size_t k = j + 1; k < e; ++k) within_right += pw(values[j] - values[k]);
    for (std::size_t i = s; i < first_tau; ++i)
        for (std::size_t j = first_tau; j < e; ++j) cross += pw(values[i] - values[j]);

    SplitCandidate best{first_tau, qhat_from_sums(cross, within_left, within_right,
                                                  first_tau - s, e - first_tau)};
    for (std::size_t tau = first_tau + 1; tau <= last_tau; ++tau) {
        const double moved = values[tau - 1];
        long double gain = 0.0L;
        long double loss = 0.0L;
        for (std::size_t i = s; i + 1 < tau; ++i) gain += pw(values[i] - moved);
        for (std::size_t j = tau; j < e; ++j) loss += pw(moved - values[j]);
        within_left += gain;
        within_right -= loss;
        cross += loss - gain;
        const double q = qhat_from_sums(cross, within_left, within_right, tau - s, e - tau);
        if (q > best.qhat) best = {tau, q};
    }
    return best;
}

void check_segment(Segment segment, std::size_t n) {
    if (segment.start >= segment.end || segment.end > n)
        fail(ErrorCode::invalid_argument, "segment [" + std::to_string(segment.start) + ", " +
                                              std::to_string(segment.end) +
                                              ") out of range for " + std::to_string(n) +
                                              " values");
}

} // namespace

double divergence(std::span<const double> x, std::span<const double> y, double alpha) {
    check_alpha(alpha);
    if (x.size() < 2 || y.size() < 2)
        fail(ErrorCode::too_short, "divergence needs at least 2 values per sample");

    // Canonical argument order (longer first; lexicographic on equal length)
    // so that swapping x and y sums identical terms in an identical order and
    // the result is bit-for-bit symmetric.
    std::span<const double> a = x;
    std::span<const double> b = y;
    const bool swap_args =
        a.size() < b.size() ||
        (a.size() == b.size() &&
         std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end()));
    if (swap_args) std::swap(a, b);

    const AlphaPow pw{alpha};
    long double cross = 0.0L;
    long double within_a = 0.0L;
    long double within_b = 0.0L;
    for (double av : a)
        for (double bv : b) cross += pw(av - bv);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = i + 1; k < a.size(); ++k) within_a += pw(a[i] - a[k]);
    for (std::size_t j = 0; j < b.size(); ++j)
        for (std::size_t k = j + 1; k < b.size(); ++k) within_b += pw(b[j] - b[k]);

    return qhat_from_sums(cross, within_a, within_b, a.size(), b.size());
}

std::optional<SplitCandidate> best_split(std::span<const double> values, Segment segment,
                                         const DetectionConfig& config) {
    check_alpha(config.alpha);
    check_segment(segment, values.size());
    if (config.min_segment < 2) fail(ErrorCode::invalid_argument, "min_segment must be >= 2");
    return scan_best_split(values.data(), segment.start, segment.end,
                           static_cast<std::size_t>(config.min_segment),
                           AlphaPow{config.alpha});
}

double permutation_pvalue(std::span<const double> values, Segment segment,
                          double observed_qhat, const DetectionConfig& config) {
    check_alpha(config.alpha);
    check_segment(segment, values.size());
    if (config.permutations < 1)
        fail(ErrorCode::invalid_argument, "permutations must be >= 1");

    const AlphaPow pw{config.alpha};
    const std::size_t min_segment = static_cast<std::size_t>(config.min_segment);
    const std::size_t len = segment.length();
    std::vector<double> buffer(len);

    int exceedances = 0;
    for (int trial = 0; trial < config.permutations; ++trial) {
        std::copy(values.begin() + static_cast<std::ptrdiff_t>(segment.start),
                  values.begin() + static_cast<std::ptrdiff_t>(segment.end), buffer.begin());
        SplitMix64 rng(derive_seed(config.seed, segment.start, segment.end,
                                   static_cast<std::uint64_t>(trial)));
        for (std::size_t i = len - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
            std::swap(buffer[i], buffer[j]);
        }
        const auto candidate = scan_best_split(buffer.data(), 0, len, min_segment, pw);
        const double trial_qhat = candidate ? candidate->qhat : 0.0;
        if (trial_qhat >= observed_qhat) ++exceedances;
    }
    return static_cast<double>(1 + exceedances) / static_cast<double>(config.permutations + 1);
}

std::vector<ChangePoint> detect(const Series& series, const DetectionConfig& config) {
    config.validate();

    const std::vector<double> values = series.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            fail(ErrorCode::invalid_series,
                 "non-finite value at index " + std::to_string(i));
    }

    const std::size_t n = values.size();
    const std::size_t min_segment = static_cast<std::size_t>(config.min_segment);
    std::vector<ChangePoint> result;
    if (n < 2 * min_segment) return result;

    struct OpenSegment {
        Segment segment;
        std::optional<SplitCandidate> candidate;
    };
    const auto make_open = [&](Segment seg) {
        return OpenSegment{seg, best_split(values, seg, config)};
    };

    std::vector<OpenSegment> segments;
    segments.push_back(make_open({0, n}));

    struct Accepted {
        std::size_t tau;
        double qhat;
        double p_value;
    };
    std::vector<Accepted> accepted;

    while (true) {
        // Strongest candidate across all open segments; ties to smallest tau.
        const OpenSegment* strongest = nullptr;
        for (const auto& open : segments) {
            if (!open.candidate) continue;
            if (!strongest || open.candidate->qhat > strongest->candidate->qhat ||
                (open.candidate->qhat == strongest->candidate->qhat &&
                 open.candidate->tau < strongest->candidate->tau)) {
                strongest = &open;
            }
        }
        if (!strongest) break;

        const Segment seg = strongest->segment;
        const SplitCandidate cand = *strongest->candidate;
        const double p = permutation_pvalue(values, seg, cand.qhat, config);
        if (p > config.p_threshold) break;  // first insignificant candidate stops the recursion

        accepted.push_back({cand.tau, cand.qhat, p});
        for (auto it = segments.begin(); it != segments.end(); ++it) {
            if (it->segment.start == seg.start && it->segment.end == seg.end) {
                segments.erase(it);
                break;
            }
        }
        segments.push_back(make_open({seg.start, cand.tau}));
        segments.push_back(make_open({cand.tau, seg.end}));
    }

    std::sort(accepted.begin(), accepted.end(),
              [](const Accepted& a, const Accepted& b) { return a.tau < b.tau; });

    // Magnitude over the final segmentation: each change point is compared
    // between its neighbouring inter-change-point segments.
    const auto segment_mean = [&](std::size_t from, std::size_t to) {
        long double sum = 0.0L;
        for (std::size_t i = from; i < to; ++i) sum += values[i];
        return static_cast<double>(sum / static_cast<long double>(to - from));
    };

    for (std::size_t i = 0; i < accepted.size(); ++i) {
        const std::size_t prev = i == 0 ? 0 : accepted[i - 1].tau;
        const std::size_t next = i + 1 == accepted.size() ? n : accepted[i + 1].tau;
        const double mean_before = segment_mean(prev, accepted[i].tau);
        const double mean_after = segment_mean(accepted[i].tau, next);

        double magnitude;
        if (mean_before != 0.0) {
            magnitude = mean_after / mean_before - 1.0;
        } else if (mean_after == 0.0) {
            magnitude = 0.0;
        } else {
            magnitude = std::copysign(std::numeric_limits<double>::infinity(), mean_after);
        }
        if (std::fabs(magnitude) < config.magnitude_threshold) continue;

        ChangePoint cp;
        cp.index = accepted[i].tau;
        cp.before_commit = series.points[accepted[i].tau - 1].commit;
        cp.after_commit = series.points[accepted[i].tau].commit;
        cp.qhat = accepted[i].qhat;
        cp.p_value = accepted[i].p_value;
        cp.magnitude = magnitude;
        result.push_back(std::move(cp));
    }
    return result;
}

} // namespace perfdrift

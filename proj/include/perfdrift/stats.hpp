#pragma once

#include "perfdrift/model.hpp"

#include <string>
#include <vector>

namespace perfdrift {

/// One sample handed to the statistical tests. Values must be finite.
struct SampleVector {
    std::vector<double> values;
    std::string label;
};

/// Shapiro-Wilk normality test per Royston's AS R94 algorithm (normal order
/// statistic weights, transformed-W normal approximation), valid for
/// 3 <= n <= 5000. Returns w in (0,1] and an approximate p-value; a w close
/// to 1 is consistent with normal data.
StatTestResult shapiro_wilk(const SampleVector& x);

/// Paired t-test on the elementwise differences d = x - y:
/// t = mean(d)/(sd(d)/sqrt(n)), df = n-1, two-sided p. Degenerate inputs:
/// all-zero differences return t=0, p=1; identical nonzero differences are a
/// degenerate-difference error (a fabricated p=0 would silently pass the
/// significance rule).
StatTestResult paired_t_test(const SampleVector& x, const SampleVector& y);

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
/// freedom; the fallback when the two series have different lengths.
StatTestResult welch_t_test(const SampleVector& x, const SampleVector& y);

/// Upper-tail probability P(T > t) of Student's t distribution, computed via
/// the regularized incomplete beta function. Accurate to ~1e-10 for
/// df <= 1000 and converges to the normal tail for large df.
double student_t_sf(double t, double df);

/// Standard normal upper tail P(Z > z).
double normal_sf(double z);

/// Standard normal quantile (inverse CDF) for p in (0, 1).
double normal_quantile(double p);

} // namespace perfdrift

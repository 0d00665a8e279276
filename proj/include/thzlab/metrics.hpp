#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "thzlab/matrices.hpp"

namespace thzlab {

/// Normalized network availability: the fraction of users whose assigned AP
/// is visible.
inline double availability(const AssociationMatrix& a, const VisibilityMatrix& v) {
  if (a.n_users != v.n_users || a.n_aps != v.n_aps) {
    throw std::invalid_argument("availability: dimension mismatch");
  }
  int covered = 0;
  for (int i = 0; i < a.n_users; ++i) {
    if (v.at(i, a.ap_of(i))) ++covered;
  }
  return static_cast<double>(covered) / a.n_users;
}

/// Normalized reconfiguration overhead: the fraction of users whose assigned
/// AP changed since the previous slot.
inline double reconfig_overhead(const AssociationMatrix& now, const AssociationMatrix& prev) {
  if (now.n_users != prev.n_users || now.n_aps != prev.n_aps) {
    throw std::invalid_argument("reconfig_overhead: dimension mismatch");
  }
  int changed = 0;
  for (int i = 0; i < now.n_users; ++i) {
    if (now.ap_of(i) != prev.ap_of(i)) ++changed;
  }
  return static_cast<double>(changed) / now.n_users;
}

/// Micro-averaged confusion counts with the visible class as positive.
struct PrAccumulator {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  void add(double prob, bool truth, double class_threshold = 0.5) {
    const bool positive = prob >= class_threshold;
    if (positive && truth) ++tp;
    else if (positive && !truth) ++fp;
    else if (!positive && truth) ++fn;
    else ++tn;
  }
  double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn); }
};

inline std::pair<double, double> precision_recall(std::span<const float> probs,
                                                  std::span<const std::uint8_t> truth,
                                                  double class_threshold = 0.5) {
  if (probs.size() != truth.size()) {
    throw std::invalid_argument("precision_recall: shape mismatch");
  }
  PrAccumulator acc;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc.add(probs[k], truth[k] != 0, class_threshold);
  }
  return {acc.precision(), acc.recall()};
}

namespace detail {

/// Standard-normal quantile (Acklam's rational approximation, |err| < 1e-9).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p outside (0, 1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) return -normal_quantile(1.0 - p);
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// Normal-approximation confidence interval over per-slot samples:
/// mean +- z * sd / sqrt(n) with the sample standard deviation. z is pinned
/// to 1.96 at the default 0.95 level. When clip_unit is set the interval is
/// clipped to [0, 1] (for metrics that are fractions).
inline std::pair<double, double> confidence_interval(std::span<const double> samples,
                                                     double level = 0.95,
                                                     bool clip_unit = false) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("confidence_interval: need at least 2 samples");
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double z = level == 0.95 ? 1.96 : detail::normal_quantile(0.5 + level / 2.0);
  const double half = z * sd / std::sqrt(static_cast<double>(n));
  double lo = mean - half;
  double hi = mean + half;
  if (clip_unit) {
    lo = std::clamp(lo, 0.0, 1.0);
    hi = std::clamp(hi, 0.0, 1.0);
  }
  return {lo, hi};
}

inline double mean_of(std::span<const double> samples) {
  double sum = 0.0;
  for (double s : samples) sum += s;
  return samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
}

/// Evaluation summary for one policy on one scenario.
struct MetricsReport {
  double availability_mean = 0.0;
  double availability_ci_lo = 0.0;
  double availability_ci_hi = 0.0;
  double reconfig_mean = 0.0;
  double reconfig_ci_lo = 0.0;
  double reconfig_ci_hi = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::vector<double> availability_series;
  std::vector<double> reconfig_series;
};

inline MetricsReport make_report(std::vector<double> availability_series,
                                 std::vector<double> reconfig_series, double precision,
                                 double recall, double level = 0.95) {
  MetricsReport r;
  r.availability_mean = mean_of(availability_series);
  r.reconfig_mean = mean_of(reconfig_series);
  auto [alo, ahi] = confidence_interval(availability_series, level, /*clip_unit=*/true);
  r.availability_ci_lo = alo;
  r.availability_ci_hi = ahi;
  auto [rlo, rhi] = confidence_interval(reconfig_series, level, /*clip_unit=*/true);
  r.reconfig_ci_lo = rlo;
  r.reconfig_ci_hi = rhi;
  r.precision = precision;
  r.recall = recall;
  r.availability_series = std::move(availability_series);
  r.reconfig_series = std::move(reconfig_series);
  return r;
}

}  // namespace thzlab

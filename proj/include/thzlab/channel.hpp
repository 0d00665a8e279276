#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "thzlab/rng.hpp"

namespace thzlab {

/// Log-distance pathloss parameters (defaults: indoor 0.14 THz band) and the
/// coverage threshold.
struct PathlossParams {
  double gamma = 2.117;   // pathloss exponent
  double d0 = 0.35;       // reference distance, m
  double pl_d0 = 25.0;    // pathloss at d0, dB
  double sigma = 0.5712;  // shadow fading standard deviation, dB
  double p_th = 55.0;     // coverage threshold, dB
};

inline double pathloss_db(double d, const PathlossParams& p, double shadow_db = 0.0) {
  if (!(d > 0.0)) throw std::domain_error("pathloss_db: distance must be positive");
  return p.pl_d0 + 10.0 * p.gamma * std::log10(d / p.d0) + shadow_db;
}

inline double sample_shadow(const PathlossParams& p, RngStream& rng) {
  return p.sigma > 0.0 ? rng.normal(0.0, p.sigma) : 0.0;
}

/// A terminal is covered while its pathloss stays strictly below p_th.
inline bool in_coverage(double d, const PathlossParams& p, double shadow_db = 0.0) {
  return pathloss_db(d, p, shadow_db) < p.p_th;
}

/// Distance at which the zero-shadow pathloss reaches p_th.
inline double coverage_boundary(const PathlossParams& p) {
  return p.d0 * std::pow(10.0, (p.p_th - p.pl_d0) / (10.0 * p.gamma));
}

/// Received-signal proxy for the signal-based baselines: -pathloss for a
/// line-of-sight link, no value at all when the link is geometrically
/// blocked (a blocked THz link carries no usable signal).
inline std::optional<double> signal_dbm_proxy(double d, const PathlossParams& p,
                                              double shadow_db, bool blocked) {
  if (blocked) return std::nullopt;
  return -pathloss_db(d, p, shadow_db);
}

/// Shadow-fading source: i.i.d. N(0, sigma^2) draws keyed by (slot, user,
/// ap). Keyed addressing makes online simulation and offline replay of the
/// same seeded scenario see identical shadow values.
struct ShadowField {
  double sigma = 0.5712;
  std::uint64_t seed = 0;
  bool enabled = true;

  double at(std::int64_t slot, int user, int ap) const {
    if (!enabled || sigma <= 0.0) return 0.0;
    return normal_at(mix_seed(seed, static_cast<std::uint64_t>(slot),
                              static_cast<std::uint64_t>(user), static_cast<std::uint64_t>(ap)),
                     sigma);
  }

  static ShadowField off() { return {0.0, 0, false}; }
};

}  // namespace thzlab

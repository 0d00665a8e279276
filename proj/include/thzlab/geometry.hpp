#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace thzlab {

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Point3 operator+(const Point3& a, const Point3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline Point3 operator-(const Point3& a, const Point3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline Point3 operator-(const Point3& a) { return {-a.x, -a.y, -a.z}; }
inline Point3 operator*(double s, const Point3& p) { return {s * p.x, s * p.y, s * p.z}; }
inline double dot(const Point3& a, const Point3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline Point3 cross(const Point3& a, const Point3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Point3& p) { return std::sqrt(dot(p, p)); }
inline double distance(const Point3& a, const Point3& b) { return norm(b - a); }

/// Upright solid cylinder standing on the floor (z spans [0, height]),
/// the obstacle cast by one pedestrian's body.
struct BodyCylinder {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.20;
  double height = 1.80;
  int owner_user = -1;  // index of the carrying user, -1 when unowned
};

/// Beam propagation region between a transmitter and a receiver: two cones
/// with apexes at tx and rx, axes aligned on the tx-rx line, joined at the
/// mid-plane where both base radii equal (|rx-tx|/2)*tan(aperture/2).
struct BeamRegion {
  Point3 tx;
  Point3 rx;
  double aperture_deg = 2.5;  // full cone angle, in (0, 180)
};

/// Penetration shallower than this counts as grazing contact, not blockage.
inline constexpr double kContactEps = 1e-9;

/// Cross-section radius of the bicone at arc length s along the axis from tx.
/// Zero at both apexes, maximal at the midpoint.
inline double bicone_radius_at(const BeamRegion& region, double s) {
  const double d = distance(region.tx, region.rx);
  if (!(s >= 0.0 && s <= d)) {
    throw std::domain_error("bicone_radius_at: s outside [0, axis length]");
  }
  return std::min(s, d - s) * std::tan(deg2rad(region.aperture_deg) / 2.0);
}

namespace detail {

/// Distance in the xy-plane from point (px,py) to segment [(ax,ay),(bx,by)].
inline double xy_segment_distance(double px, double py, double ax, double ay, double bx,
                                  double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = ax + t * dx - px;
  const double ey = ay + t * dy - py;
  return std::sqrt(ex * ex + ey * ey);
}

}  // namespace detail

/// True iff the closed segment [a, b] penetrates the solid finite cylinder.
/// The xy-projection is clipped against the disc first; the z-range of the
/// clipped span is then tested against [0, height].
inline bool segment_hits_cylinder(const Point3& a, const Point3& b, const BodyCylinder& c) {
  const double r = c.radius - kContactEps;
  if (r <= 0.0) return false;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double px = a.x - c.center_x;
  const double py = a.y - c.center_y;
  const double qa = dx * dx + dy * dy;
  const double qc = px * px + py * py - r * r;
  double t1 = 0.0;
  double t2 = 1.0;
  if (qa <= 1e-30) {  // vertical in xy: inside the disc or not at all
    if (qc > 0.0) return false;
  } else {
    const double qb = px * dx + py * dy;
    const double disc = qb * qb - qa * qc;
    if (disc <= 0.0) return false;
    const double sq = std::sqrt(disc);
    t1 = (-qb - sq) / qa;
    t2 = (-qb + sq) / qa;
    if (t2 < 0.0 || t1 > 1.0) return false;
    t1 = std::max(t1, 0.0);
    t2 = std::min(t2, 1.0);
  }
  const double z1 = a.z + t1 * (b.z - a.z);
  const double z2 = a.z + t2 * (b.z - a.z);
  return std::min(z1, z2) < c.height - kContactEps && std::max(z1, z2) > kContactEps;
}

inline bool segment_clear(const Point3& a, const Point3& b,
                          std::span<const BodyCylinder> bodies) {
  for (const auto& body : bodies) {
    if (segment_hits_cylinder(a, b, body)) return false;
  }
  return true;
}

/// Strict interior test, with the same grazing tolerance as the segment
/// test: a point on the wall (like the terminal on its carrier's torso) is
/// not contained.
inline bool cylinder_contains(const BodyCylinder& c, const Point3& p) {
  const double r = c.radius - kContactEps;
  if (r <= 0.0) return false;
  const double dx = p.x - c.center_x;
  const double dy = p.y - c.center_y;
  return dx * dx + dy * dy < r * r && p.z > kContactEps && p.z < c.height - kContactEps;
}

/// Finite-ray visibility test for the bicone beam region. The sampled set is
/// the axis segment tx->rx plus, for each of ring_rays equally spaced points
/// p_k on the mid-plane circle, the two-segment path tx -> p_k -> rx. The
/// link is blocked only when every sampled path is intercepted by at least
/// one body; partial interception still permits communication.
///
/// A body that strictly contains an endpoint does not intercept: rays
/// originate at the antennas, and an obstacle enclosing its own ray origin
/// would blank the entire sphere. That state only arises when the
/// interpenetrating mobility model walks one pedestrian through another.
inline bool link_visible(const Point3& tx, const Point3& rx, double aperture_deg,
                         std::span<const BodyCylinder> bodies, int ring_rays) {
  for (const auto& body : bodies) {
    if (cylinder_contains(body, tx) || cylinder_contains(body, rx)) {
      std::vector<BodyCylinder> kept;
      kept.reserve(bodies.size());
      for (const auto& b : bodies) {
        if (!cylinder_contains(b, tx) && !cylinder_contains(b, rx)) kept.push_back(b);
      }
      return link_visible(tx, rx, aperture_deg, kept, ring_rays);
    }
  }
  if (segment_clear(tx, rx, bodies)) return true;
  if (ring_rays <= 0) return false;
  const double d = distance(tx, rx);
  const double mid_radius = 0.5 * d * std::tan(deg2rad(aperture_deg) / 2.0);
  // Frame perpendicular to the axis. The sign canonicalization makes the
  // sampled point set identical when tx and rx are swapped.
  Point3 n = (1.0 / d) * (rx - tx);
  if (n.x < 0.0 || (n.x == 0.0 && (n.y < 0.0 || (n.y == 0.0 && n.z < 0.0)))) n = -n;
  const Point3 helper = std::abs(n.z) < 0.9 ? Point3{0.0, 0.0, 1.0} : Point3{1.0, 0.0, 0.0};
  Point3 u = cross(n, helper);
  u = (1.0 / norm(u)) * u;
  const Point3 w = cross(n, u);
  const Point3 mid = 0.5 * (tx + rx);
  for (int k = 0; k < ring_rays; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / ring_rays;
    const Point3 p = mid + (mid_radius * std::cos(theta)) * u + (mid_radius * std::sin(theta)) * w;
    if (segment_clear(tx, p, bodies) && segment_clear(p, rx, bodies)) return true;
  }
  return false;
}

/// Bodies whose xy-distance to the tx-rx chord exceeds radius + mid_radius
/// cannot touch any sampled path (every path stays within mid_radius of the
/// chord); they may be culled before calling link_visible.
inline bool body_near_link(const Point3& tx, const Point3& rx, double aperture_deg,
                           const BodyCylinder& body) {
  const double d = distance(tx, rx);
  const double mid_radius = 0.5 * d * std::tan(deg2rad(aperture_deg) / 2.0);
  const double reach = body.radius + mid_radius + 1e-9;
  return detail::xy_segment_distance(body.center_x, body.center_y, tx.x, tx.y, rx.x, rx.y) <=
         reach;
}

}  // namespace thzlab

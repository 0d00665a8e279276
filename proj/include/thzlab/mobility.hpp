#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "thzlab/geometry.hpp"
#include "thzlab/rng.hpp"

namespace thzlab {

struct RoomBounds {
  double width = 20.0;
  double depth = 20.0;
  double height = 2.4;
};

enum class MotionPhase { moving, paused };

/// One pedestrian under the random-waypoint model. `position` is the body
/// base on the floor (z = 0); `rotation_deg` is the facing direction around
/// z measured from the +x axis, normalized to [0, 360).
struct UserState {
  Point3 position;
  double rotation_deg = 0.0;
  double height = 1.80;
  double target_x = 0.0;
  double target_y = 0.0;
  MotionPhase phase = MotionPhase::moving;
  double pause_remaining = 0.0;  // seconds, meaningful while paused
  double speed = 1.4;            // m/s
};

inline double normalize_deg(double deg) {
  deg = std::fmod(deg, 360.0);
  return deg < 0.0 ? deg + 360.0 : deg;
}

inline double bearing_deg(double from_x, double from_y, double to_x, double to_y) {
  return normalize_deg(std::atan2(to_y - from_y, to_x - from_x) * 180.0 / std::numbers::pi);
}

inline constexpr double kDefaultHeights[] = {1.60, 1.80};
inline constexpr double kChestDrop = 0.45;     // chest height = body height - this
inline constexpr double kDeviceOffset = 0.20;  // terminal held this far in front of the chest
inline constexpr double kDefaultPauseMin = 0.5;
inline constexpr double kDefaultPauseMax = 5.0;
/// Waypoints keep this wall clearance (one body radius) so the pedestrian's
/// torso, and the terminal in front of it, stay inside the room.
inline constexpr double kDefaultWallMargin = 0.20;

namespace detail {

inline double draw_coord(RngStream& rng, double side, double margin) {
  const double m = 2.0 * margin < side ? margin : 0.0;
  return rng.uniform(m, side - m);
}

}  // namespace detail

/// Fresh pedestrian: uniform floor position, height drawn from `heights`,
/// uniform first waypoint, facing it. The draw order (x, y, height, target x,
/// target y) is part of the determinism contract.
inline UserState spawn(const RoomBounds& bounds, RngStream& rng,
                       std::span<const double> heights = kDefaultHeights, double speed = 1.4,
                       double wall_margin = kDefaultWallMargin) {
  if (heights.empty()) throw std::invalid_argument("spawn: heights set is empty");
  UserState s;
  s.position.x = detail::draw_coord(rng, bounds.width, wall_margin);
  s.position.y = detail::draw_coord(rng, bounds.depth, wall_margin);
  s.position.z = 0.0;
  s.height = heights[rng.uniform_index(heights.size())];
  s.target_x = detail::draw_coord(rng, bounds.width, wall_margin);
  s.target_y = detail::draw_coord(rng, bounds.depth, wall_margin);
  s.rotation_deg = bearing_deg(s.position.x, s.position.y, s.target_x, s.target_y);
  s.phase = MotionPhase::moving;
  s.speed = speed;
  return s;
}

/// Advances one slot. Paused users count down and, on expiry, draw a new
/// waypoint and snap their rotation to face it. Moving users advance
/// speed*dt toward the target in a straight line, clamping at the target and
/// entering a uniform [pause_min, pause_max] pause when they reach it.
inline UserState step(UserState s, double dt, const RoomBounds& bounds, RngStream& rng,
                      double pause_min = kDefaultPauseMin, double pause_max = kDefaultPauseMax,
                      double wall_margin = kDefaultWallMargin) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (s.phase == MotionPhase::paused) {
    s.pause_remaining -= dt;
    if (s.pause_remaining <= 0.0) {
      s.pause_remaining = 0.0;
      s.target_x = detail::draw_coord(rng, bounds.width, wall_margin);
      s.target_y = detail::draw_coord(rng, bounds.depth, wall_margin);
      s.rotation_deg = bearing_deg(s.position.x, s.position.y, s.target_x, s.target_y);
      s.phase = MotionPhase::moving;
    }
    return s;
  }
  const double dx = s.target_x - s.position.x;
  const double dy = s.target_y - s.position.y;
  const double dist = std::hypot(dx, dy);
  const double step_len = s.speed * dt;
  if (dist <= step_len) {
    s.position.x = s.target_x;
    s.position.y = s.target_y;
    s.phase = MotionPhase::paused;
    s.pause_remaining = rng.uniform(pause_min, pause_max);
  } else {
    s.position.x += step_len * dx / dist;
    s.position.y += step_len * dy / dist;
    // unchanged direction mathematically; recomputed to keep the
    // rotation-faces-target invariant exact
    s.rotation_deg = bearing_deg(s.position.x, s.position.y, s.target_x, s.target_y);
  }
  return s;
}

/// Terminal position: kDeviceOffset in front of the chest, at chest height.
inline Point3 device_position(const UserState& s) {
  const double phi = deg2rad(s.rotation_deg);
  return {s.position.x + kDeviceOffset * std::cos(phi),
          s.position.y + kDeviceOffset * std::sin(phi), s.height - kChestDrop};
}

inline BodyCylinder body_of(const UserState& s, int owner, double radius = 0.20) {
  return {s.position.x, s.position.y, radius, s.height, owner};
}

}  // namespace thzlab

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "thzlab/channel.hpp"
#include "thzlab/dataset.hpp"
#include "thzlab/geometry.hpp"
#include "thzlab/matrices.hpp"
#include "thzlab/mobility.hpp"
#include "thzlab/rng.hpp"

namespace thzlab {

struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string field_name, const std::string& what)
      : std::runtime_error(field_name + ": " + what), field(std::move(field_name)) {}
};

/// Everything that defines one simulated world. Defaults are the reference
/// indoor scenario: 20 m square room, 2.4 m ceiling, APs on a 2 m grid
/// (121 APs), 2.5 degree aperture, 0.2 s slots.
struct ScenarioConfig {
  RoomBounds room;
  double ap_grid_spacing = 2.0;
  std::vector<Point3> ap_positions;  // explicit layout; empty selects the grid
  double aperture_deg = 2.5;
  double slot_dt = 0.2;
  double duration = 1000.0;
  int n_users = 5;
  double speed = 1.4;
  double pause_min = kDefaultPauseMin;
  double pause_max = kDefaultPauseMax;
  std::vector<double> heights{1.60, 1.80};
  PathlossParams pathloss;
  int ring_rays = 8;
  double body_radius = 0.20;
  bool shadow_enabled = true;
  std::uint64_t seed = 1;
};

struct ApLayout {
  std::vector<Point3> positions;  // all at z = room height
  int count() const { return static_cast<int>(positions.size()); }
};

/// APs at the crossings of a square grid mesh on the ceiling, borders
/// included; spacing must divide both room sides.
inline ApLayout grid_layout(const RoomBounds& room, double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("ap_grid_spacing", "must be positive");
  const auto steps = [&](double side) {
    const double n = side / spacing;
    const auto rounded = static_cast<std::int64_t>(std::llround(n));
    if (rounded < 1 || std::abs(n - static_cast<double>(rounded)) > 1e-9) {
      throw ConfigError("ap_grid_spacing", "does not divide the room side");
    }
    return rounded;
  };
  const std::int64_t nx = steps(room.width);
  const std::int64_t ny = steps(room.depth);
  ApLayout layout;
  layout.positions.reserve((nx + 1) * (ny + 1));
  for (std::int64_t ix = 0; ix <= nx; ++ix) {
    for (std::int64_t iy = 0; iy <= ny; ++iy) {
      layout.positions.push_back({ix * spacing, iy * spacing, room.height});
    }
  }
  return layout;
}

inline ApLayout make_layout(const ScenarioConfig& cfg) {
  if (!cfg.ap_positions.empty()) return ApLayout{cfg.ap_positions};
  return grid_layout(cfg.room, cfg.ap_grid_spacing);
}

inline std::int64_t slot_count(double duration, double slot_dt) {
  return static_cast<std::int64_t>(std::floor(duration / slot_dt + 1e-9));
}

inline void validate(const ScenarioConfig& cfg) {
  if (!(cfg.room.width > 0.0)) throw ConfigError("room.width", "must be positive");
  if (!(cfg.room.depth > 0.0)) throw ConfigError("room.depth", "must be positive");
  if (!(cfg.room.height > 0.0)) throw ConfigError("room.height", "must be positive");
  if (!(cfg.slot_dt > 0.0)) throw ConfigError("slot_dt", "must be positive");
  if (cfg.duration < cfg.slot_dt) throw ConfigError("duration", "must cover at least one slot");
  if (cfg.n_users < 1) throw ConfigError("n_users", "must be at least 1");
  if (!(cfg.speed > 0.0)) throw ConfigError("speed", "must be positive");
  if (!(cfg.pause_min >= 0.0) || cfg.pause_max < cfg.pause_min) {
    throw ConfigError("pause_range", "must satisfy 0 <= min <= max");
  }
  if (cfg.heights.empty()) throw ConfigError("heights", "must list at least one height");
  if (!(cfg.aperture_deg > 0.0 && cfg.aperture_deg < 180.0)) {
    throw ConfigError("aperture_deg", "must lie in (0, 180)");
  }
  if (cfg.ring_rays < 0) throw ConfigError("ring_rays", "must be nonnegative");
  if (!(cfg.body_radius > 0.0)) throw ConfigError("body_radius", "must be positive");
  if (!(cfg.pathloss.d0 > 0.0)) throw ConfigError("pathloss.d0", "must be positive");
  if (cfg.pathloss.sigma < 0.0) throw ConfigError("pathloss.sigma", "must be nonnegative");
  if (!(cfg.pathloss.p_th > cfg.pathloss.pl_d0)) {
    throw ConfigError("pathloss.p_th", "must exceed pathloss at the reference distance");
  }
  for (const Point3& ap : cfg.ap_positions) {
    if (ap.x < 0 || ap.x > cfg.room.width || ap.y < 0 || ap.y > cfg.room.depth || ap.z < 0 ||
        ap.z > cfg.room.height) {
      throw ConfigError("ap_positions", "AP outside the room");
    }
  }
}

inline std::vector<BodyCylinder> body_set(std::span<const UserState> users, double radius) {
  std::vector<BodyCylinder> bodies;
  bodies.reserve(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    bodies.push_back(body_of(users[i], static_cast<int>(i), radius));
  }
  return bodies;
}

inline ShadowField shadow_field_for(const ScenarioConfig& cfg) {
  return {cfg.pathloss.sigma, mix_seed(cfg.seed, kShadowStream), cfg.shadow_enabled};
}

/// All N x M visibilities at one slot: line of sight through the body set
/// (self-blockage included; the owner's body participates like any other)
/// combined with coverage under the keyed shadow draw for (slot, i, j).
inline VisibilityMatrix evaluate_visibility(std::span<const UserState> users,
                                            const ApLayout& layout, const ScenarioConfig& cfg,
                                            std::int64_t slot, const ShadowField& shadow) {
  const auto bodies = body_set(users, cfg.body_radius);
  VisibilityMatrix vis(static_cast<int>(users.size()), layout.count());
  std::vector<BodyCylinder> near;
  near.reserve(bodies.size());
  for (int i = 0; i < static_cast<int>(users.size()); ++i) {
    const Point3 device = device_position(users[i]);
    for (int j = 0; j < layout.count(); ++j) {
      const Point3& ap = layout.positions[j];
      near.clear();
      for (const auto& body : bodies) {
        if (body_near_link(device, ap, cfg.aperture_deg, body)) near.push_back(body);
      }
      if (!link_visible(device, ap, cfg.aperture_deg, near, cfg.ring_rays)) continue;
      const double dist = distance(device, ap);
      if (in_coverage(dist, cfg.pathloss, shadow.at(slot, i, j))) vis.set(i, j, true);
    }
  }
  return vis;
}

/// Headless world loop. Deterministic for a given seed: per-user mobility
/// streams are derived from the master seed, so are the shadow draws.
/// Each slot steps every user by slot_dt and then records poses plus per-AP
/// distance-or-blocked observations.
inline Dataset run(const ScenarioConfig& cfg) {
  validate(cfg);
  const ApLayout layout = make_layout(cfg);
  const std::int64_t slots = slot_count(cfg.duration, cfg.slot_dt);

  std::vector<RngStream> mobility_rng;
  std::vector<UserState> users;
  mobility_rng.reserve(cfg.n_users);
  users.reserve(cfg.n_users);
  for (int i = 0; i < cfg.n_users; ++i) {
    mobility_rng.emplace_back(mix_seed(cfg.seed, kMobilityStream, static_cast<std::uint64_t>(i)));
    users.push_back(spawn(cfg.room, mobility_rng.back(), cfg.heights, cfg.speed, cfg.body_radius));
  }

  Dataset data;
  data.n_users = cfg.n_users;
  data.n_aps = layout.count();
  data.n_slots = slots;
  data.records.reserve(static_cast<std::size_t>(slots) * cfg.n_users);

  std::vector<BodyCylinder> near;
  near.reserve(cfg.n_users);
  for (std::int64_t t = 0; t < slots; ++t) {
    for (int i = 0; i < cfg.n_users; ++i) {
      users[i] = step(users[i], cfg.slot_dt, cfg.room, mobility_rng[i], cfg.pause_min,
                      cfg.pause_max, cfg.body_radius);
    }
    const auto bodies = body_set(users, cfg.body_radius);
    for (int i = 0; i < cfg.n_users; ++i) {
      SlotRecord rec;
      rec.slot = t;
      rec.user = i;
      rec.x = users[i].position.x;
      rec.y = users[i].position.y;
      rec.z = users[i].position.z;
      rec.rot_deg = users[i].rotation_deg;
      rec.ap_obs.resize(layout.count());
      const Point3 device = device_position(users[i]);
      for (int j = 0; j < layout.count(); ++j) {
        const Point3& ap = layout.positions[j];
        near.clear();
        for (const auto& body : bodies) {
          if (body_near_link(device, ap, cfg.aperture_deg, body)) near.push_back(body);
        }
        rec.ap_obs[j] = link_visible(device, ap, cfg.aperture_deg, near, cfg.ring_rays)
                            ? distance(device, ap)
                            : kBlockedObs;
      }
      data.records.push_back(std::move(rec));
    }
  }
  return data;
}

}  // namespace thzlab

#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "thzlab/experiment.hpp"
#include "thzlab/simulator.hpp"

namespace thzlab {

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError(where + "." + key, "unknown field");
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

/// Scenario block; every field defaults to the reference scenario, so an
/// empty object is a valid config.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig cfg;
  detail::reject_unknown_keys(
      j,
      {"room", "ap_grid_spacing", "ap_positions", "aperture_deg", "slot_dt", "duration",
       "n_users", "speed", "pause_range", "heights", "pathloss", "ring_rays", "body_radius",
       "shadow_enabled", "seed"},
      "scenario");
  if (j.contains("room")) {
    const auto& r = j.at("room");
    detail::reject_unknown_keys(r, {"width", "depth", "height"}, "scenario.room");
    detail::read_field(r, "width", cfg.room.width);
    detail::read_field(r, "depth", cfg.room.depth);
    detail::read_field(r, "height", cfg.room.height);
  }
  detail::read_field(j, "ap_grid_spacing", cfg.ap_grid_spacing);
  if (j.contains("ap_positions")) {
    for (const auto& p : j.at("ap_positions")) {
      cfg.ap_positions.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                                  p.at(2).get<double>()});
    }
  }
  detail::read_field(j, "aperture_deg", cfg.aperture_deg);
  detail::read_field(j, "slot_dt", cfg.slot_dt);
  detail::read_field(j, "duration", cfg.duration);
  detail::read_field(j, "n_users", cfg.n_users);
  detail::read_field(j, "speed", cfg.speed);
  if (j.contains("pause_range")) {
    const auto& p = j.at("pause_range");
    if (!p.is_array() || p.size() != 2) {
      throw ConfigError("scenario.pause_range", "expected [min, max]");
    }
    cfg.pause_min = p.at(0).get<double>();
    cfg.pause_max = p.at(1).get<double>();
  }
  if (j.contains("heights")) cfg.heights = j.at("heights").get<std::vector<double>>();
  if (j.contains("pathloss")) {
    const auto& p = j.at("pathloss");
    detail::reject_unknown_keys(p, {"gamma", "d0", "pl_d0", "sigma", "p_th"},
                                "scenario.pathloss");
    detail::read_field(p, "gamma", cfg.pathloss.gamma);
    detail::read_field(p, "d0", cfg.pathloss.d0);
    detail::read_field(p, "pl_d0", cfg.pathloss.pl_d0);
    detail::read_field(p, "sigma", cfg.pathloss.sigma);
    detail::read_field(p, "p_th", cfg.pathloss.p_th);
  }
  detail::read_field(j, "ring_rays", cfg.ring_rays);
  detail::read_field(j, "body_radius", cfg.body_radius);
  detail::read_field(j, "shadow_enabled", cfg.shadow_enabled);
  detail::read_field(j, "seed", cfg.seed);
  return cfg;
}

inline FeatureSpec features_from_json(const nlohmann::json& j) {
  FeatureSpec spec;
  detail::reject_unknown_keys(j,
                              {"history_h", "preset", "include_own_position",
                               "include_own_rotation", "include_others_position",
                               "include_others_rotation", "max_users"},
                              "features");
  detail::read_field(j, "history_h", spec.history_h);
  if (j.contains("preset")) spec = feature_preset(j.at("preset").get<int>(), spec.history_h);
  detail::read_field(j, "include_own_position", spec.include_own_position);
  detail::read_field(j, "include_own_rotation", spec.include_own_rotation);
  detail::read_field(j, "include_others_position", spec.include_others_position);
  detail::read_field(j, "include_others_rotation", spec.include_others_rotation);
  detail::read_field(j, "max_users", spec.max_users);
  return spec;
}

inline TrainConfig train_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  detail::reject_unknown_keys(j, {"epochs", "learning_rate", "batch_size", "seed"}, "train");
  detail::read_field(j, "epochs", cfg.epochs);
  detail::read_field(j, "learning_rate", cfg.learning_rate);
  detail::read_field(j, "batch_size", cfg.batch_size);
  detail::read_field(j, "seed", cfg.seed);
  return cfg;
}

inline PolicyParams policy_from_json(const nlohmann::json& j) {
  PolicyParams p;
  detail::reject_unknown_keys(j, {"threshold_t", "hysteresis_db", "hom_db", "ttt_slots"},
                              "policy");
  detail::read_field(j, "threshold_t", p.threshold_t);
  detail::read_field(j, "hysteresis_db", p.hysteresis_db);
  detail::read_field(j, "hom_db", p.hom_db);
  detail::read_field(j, "ttt_slots", p.ttt_slots);
  return p;
}

/// Top-level experiment config. A single "seed" fans out into independent
/// scenario / training / policy streams; explicit per-block seeds override.
inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(
      j, {"scenario", "features", "train", "policy", "policies", "hidden_dim", "seed"},
      "config");
  ExperimentConfig cfg;
  std::uint64_t master = 1;
  detail::read_field(j, "seed", master);
  derive_seeds(cfg, master);
  if (j.contains("scenario")) {
    const std::uint64_t derived = cfg.scenario.seed;
    cfg.scenario = scenario_from_json(j.at("scenario"));
    if (!j.at("scenario").contains("seed")) cfg.scenario.seed = derived;
  }
  if (j.contains("features")) cfg.features = features_from_json(j.at("features"));
  if (j.contains("train")) {
    const std::uint64_t derived = cfg.train.seed;
    cfg.train = train_from_json(j.at("train"));
    if (!j.at("train").contains("seed")) cfg.train.seed = derived;
  }
  if (j.contains("policy")) cfg.policy = policy_from_json(j.at("policy"));
  if (j.contains("policies")) {
    cfg.policies.clear();
    for (const auto& name : j.at("policies")) {
      cfg.policies.push_back(parse_policy(name.get<std::string>()));
    }
  }
  detail::read_field(j, "hidden_dim", cfg.hidden_dim);
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  nlohmann::json j;
  in >> j;
  return experiment_from_json(j);
}

}  // namespace thzlab

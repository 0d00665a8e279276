#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "thzlab/channel.hpp"
#include "thzlab/matrices.hpp"
#include "thzlab/mobility.hpp"

namespace thzlab {

/// Blocked-link sentinel in the per-AP observation column.
inline constexpr double kBlockedObs = -1.0;

/// One logged observation: a user's pose at a slot plus, per AP, the
/// terminal-to-AP distance when the link has line of sight, or the blocked
/// sentinel otherwise. Coverage is not applied here; it is derived
/// downstream from the distance and the pathloss threshold.
struct SlotRecord {
  std::int64_t slot = 0;
  int user = 0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double rot_deg = 0.0;
  std::vector<double> ap_obs;

  bool blocked(int j) const { return ap_obs[j] < 0.0; }
};

/// Full simulation log, slot-major then user-minor, with slots contiguous
/// from zero.
struct Dataset {
  int n_users = 0;
  int n_aps = 0;
  std::int64_t n_slots = 0;
  std::vector<SlotRecord> records;

  const SlotRecord& at(std::int64_t slot, int user) const {
    return records[static_cast<std::size_t>(slot) * n_users + user];
  }
};

struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(std::size_t line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// CSV serialization. Header is fixed to slot,user,x,y,z,rot_deg,ap_0..ap_{M-1};
// distances and pose fields carry six decimals; blocked links print as -1.
// ---------------------------------------------------------------------------

inline void write_csv(const Dataset& d, std::ostream& out) {
  std::string buf;
  buf.reserve(64);
  out << "slot,user,x,y,z,rot_deg";
  for (int j = 0; j < d.n_aps; ++j) out << ",ap_" << j;
  out << '\n';
  char field[64];
  for (const SlotRecord& r : d.records) {
    int n = std::snprintf(field, sizeof field, "%lld,%d,%.6f,%.6f,%.6f,%.6f",
                          static_cast<long long>(r.slot), r.user, r.x, r.y, r.z, r.rot_deg);
    out.write(field, n);
    for (double obs : r.ap_obs) {
      if (obs < 0.0) {
        out.write(",-1", 3);
      } else {
        n = std::snprintf(field, sizeof field, ",%.6f", obs);
        out.write(field, n);
      }
    }
    out.put('\n');
  }
}

inline void write_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  write_csv(d, out);
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

namespace detail {

inline double parse_double(const char*& p, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(p, &end);
  if (end == p) throw ParseError(line_no, "expected a number");
  p = end;
  return v;
}

inline void expect_comma(const char*& p, std::size_t line_no) {
  if (*p != ',') throw ParseError(line_no, "expected ','");
  ++p;
}

}  // namespace detail

inline Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("read_csv: empty input");
  if (line.rfind("slot,user,x,y,z,rot_deg", 0) != 0) {
    throw SchemaError("read_csv: unexpected header: " + line);
  }
  int n_aps = 0;
  for (std::size_t pos = line.find(",ap_"); pos != std::string::npos;
       pos = line.find(",ap_", pos + 1)) {
    ++n_aps;
  }
  if (n_aps == 0) throw SchemaError("read_csv: header lists no AP columns");

  Dataset d;
  d.n_aps = n_aps;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const char* p = line.c_str();
    SlotRecord r;
    r.slot = static_cast<std::int64_t>(detail::parse_double(p, line_no));
    detail::expect_comma(p, line_no);
    r.user = static_cast<int>(detail::parse_double(p, line_no));
    detail::expect_comma(p, line_no);
    r.x = detail::parse_double(p, line_no);
    detail::expect_comma(p, line_no);
    r.y = detail::parse_double(p, line_no);
    detail::expect_comma(p, line_no);
    r.z = detail::parse_double(p, line_no);
    detail::expect_comma(p, line_no);
    r.rot_deg = detail::parse_double(p, line_no);
    r.ap_obs.reserve(n_aps);
    while (*p == ',') {
      ++p;
      r.ap_obs.push_back(detail::parse_double(p, line_no));
    }
    if (*p != '\0' && *p != '\r') throw ParseError(line_no, "trailing characters");
    if (static_cast<int>(r.ap_obs.size()) != n_aps) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(n_aps) + " AP columns, got " +
                        std::to_string(r.ap_obs.size()));
    }
    d.records.push_back(std::move(r));
  }
  if (d.records.empty()) throw SchemaError("read_csv: no records");

  // Infer and validate the slot-major, user-minor layout.
  int n_users = 0;
  while (n_users < static_cast<int>(d.records.size()) && d.records[n_users].slot == 0) {
    ++n_users;
  }
  if (n_users == 0 || d.records.size() % n_users != 0) {
    throw SchemaError("read_csv: records do not form complete slots");
  }
  d.n_users = n_users;
  d.n_slots = static_cast<std::int64_t>(d.records.size()) / n_users;
  for (std::int64_t t = 0; t < d.n_slots; ++t) {
    for (int i = 0; i < n_users; ++i) {
      const SlotRecord& r = d.records[static_cast<std::size_t>(t) * n_users + i];
      if (r.slot != t || r.user != i) {
        throw SchemaError("read_csv: rows out of order near slot " + std::to_string(t));
      }
    }
  }
  return d;
}

inline Dataset read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  return read_csv(in);
}

// ---------------------------------------------------------------------------
// Chronological splitting.
// ---------------------------------------------------------------------------

/// Contiguous slot range of a dataset; local slot s maps to base slot
/// first_slot + s. Records keep their original slot indices, which also key
/// the shadow field.
struct DatasetSlice {
  const Dataset* base = nullptr;
  std::int64_t first_slot = 0;
  std::int64_t n_slots = 0;

  int n_users() const { return base->n_users; }
  int n_aps() const { return base->n_aps; }
  const SlotRecord& at(std::int64_t local_slot, int user) const {
    return base->at(first_slot + local_slot, user);
  }
};

struct SplitView {
  DatasetSlice train;
  DatasetSlice val;
  DatasetSlice test;
};

/// 70 / 10 / 20 chronological split by slot count; floor for train and
/// validation, remainder to test. No shuffling.
inline SplitView split(const Dataset& d) {
  if (d.n_slots < 10) throw std::invalid_argument("split: need at least 10 slots");
  const std::int64_t n_train = 7 * d.n_slots / 10;
  const std::int64_t n_val = d.n_slots / 10;
  return {{&d, 0, n_train},
          {&d, n_train, n_val},
          {&d, n_train + n_val, d.n_slots - n_train - n_val}};
}

// ---------------------------------------------------------------------------
// Visibility derivation and feature assembly.
// ---------------------------------------------------------------------------

/// Per-AP visibility of one record: line of sight and within coverage.
inline std::vector<std::uint8_t> derive_visibility(const SlotRecord& rec,
                                                   const PathlossParams& pathloss,
                                                   const ShadowField& shadow) {
  std::vector<std::uint8_t> vis(rec.ap_obs.size(), 0);
  for (std::size_t j = 0; j < rec.ap_obs.size(); ++j) {
    const double obs = rec.ap_obs[j];
    if (obs < 0.0) continue;
    vis[j] = in_coverage(obs, pathloss, shadow.at(rec.slot, rec.user, static_cast<int>(j)))
                 ? 1
                 : 0;
  }
  return vis;
}

/// All-user visibility matrix at one local slot of a slice.
inline VisibilityMatrix visibility_at(const DatasetSlice& part, std::int64_t local_slot,
                                      const PathlossParams& pathloss,
                                      const ShadowField& shadow) {
  VisibilityMatrix m(part.n_users(), part.n_aps());
  for (int i = 0; i < part.n_users(); ++i) {
    const auto vis = derive_visibility(part.at(local_slot, i), pathloss, shadow);
    for (int j = 0; j < part.n_aps(); ++j) m.set(i, j, vis[j] != 0);
  }
  return m;
}

/// Input-variable selection for the predictor. The history window covers the
/// decision slot and the history_h - 1 slots before it.
struct FeatureSpec {
  int history_h = 1;
  bool include_own_position = false;
  bool include_own_rotation = false;
  bool include_others_position = false;
  bool include_others_rotation = false;
  int max_users = 0;  // pad "others" blocks to this user count; 0 = dataset's count
};

/// The four input-variable subsets used in the evaluation: 1 = visibilities
/// only; 2 = + own position; 3 = + own position and rotation; 4 =
/// visibilities plus positions and rotations of every user.
inline FeatureSpec feature_preset(int preset, int history_h = 1) {
  FeatureSpec spec;
  spec.history_h = history_h;
  switch (preset) {
    case 1:
      break;
    case 2:
      spec.include_own_position = true;
      break;
    case 3:
      spec.include_own_position = true;
      spec.include_own_rotation = true;
      break;
    case 4:
      spec.include_own_position = true;
      spec.include_own_rotation = true;
      spec.include_others_position = true;
      spec.include_others_rotation = true;
      break;
    default:
      throw std::invalid_argument("feature_preset: preset must be 1..4");
  }
  return spec;
}

inline int feature_width(const FeatureSpec& spec, int n_aps, int n_users_in_data) {
  const int h = spec.history_h;
  const int others = std::max(spec.max_users, n_users_in_data) - 1;
  int width = n_aps * h;
  if (spec.include_own_position) width += 2 * h;
  if (spec.include_own_rotation) width += 2 * h;
  if (spec.include_others_position) width += 2 * h * others;
  if (spec.include_others_rotation) width += 2 * h * others;
  return width;
}

/// Supervised samples in dense row-major form; row r of `features` pairs
/// with row r of `targets`. Rows are ordered user-major, then decision slot.
/// Feature layout per row: the visibility vectors at slots t, t-1, ...,
/// t-h+1, then (per flag, each block also newest-to-oldest) own position
/// scaled to [0,1] by the room dimensions, own rotation as (sin, cos),
/// other users' scaled positions and (sin, cos) rotations in ascending user
/// order, zero-padded to the configured width.
struct SampleSet {
  std::int64_t count = 0;
  int feature_dim = 0;
  int target_dim = 0;
  int n_users = 0;
  std::int64_t decisions_per_user = 0;
  std::int64_t first_decision_slot = 0;  // local slot of the first decision
  std::vector<float> features;
  std::vector<float> targets;

  std::span<const float> feature_row(std::int64_t r) const {
    return {features.data() + static_cast<std::size_t>(r) * feature_dim,
            static_cast<std::size_t>(feature_dim)};
  }
  std::span<const float> target_row(std::int64_t r) const {
    return {targets.data() + static_cast<std::size_t>(r) * target_dim,
            static_cast<std::size_t>(target_dim)};
  }
  std::int64_t row_index(int user, std::int64_t decision) const {
    return user * decisions_per_user + decision;
  }
};

inline SampleSet build_samples(const DatasetSlice& part, const FeatureSpec& spec,
                               const PathlossParams& pathloss, const ShadowField& shadow,
                               const RoomBounds& room) {
  const int h = spec.history_h;
  if (h < 1) throw std::invalid_argument("build_samples: history_h must be >= 1");
  const std::int64_t slots = part.n_slots;
  const int n = part.n_users();
  const int m = part.n_aps();
  if (slots < h + 1) {
    throw std::invalid_argument("build_samples: dataset part spans fewer than history_h + 1 slots");
  }

  // Derived visibility for every (slot, user), computed once.
  std::vector<std::uint8_t> vis(static_cast<std::size_t>(slots) * n * m);
  for (std::int64_t t = 0; t < slots; ++t) {
    for (int i = 0; i < n; ++i) {
      const auto row = derive_visibility(part.at(t, i), pathloss, shadow);
      std::memcpy(vis.data() + (static_cast<std::size_t>(t) * n + i) * m, row.data(), m);
    }
  }
  const auto vis_row = [&](std::int64_t t, int i) {
    return vis.data() + (static_cast<std::size_t>(t) * n + i) * m;
  };

  SampleSet out;
  out.feature_dim = feature_width(spec, m, n);
  out.target_dim = m;
  out.n_users = n;
  out.decisions_per_user = slots - h;
  out.first_decision_slot = h - 1;
  out.count = static_cast<std::int64_t>(n) * out.decisions_per_user;
  out.features.resize(static_cast<std::size_t>(out.count) * out.feature_dim);
  out.targets.resize(static_cast<std::size_t>(out.count) * out.target_dim);

  const int padded_others = std::max(spec.max_users, n) - 1;
  std::int64_t row = 0;
  for (int i = 0; i < n; ++i) {
    for (std::int64_t t = h - 1; t + 1 < slots; ++t, ++row) {
      float* f = out.features.data() + static_cast<std::size_t>(row) * out.feature_dim;
      for (int delta = 0; delta < h; ++delta) {
        const std::uint8_t* v = vis_row(t - delta, i);
        for (int j = 0; j < m; ++j) *f++ = static_cast<float>(v[j]);
      }
      if (spec.include_own_position) {
        for (int delta = 0; delta < h; ++delta) {
          const SlotRecord& r = part.at(t - delta, i);
          *f++ = static_cast<float>(r.x / room.width);
          *f++ = static_cast<float>(r.y / room.depth);
        }
      }
      if (spec.include_own_rotation) {
        for (int delta = 0; delta < h; ++delta) {
          const double phi = deg2rad(part.at(t - delta, i).rot_deg);
          *f++ = static_cast<float>(std::sin(phi));
          *f++ = static_cast<float>(std::cos(phi));
        }
      }
      if (spec.include_others_position) {
        for (int delta = 0; delta < h; ++delta) {
          int written = 0;
          for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            const SlotRecord& r = part.at(t - delta, k);
            *f++ = static_cast<float>(r.x / room.width);
            *f++ = static_cast<float>(r.y / room.depth);
            ++written;
          }
          for (; written < padded_others; ++written) {
            *f++ = 0.0f;
            *f++ = 0.0f;
          }
        }
      }
      if (spec.include_others_rotation) {
        for (int delta = 0; delta < h; ++delta) {
          int written = 0;
          for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            const double phi = deg2rad(part.at(t - delta, k).rot_deg);
            *f++ = static_cast<float>(std::sin(phi));
            *f++ = static_cast<float>(std::cos(phi));
            ++written;
          }
          for (; written < padded_others; ++written) {
            *f++ = 0.0f;
            *f++ = 0.0f;
          }
        }
      }
      float* y = out.targets.data() + static_cast<std::size_t>(row) * out.target_dim;
      const std::uint8_t* v_next = vis_row(t + 1, i);
      for (int j = 0; j < m; ++j) y[j] = static_cast<float>(v_next[j]);
    }
  }
  return out;
}

}  // namespace thzlab

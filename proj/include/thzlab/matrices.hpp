#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace thzlab {

/// Binary user x AP visibility indicators for one slot.
struct VisibilityMatrix {
  int n_users = 0;
  int n_aps = 0;
  std::vector<std::uint8_t> v;

  VisibilityMatrix() = default;
  VisibilityMatrix(int users, int aps)
      : n_users(users), n_aps(aps), v(static_cast<std::size_t>(users) * aps, 0) {}

  bool at(int i, int j) const { return v[static_cast<std::size_t>(i) * n_aps + j] != 0; }
  void set(int i, int j, bool value) {
    v[static_cast<std::size_t>(i) * n_aps + j] = value ? 1 : 0;
  }
  std::span<const std::uint8_t> row(int i) const {
    return {v.data() + static_cast<std::size_t>(i) * n_aps, static_cast<std::size_t>(n_aps)};
  }
};

/// User-to-AP assignment. Exactly one AP per user by construction: the
/// representation stores that AP's index, so every row sums to one.
struct AssociationMatrix {
  int n_users = 0;
  int n_aps = 0;
  std::vector<std::int32_t> assigned;

  AssociationMatrix() = default;
  AssociationMatrix(int users, int aps) : n_users(users), n_aps(aps), assigned(users, 0) {}

  int ap_of(int i) const { return assigned[i]; }
  int at(int i, int j) const { return assigned[i] == j ? 1 : 0; }
};

/// Per-user, per-AP predicted visibility probabilities.
struct PredictionMatrix {
  int n_users = 0;
  int n_aps = 0;
  std::vector<float> p;

  PredictionMatrix() = default;
  PredictionMatrix(int users, int aps)
      : n_users(users), n_aps(aps), p(static_cast<std::size_t>(users) * aps, 0.0f) {}

  float at(int i, int j) const { return p[static_cast<std::size_t>(i) * n_aps + j]; }
  void set(int i, int j, float value) { p[static_cast<std::size_t>(i) * n_aps + j] = value; }
  std::span<const float> row(int i) const {
    return {p.data() + static_cast<std::size_t>(i) * n_aps, static_cast<std::size_t>(n_aps)};
  }
};

/// Received-signal proxies in dB; NaN marks a link with no usable signal.
struct SignalMatrix {
  int n_users = 0;
  int n_aps = 0;
  std::vector<double> dbm;

  SignalMatrix() = default;
  SignalMatrix(int users, int aps)
      : n_users(users),
        n_aps(aps),
        dbm(static_cast<std::size_t>(users) * aps, std::numeric_limits<double>::quiet_NaN()) {}

  std::optional<double> at(int i, int j) const {
    const double s = dbm[static_cast<std::size_t>(i) * n_aps + j];
    if (std::isnan(s)) return std::nullopt;
    return s;
  }
  void set(int i, int j, std::optional<double> value) {
    dbm[static_cast<std::size_t>(i) * n_aps + j] =
        value ? *value : std::numeric_limits<double>::quiet_NaN();
  }
};

}  // namespace thzlab

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "thzlab/matrices.hpp"
#include "thzlab/rng.hpp"

namespace thzlab {

/// Knobs of the selection strategies. threshold_t is the visibility
/// probability advantage required to leave the current AP; hom_db and
/// ttt_slots parameterize the conditional-handover baseline.
struct PolicyParams {
  double threshold_t = 0.05;
  double hysteresis_db = 3.0;
  double hom_db = 3.0;
  int ttt_slots = 2;
};

namespace detail {

/// Lowest-index argmax over one prediction row.
inline int argmax_row(const PredictionMatrix& p, int user) {
  int best = 0;
  for (int j = 1; j < p.n_aps; ++j) {
    if (p.at(user, j) > p.at(user, best)) best = j;
  }
  return best;
}

/// Strongest AP with a usable signal, lowest index on ties; -1 when no AP
/// has a signal.
inline int strongest_signal(const SignalMatrix& s, int user) {
  int best = -1;
  double best_dbm = 0.0;
  for (int j = 0; j < s.n_aps; ++j) {
    const auto sig = s.at(user, j);
    if (!sig) continue;
    if (best < 0 || *sig > best_dbm) {
      best = j;
      best_dbm = *sig;
    }
  }
  return best;
}

inline int pick_visible(const VisibilityMatrix& v, int user, RngStream& rng) {
  std::vector<int> candidates;
  candidates.reserve(v.n_aps);
  for (int j = 0; j < v.n_aps; ++j) {
    if (v.at(user, j)) candidates.push_back(j);
  }
  if (candidates.empty()) return -1;
  return candidates[rng.uniform_index(candidates.size())];
}

}  // namespace detail

/// Probability-threshold selection: take the AP with the highest predicted
/// visibility probability unless its advantage over the current AP is below
/// threshold_t, in which case the current AP is kept. On the first slot
/// (current == nullptr) the argmax is taken outright.
inline AssociationMatrix select_proposed(const PredictionMatrix& p,
                                         const AssociationMatrix* current, double threshold_t) {
  if (!(threshold_t >= 0.0 && threshold_t <= 1.0)) {
    throw std::invalid_argument("select_proposed: threshold_t must lie in [0, 1]");
  }
  AssociationMatrix a(p.n_users, p.n_aps);
  for (int i = 0; i < p.n_users; ++i) {
    const int best = detail::argmax_row(p, i);
    if (current == nullptr) {
      a.assigned[i] = best;
      continue;
    }
    const int cur = current->assigned[i];
    a.assigned[i] = (p.at(i, best) - p.at(i, cur) < threshold_t) ? cur : best;
  }
  return a;
}

/// Assume next-slot visibility equals the current one: keep the current AP
/// while it is visible now, otherwise pick uniformly among currently visible
/// APs. With nothing visible the current AP is kept (availability is zero
/// that slot regardless).
inline AssociationMatrix select_naive(const VisibilityMatrix& v_now,
                                      const AssociationMatrix* current, RngStream& rng) {
  AssociationMatrix a(v_now.n_users, v_now.n_aps);
  for (int i = 0; i < v_now.n_users; ++i) {
    if (current != nullptr && v_now.at(i, current->assigned[i])) {
      a.assigned[i] = current->assigned[i];
      continue;
    }
    const int pick = detail::pick_visible(v_now, i, rng);
    a.assigned[i] = pick >= 0 ? pick : (current != nullptr ? current->assigned[i] : 0);
  }
  return a;
}

/// Classic received-signal handover: switch to the strongest AP when it
/// exceeds the current one by more than hysteresis_db, or immediately when
/// the current AP has no signal at all.
inline AssociationMatrix select_hysteresis(const SignalMatrix& signals,
                                           const AssociationMatrix* current,
                                           double hysteresis_db) {
  AssociationMatrix a(signals.n_users, signals.n_aps);
  for (int i = 0; i < signals.n_users; ++i) {
    const int strongest = detail::strongest_signal(signals, i);
    if (current == nullptr) {
      a.assigned[i] = strongest >= 0 ? strongest : 0;
      continue;
    }
    const int cur = current->assigned[i];
    if (strongest < 0) {
      a.assigned[i] = cur;
      continue;
    }
    const auto cur_sig = signals.at(i, cur);
    if (!cur_sig) {
      a.assigned[i] = strongest;
    } else {
      a.assigned[i] = (*signals.at(i, strongest) - hysteresis_db > *cur_sig) ? strongest : cur;
    }
  }
  return a;
}

/// Conditional-handover state: per-user serving AP plus per-candidate counts
/// of consecutive slots above serving + hom_db. Counters reset on handover.
struct HomTttState {
  int n_users = 0;
  int n_aps = 0;
  double hom_db = 3.0;
  int ttt_slots = 2;
  std::vector<std::int32_t> serving;    // -1 until first measurement
  std::vector<std::int32_t> counters;   // n_users x n_aps

  static HomTttState init(int users, int aps, double hom, int ttt) {
    HomTttState s;
    s.n_users = users;
    s.n_aps = aps;
    s.hom_db = hom;
    s.ttt_slots = ttt;
    s.serving.assign(users, -1);
    s.counters.assign(static_cast<std::size_t>(users) * aps, 0);
    return s;
  }
  std::int32_t& counter(int i, int j) { return counters[static_cast<std::size_t>(i) * n_aps + j]; }
};

/// Static HOM/TTT conditional handover: a candidate must exceed the serving
/// AP by hom_db for ttt_slots consecutive measurements to trigger a
/// handover; a serving AP with no signal triggers an immediate switch to the
/// strongest. All counters reset on every handover.
inline AssociationMatrix select_homttt(const SignalMatrix& signals, HomTttState& state) {
  AssociationMatrix a(signals.n_users, signals.n_aps);
  for (int i = 0; i < signals.n_users; ++i) {
    const int strongest = detail::strongest_signal(signals, i);
    const int cur = state.serving[i];
    const auto reset_counters = [&] {
      for (int j = 0; j < state.n_aps; ++j) state.counter(i, j) = 0;
    };
    if (strongest < 0) {  // no measurements at all this slot
      reset_counters();
      a.assigned[i] = cur >= 0 ? cur : 0;
      state.serving[i] = a.assigned[i];
      continue;
    }
    const auto cur_sig = cur >= 0 ? signals.at(i, cur) : std::nullopt;
    if (!cur_sig) {
      reset_counters();
      a.assigned[i] = strongest;
      state.serving[i] = strongest;
      continue;
    }
    int target = -1;
    for (int j = 0; j < state.n_aps; ++j) {
      if (j == cur) {
        state.counter(i, j) = 0;
        continue;
      }
      const auto sig = signals.at(i, j);
      if (sig && *sig > *cur_sig + state.hom_db) {
        ++state.counter(i, j);
        if (state.counter(i, j) >= state.ttt_slots &&
            (target < 0 || *sig > *signals.at(i, target))) {
          target = j;
        }
      } else {
        state.counter(i, j) = 0;
      }
    }
    if (target >= 0) {
      reset_counters();
      a.assigned[i] = target;
      state.serving[i] = target;
    } else {
      a.assigned[i] = cur;
    }
  }
  return a;
}

/// Idealized upper bound: sees the true next-slot visibility. Keeps the
/// current AP when it stays visible, otherwise picks uniformly among APs
/// visible next slot.
inline AssociationMatrix select_oracle(const VisibilityMatrix& v_next,
                                       const AssociationMatrix* current, RngStream& rng) {
  return select_naive(v_next, current, rng);
}

enum class PolicyKind { proposed, naive, hysteresis, homttt, oracle };

inline const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::proposed: return "proposed";
    case PolicyKind::naive: return "naive";
    case PolicyKind::hysteresis: return "hysteresis";
    case PolicyKind::homttt: return "homttt";
    case PolicyKind::oracle: return "oracle";
  }
  return "?";
}

inline PolicyKind parse_policy(const std::string& name) {
  if (name == "proposed") return PolicyKind::proposed;
  if (name == "naive") return PolicyKind::naive;
  if (name == "hysteresis") return PolicyKind::hysteresis;
  if (name == "homttt") return PolicyKind::homttt;
  if (name == "oracle") return PolicyKind::oracle;
  throw std::invalid_argument("unknown policy: " + name);
}

}  // namespace thzlab

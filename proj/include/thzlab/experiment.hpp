#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "thzlab/dataset.hpp"
#include "thzlab/metrics.hpp"
#include "thzlab/policies.hpp"
#include "thzlab/predictor.hpp"
#include "thzlab/simulator.hpp"

namespace thzlab {

/// One end-to-end experiment: a scenario to simulate, the predictor's
/// feature layout and training settings, and the policies to score.
struct ExperimentConfig {
  ScenarioConfig scenario;
  FeatureSpec features;  // preset 1 (visibilities only), H = 1 by default
  TrainConfig train;
  PolicyParams policy;
  std::vector<PolicyKind> policies{PolicyKind::proposed, PolicyKind::naive,
                                   PolicyKind::hysteresis, PolicyKind::homttt,
                                   PolicyKind::oracle};
  int hidden_dim = kDefaultHiddenDim;
  std::uint64_t policy_seed = 0;
};

/// Applies the master seed fan-out: scenario, training and policy draws get
/// independent derived streams.
inline void derive_seeds(ExperimentConfig& cfg, std::uint64_t master) {
  cfg.scenario.seed = mix_seed(master, kMobilityStream, 0xA11CEull);
  cfg.train.seed = mix_seed(master, kTrainStream, 0xA11CEull);
  cfg.policy_seed = mix_seed(master, kPolicyStream, 0xA11CEull);
}

struct TrainedPredictor {
  PredictionModel model;
  std::vector<EpochLoss> history;
};

namespace detail {

using FloatMap = Eigen::Map<const SampleMatrix<float>>;

inline FloatMap feature_map(const SampleSet& s) {
  return FloatMap(s.features.data(), s.count, s.feature_dim);
}
inline FloatMap target_map(const SampleSet& s) {
  return FloatMap(s.targets.data(), s.count, s.target_dim);
}

}  // namespace detail

/// Trains the predictor on the train split, monitoring the validation split.
inline TrainedPredictor train_predictor(const SplitView& parts, const FeatureSpec& features,
                                        const PathlossParams& pathloss, const ShadowField& shadow,
                                        const RoomBounds& room, const TrainConfig& cfg,
                                        int hidden_dim = kDefaultHiddenDim) {
  const SampleSet train_set = build_samples(parts.train, features, pathloss, shadow, room);
  const SampleSet val_set = build_samples(parts.val, features, pathloss, shadow, room);
  RngStream init_rng(mix_seed(cfg.seed, kTrainStream, 0x1247ull));
  TrainedPredictor out;
  out.model = init_model<float>(train_set.feature_dim, hidden_dim, train_set.target_dim, init_rng);
  out.history = train<float>(out.model, detail::feature_map(train_set),
                             detail::target_map(train_set), detail::feature_map(val_set),
                             detail::target_map(val_set), cfg);
  return out;
}

/// Per-policy evaluation outcome plus the predictor's test-set quality.
struct EvalOutcome {
  std::vector<std::pair<PolicyKind, MetricsReport>> per_policy;
  double precision = 0.0;
  double recall = 0.0;
  std::int64_t decisions = 0;

  const MetricsReport& report(PolicyKind kind) const {
    for (const auto& [k, r] : per_policy) {
      if (k == kind) return r;
    }
    throw std::invalid_argument("EvalOutcome: policy was not evaluated");
  }
};

namespace detail {

inline SignalMatrix signals_at(const DatasetSlice& part, std::int64_t local_slot,
                               const PathlossParams& pathloss, const ShadowField& shadow) {
  SignalMatrix s(part.n_users(), part.n_aps());
  for (int i = 0; i < part.n_users(); ++i) {
    const SlotRecord& rec = part.at(local_slot, i);
    for (int j = 0; j < part.n_aps(); ++j) {
      const double obs = rec.ap_obs[j];
      if (obs < 0.0) continue;
      s.set(i, j, -pathloss_db(obs, pathloss, shadow.at(rec.slot, rec.user, j)));
    }
  }
  return s;
}

}  // namespace detail

/// Replays the test slice slot by slot. At decision slot t each policy emits
/// the association for t+1 from its permitted inputs only: the proposed
/// policy sees model predictions computed from features up to t, the
/// signal-based baselines see signals at t, the naive baseline sees
/// visibility at t, and only the oracle sees visibility at t+1. Scoring is
/// availability against the true visibility at t+1 and reconfiguration
/// against the previous association.
inline EvalOutcome evaluate_policies(const DatasetSlice& test, const PredictionModel* model,
                                     const FeatureSpec& features, const PathlossParams& pathloss,
                                     const ShadowField& shadow, const RoomBounds& room,
                                     const PolicyParams& params,
                                     std::span<const PolicyKind> policies,
                                     std::uint64_t policy_seed) {
  const int n = test.n_users();
  const int m = test.n_aps();
  const int h = features.history_h;
  if (test.n_slots < h + 1) {
    throw std::invalid_argument("evaluate_policies: test slice shorter than history window + 1");
  }

  bool wants_proposed = false;
  for (PolicyKind kind : policies) wants_proposed |= kind == PolicyKind::proposed;
  if (wants_proposed && model == nullptr) {
    throw std::invalid_argument("evaluate_policies: the proposed policy needs a model");
  }

  // Predictions and test-set quality come from the same sample assembly the
  // trainer uses; rows are (user, decision) addressed.
  SampleSet samples;
  SampleMatrix<float> probs;
  EvalOutcome out;
  if (model != nullptr) {
    samples = build_samples(test, features, pathloss, shadow, room);
    if (samples.feature_dim != model->input_dim() || samples.target_dim != model->output_dim()) {
      throw std::invalid_argument(
          "evaluate_policies: model dimensions do not match the dataset/features");
    }
    probs = forward_batch<float>(*model, detail::feature_map(samples));
    PrAccumulator acc;
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
      for (int j = 0; j < m; ++j) acc.add(probs(r, j), samples.targets[r * m + j] != 0.0f);
    }
    out.precision = acc.precision();
    out.recall = acc.recall();
  }

  const std::int64_t first_decision = h - 1;
  const std::int64_t n_decisions = test.n_slots - h;
  out.decisions = n_decisions;
  if (n_decisions < 3) {
    throw std::invalid_argument("evaluate_policies: too few decision slots for meaningful CIs");
  }

  // Visibility at every needed slot, shared by scoring and policy inputs.
  std::vector<VisibilityMatrix> vis(test.n_slots);
  for (std::int64_t t = first_decision; t < test.n_slots; ++t) {
    vis[t] = visibility_at(test, t, pathloss, shadow);
  }

  struct PolicyRun {
    PolicyKind kind;
    std::optional<AssociationMatrix> current;
    HomTttState homttt;
    RngStream rng;
    std::vector<double> avail;
    std::vector<double> reconfig;
  };
  std::vector<PolicyRun> runs;
  for (std::size_t k = 0; k < policies.size(); ++k) {
    runs.push_back({policies[k],
                    std::nullopt,
                    HomTttState::init(n, m, params.hom_db, params.ttt_slots),
                    RngStream(mix_seed(policy_seed, kPolicyStream, static_cast<std::uint64_t>(
                                                                       policies[k]))),
                    {},
                    {}});
  }

  PredictionMatrix pred(n, m);
  for (std::int64_t d = 0; d < n_decisions; ++d) {
    const std::int64_t t = first_decision + d;
    std::optional<SignalMatrix> signals;  // built lazily, shared by both baselines
    for (PolicyRun& run : runs) {
      const AssociationMatrix* current = run.current ? &*run.current : nullptr;
      AssociationMatrix next;
      switch (run.kind) {
        case PolicyKind::proposed: {
          for (int i = 0; i < n; ++i) {
            const std::int64_t row = samples.row_index(i, d);
            for (int j = 0; j < m; ++j) pred.set(i, j, probs(row, j));
          }
          next = select_proposed(pred, current, params.threshold_t);
          break;
        }
        case PolicyKind::naive:
          next = select_naive(vis[t], current, run.rng);
          break;
        case PolicyKind::hysteresis:
          if (!signals) signals = detail::signals_at(test, t, pathloss, shadow);
          next = select_hysteresis(*signals, current, params.hysteresis_db);
          break;
        case PolicyKind::homttt:
          if (!signals) signals = detail::signals_at(test, t, pathloss, shadow);
          next = select_homttt(*signals, run.homttt);
          break;
        case PolicyKind::oracle:
          next = select_oracle(vis[t + 1], current, run.rng);
          break;
      }
      run.avail.push_back(availability(next, vis[t + 1]));
      if (run.current) run.reconfig.push_back(reconfig_overhead(next, *run.current));
      run.current = std::move(next);
    }
  }

  for (PolicyRun& run : runs) {
    out.per_policy.emplace_back(
        run.kind, make_report(std::move(run.avail), std::move(run.reconfig), out.precision,
                              out.recall));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps: one row per (axis point, policy), axis order preserved. Results
// CSV header is fixed.
// ---------------------------------------------------------------------------

struct SweepRow {
  std::string axis_value;
  std::string policy;
  double availability = 0.0;
  double avail_ci_lo = 0.0;
  double avail_ci_hi = 0.0;
  double reconfig = 0.0;
  double rec_ci_lo = 0.0;
  double rec_ci_hi = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

inline constexpr const char* kResultsHeader =
    "axis_value,policy,availability,avail_ci_lo,avail_ci_hi,reconfig,rec_ci_lo,rec_ci_hi,"
    "precision,recall";

inline void write_results_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << kResultsHeader << '\n';
  char buf[64];
  for (const SweepRow& r : rows) {
    out << r.axis_value << ',' << r.policy;
    for (double v : {r.availability, r.avail_ci_lo, r.avail_ci_hi, r.reconfig, r.rec_ci_lo,
                     r.rec_ci_hi, r.precision, r.recall}) {
      const int len = std::snprintf(buf, sizeof buf, ",%.6f", v);
      out.write(buf, len);
    }
    out << '\n';
  }
}

inline void write_results_csv(const std::string& path, std::span<const SweepRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_results_csv: cannot open " + path);
  write_results_csv(out, rows);
}

inline std::string format_axis_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

namespace detail {

inline void append_rows(std::vector<SweepRow>& rows, const std::string& axis_value,
                        const EvalOutcome& outcome) {
  for (const auto& [kind, report] : outcome.per_policy) {
    rows.push_back({axis_value, policy_name(kind), report.availability_mean,
                    report.availability_ci_lo, report.availability_ci_hi, report.reconfig_mean,
                    report.reconfig_ci_lo, report.reconfig_ci_hi, report.precision,
                    report.recall});
  }
}

}  // namespace detail

/// Simulate + train once per the config, reusing both across evaluations.
struct Pipeline {
  Dataset data;
  SplitView parts;
  ShadowField shadow;
  TrainedPredictor predictor;
  bool trained = false;

  Pipeline(Pipeline&&) = delete;  // parts holds pointers into data
  explicit Pipeline(const ExperimentConfig& cfg, bool want_model = true)
      : data(run(cfg.scenario)),
        parts(split(data)),
        shadow(shadow_field_for(cfg.scenario)) {
    if (want_model) {
      predictor = train_predictor(parts, cfg.features, cfg.scenario.pathloss, shadow,
                                  cfg.scenario.room, cfg.train, cfg.hidden_dim);
      trained = true;
    }
  }

  EvalOutcome evaluate(const ExperimentConfig& cfg) const {
    return evaluate_policies(parts.test, trained ? &predictor.model : nullptr, cfg.features,
                             cfg.scenario.pathloss, shadow, cfg.scenario.room, cfg.policy,
                             cfg.policies, cfg.policy_seed);
  }
};

/// Threshold axis: the dataset and model are shared across points; only the
/// selection rule changes.
inline std::vector<SweepRow> sweep_threshold(const ExperimentConfig& base,
                                             std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("sweep_threshold: no axis values");
  Pipeline pipe(base);
  std::vector<SweepRow> rows;
  for (double t : values) {
    ExperimentConfig cfg = base;
    cfg.policy.threshold_t = t;
    detail::append_rows(rows, format_axis_value(t), pipe.evaluate(cfg));
  }
  return rows;
}

/// History axis: one dataset, one retraining per H.
inline std::vector<SweepRow> sweep_history(const ExperimentConfig& base,
                                           std::span<const int> values) {
  if (values.empty()) throw std::invalid_argument("sweep_history: no axis values");
  Pipeline pipe(base, /*want_model=*/false);
  std::vector<SweepRow> rows;
  for (int h : values) {
    ExperimentConfig cfg = base;
    cfg.features.history_h = h;
    const TrainedPredictor trained =
        train_predictor(pipe.parts, cfg.features, cfg.scenario.pathloss, pipe.shadow,
                        cfg.scenario.room, cfg.train, cfg.hidden_dim);
    const EvalOutcome outcome = evaluate_policies(
        pipe.parts.test, &trained.model, cfg.features, cfg.scenario.pathloss, pipe.shadow,
        cfg.scenario.room, cfg.policy, cfg.policies, cfg.policy_seed);
    detail::append_rows(rows, std::to_string(h), outcome);
  }
  return rows;
}

/// Feature-subset axis (presets 1..4): one dataset, one retraining each.
inline std::vector<SweepRow> sweep_features(const ExperimentConfig& base,
                                            std::span<const int> presets) {
  if (presets.empty()) throw std::invalid_argument("sweep_features: no axis values");
  Pipeline pipe(base, /*want_model=*/false);
  std::vector<SweepRow> rows;
  for (int preset : presets) {
    ExperimentConfig cfg = base;
    cfg.features = feature_preset(preset, base.features.history_h);
    cfg.features.max_users = base.features.max_users;
    const TrainedPredictor trained =
        train_predictor(pipe.parts, cfg.features, cfg.scenario.pathloss, pipe.shadow,
                        cfg.scenario.room, cfg.train, cfg.hidden_dim);
    const EvalOutcome outcome = evaluate_policies(
        pipe.parts.test, &trained.model, cfg.features, cfg.scenario.pathloss, pipe.shadow,
        cfg.scenario.room, cfg.policy, cfg.policies, cfg.policy_seed);
    detail::append_rows(rows, std::to_string(preset), outcome);
  }
  return rows;
}

/// User-count axis: a full re-simulation and retraining per point, each with
/// a seed derived from the base scenario seed and the point index.
inline std::vector<SweepRow> sweep_users(const ExperimentConfig& base,
                                         std::span<const int> values) {
  if (values.empty()) throw std::invalid_argument("sweep_users: no axis values");
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < values.size(); ++k) {
    ExperimentConfig cfg = base;
    cfg.scenario.n_users = values[k];
    cfg.scenario.seed = mix_seed(base.scenario.seed, 0x5EEDull, static_cast<std::uint64_t>(k));
    Pipeline pipe(cfg);
    detail::append_rows(rows, std::to_string(values[k]), pipe.evaluate(cfg));
  }
  return rows;
}

/// Duration axis: a full re-simulation and retraining per point.
inline std::vector<SweepRow> sweep_duration(const ExperimentConfig& base,
                                            std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("sweep_duration: no axis values");
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < values.size(); ++k) {
    ExperimentConfig cfg = base;
    cfg.scenario.duration = values[k];
    cfg.scenario.seed = mix_seed(base.scenario.seed, 0xD0ull, static_cast<std::uint64_t>(k));
    Pipeline pipe(cfg);
    detail::append_rows(rows, format_axis_value(values[k]), pipe.evaluate(cfg));
  }
  return rows;
}

}  // namespace thzlab

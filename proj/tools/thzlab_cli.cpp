// Command-line front end: simulate datasets, train the visibility predictor,
// evaluate and compare AP-selection policies, and run parameter sweeps.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thzlab/config_json.hpp"
#include "thzlab/experiment.hpp"

namespace {

using namespace thzlab;

std::string resolve_out(const std::string& path) {
  if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
  const char* dir = std::getenv("THZLAB_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return path;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / path).string();
}

ExperimentConfig load_config(const std::string& config_path) {
  if (config_path.empty()) {
    ExperimentConfig cfg;
    derive_seeds(cfg, 1);
    return cfg;
  }
  return load_experiment_config(config_path);
}

struct CommonOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<int> users;

  void apply(ExperimentConfig& cfg) const {
    if (seed) derive_seeds(cfg, *seed);
    if (duration) cfg.scenario.duration = *duration;
    if (users) cfg.scenario.n_users = *users;
  }
  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed (fans out to all random streams)");
    cmd->add_option("--duration", duration, "Simulated duration in seconds");
    cmd->add_option("--users", users, "Number of users");
  }
};

void write_loss_csv(const std::string& path, const std::vector<EpochLoss>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "epoch,train_loss,val_loss\n";
  char buf[96];
  for (std::size_t e = 0; e < history.size(); ++e) {
    const int len = std::snprintf(buf, sizeof buf, "%zu,%.8f,%.8f\n", e + 1, history[e].train,
                                  history[e].val);
    out.write(buf, len);
  }
}

void print_policy_table(const EvalOutcome& outcome) {
  std::printf("%-12s %-12s %-17s %-12s %-17s\n", "policy", "availability", "95% CI", "reconfig",
              "95% CI");
  for (const auto& [kind, r] : outcome.per_policy) {
    std::printf("%-12s %-12.4f [%.4f, %.4f]  %-12.4f [%.4f, %.4f]\n", policy_name(kind),
                r.availability_mean, r.availability_ci_lo, r.availability_ci_hi, r.reconfig_mean,
                r.reconfig_ci_lo, r.reconfig_ci_hi);
  }
  if (outcome.precision > 0.0 || outcome.recall > 0.0) {
    std::printf("predictor: precision %.4f, recall %.4f over %lld decision slots\n",
                outcome.precision, outcome.recall, static_cast<long long>(outcome.decisions));
  }
}

std::vector<SweepRow> rows_for_outcome(const std::string& axis_value, const EvalOutcome& o) {
  std::vector<SweepRow> rows;
  for (const auto& [kind, r] : o.per_policy) {
    rows.push_back({axis_value, policy_name(kind), r.availability_mean, r.availability_ci_lo,
                    r.availability_ci_hi, r.reconfig_mean, r.reconfig_ci_lo, r.reconfig_ci_hi,
                    r.precision, r.recall});
  }
  return rows;
}

int cmd_simulate(const std::string& config_path, const CommonOverrides& overrides,
                 const std::string& out_path) {
  ExperimentConfig cfg = load_config(config_path);
  overrides.apply(cfg);
  const Dataset data = run(cfg.scenario);
  write_csv(data, resolve_out(out_path));
  std::printf("wrote %s: %lld slots, %d users, %d APs\n", out_path.c_str(),
              static_cast<long long>(data.n_slots), data.n_users, data.n_aps);
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& model_path, const std::string& loss_path,
              std::optional<int> history, std::optional<int> preset,
              std::optional<int> epochs) {
  ExperimentConfig cfg = load_config(config_path);
  if (preset) cfg.features = feature_preset(*preset, cfg.features.history_h);
  if (history) cfg.features.history_h = *history;
  if (epochs) cfg.train.epochs = *epochs;

  const Dataset data = read_csv(data_path);
  const SplitView parts = split(data);
  std::printf("split: %lld train / %lld val / %lld test slots (70/10/20)\n",
              static_cast<long long>(parts.train.n_slots),
              static_cast<long long>(parts.val.n_slots),
              static_cast<long long>(parts.test.n_slots));
  const ShadowField shadow = shadow_field_for(cfg.scenario);
  const TrainedPredictor trained =
      train_predictor(parts, cfg.features, cfg.scenario.pathloss, shadow, cfg.scenario.room,
                      cfg.train, cfg.hidden_dim);
  save_model(resolve_out(model_path), trained.model, cfg.features);
  if (!loss_path.empty()) write_loss_csv(resolve_out(loss_path), trained.history);
  std::printf("trained %d epochs; final train loss %.6f, val loss %.6f; model -> %s\n",
              cfg.train.epochs, trained.history.back().train, trained.history.back().val,
              model_path.c_str());
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& data_path,
                 const std::string& model_path, const std::string& policies_arg,
                 std::optional<double> threshold, const std::string& out_path,
                 const std::string& axis_value) {
  ExperimentConfig cfg = load_config(config_path);
  if (threshold) cfg.policy.threshold_t = *threshold;
  if (policies_arg != "all") {
    cfg.policies.clear();
    std::string token;
    for (std::istringstream names(policies_arg); std::getline(names, token, ',');) {
      cfg.policies.push_back(parse_policy(token));
    }
  }

  const Dataset data = read_csv(data_path);
  const SplitView parts = split(data);
  const ShadowField shadow = shadow_field_for(cfg.scenario);

  std::optional<ModelFile> model;
  for (PolicyKind kind : cfg.policies) {
    if (kind == PolicyKind::proposed && model_path.empty()) {
      throw std::runtime_error("the proposed policy needs --model");
    }
  }
  if (!model_path.empty()) {
    model = load_model(model_path);
    cfg.features = model->features;
  }

  const EvalOutcome outcome = evaluate_policies(
      parts.test, model ? &model->model : nullptr, cfg.features, cfg.scenario.pathloss, shadow,
      cfg.scenario.room, cfg.policy, cfg.policies, cfg.policy_seed);
  print_policy_table(outcome);
  if (!out_path.empty()) {
    write_results_csv(resolve_out(out_path), rows_for_outcome(axis_value, outcome));
    std::printf("results -> %s\n", out_path.c_str());
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values_arg, const std::string& out_path) {
  ExperimentConfig cfg = load_config(config_path);
  std::vector<double> values;
  std::string token;
  for (std::istringstream vs(values_arg); std::getline(vs, token, ',');) {
    if (!token.empty()) values.push_back(std::stod(token));
  }

  std::vector<SweepRow> rows;
  if (axis == "threshold") {
    rows = sweep_threshold(cfg, values);
  } else if (axis == "history") {
    std::vector<int> ints(values.begin(), values.end());
    rows = sweep_history(cfg, ints);
  } else if (axis == "users") {
    std::vector<int> ints(values.begin(), values.end());
    rows = sweep_users(cfg, ints);
  } else if (axis == "duration") {
    rows = sweep_duration(cfg, values);
  } else if (axis == "features") {
    std::vector<int> ints(values.begin(), values.end());
    rows = sweep_features(cfg, ints);
  } else {
    throw CLI::ValidationError("--axis",
                               "unknown axis (use threshold|history|users|duration|features)");
  }
  write_results_csv(resolve_out(out_path), rows);
  std::printf("sweep over %s: %zu rows -> %s\n", axis.c_str(), rows.size(), out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"THz access-network visibility lab: blockage simulation, visibility "
               "prediction and AP-selection policy evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string data_path;
  std::string model_path;
  std::string out_path;
  std::string loss_path;
  std::string policies_arg = "all";
  std::string axis;
  std::string values_arg;
  std::string axis_value = "0";
  std::optional<int> history;
  std::optional<int> preset;
  std::optional<int> epochs;
  std::optional<double> threshold;
  CommonOverrides overrides;

  auto* simulate = app.add_subcommand("simulate", "Generate a blockage dataset CSV");
  simulate->add_option("--config", config_path, "Experiment config JSON");
  simulate->add_option("--out", out_path, "Output dataset CSV")->required();
  overrides.attach(simulate);

  auto* train = app.add_subcommand("train", "Train the visibility predictor on a dataset");
  train->add_option("--config", config_path, "Experiment config JSON");
  train->add_option("--data", data_path, "Dataset CSV")->required();
  train->add_option("--model", model_path, "Output model file")->required();
  train->add_option("--loss-csv", loss_path, "Per-epoch loss log CSV");
  train->add_option("--history", history, "History window H");
  train->add_option("--features", preset, "Feature preset 1..4");
  train->add_option("--epochs", epochs, "Training epochs");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate AP-selection policies on a dataset");
  evaluate->add_option("--config", config_path, "Experiment config JSON");
  evaluate->add_option("--data", data_path, "Dataset CSV")->required();
  evaluate->add_option("--model", model_path, "Trained model file");
  evaluate->add_option("--policies", policies_arg, "Comma list or 'all'");
  evaluate->add_option("--threshold", threshold, "Selection threshold T");
  evaluate->add_option("--out", out_path, "Results CSV");
  evaluate->add_option("--axis-value", axis_value, "Value for the axis_value column");

  auto* compare = app.add_subcommand("compare", "Evaluate the full policy list");
  compare->add_option("--config", config_path, "Experiment config JSON");
  compare->add_option("--data", data_path, "Dataset CSV")->required();
  compare->add_option("--model", model_path, "Trained model file")->required();
  compare->add_option("--out", out_path, "Results CSV");

  auto* sweep = app.add_subcommand("sweep", "Sweep one experiment axis");
  sweep->add_option("--config", config_path, "Experiment config JSON");
  sweep->add_option("--axis", axis, "threshold|history|users|duration|features")->required();
  sweep->add_option("--values", values_arg, "Comma-separated axis values")->required();
  sweep->add_option("--out", out_path, "Results CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, overrides, out_path);
    if (train->parsed()) {
      return cmd_train(config_path, data_path, model_path, loss_path, history, preset, epochs);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(config_path, data_path, model_path, policies_arg, threshold, out_path,
                          axis_value);
    }
    if (compare->parsed()) {
      return cmd_evaluate(config_path, data_path, model_path, "all", std::nullopt, out_path, "0");
    }
    if (sweep->parsed()) return cmd_sweep(config_path, axis, values_arg, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "thzlab/dataset.hpp"
#include "thzlab/matrices.hpp"
#include "thzlab/rng.hpp"

namespace thzlab {

/// Sample-major matrices (one row per sample) used at the training surface.
template <typename Scalar>
using SampleMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kDefaultHiddenDim = 1000;
inline constexpr double kProbClampEps = 1e-7;

/// One-hidden-layer feed-forward net: relu hidden activation, sigmoid
/// outputs read as per-AP visibility probabilities for the next slot.
/// Scalar is float in production; tests instantiate double where
/// finite-difference accuracy matters.
template <typename Scalar = float>
struct FeedForwardModel {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Mat w1;  // hidden x input
  Vec b1;  // hidden
  Mat w2;  // output x hidden
  Vec b2;  // output

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  int output_dim() const { return static_cast<int>(w2.rows()); }
};

using PredictionModel = FeedForwardModel<float>;

/// Uniform +-sqrt(6 / fan_in) weights, zero biases. Entries are drawn in
/// row-major order so the result is fixed by the seed alone.
template <typename Scalar = float>
FeedForwardModel<Scalar> init_model(int input_dim, int hidden_dim, int output_dim,
                                    RngStream& rng) {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1) {
    throw std::invalid_argument("init_model: dimensions must be at least 1");
  }
  FeedForwardModel<Scalar> m;
  m.w1.resize(hidden_dim, input_dim);
  m.b1 = FeedForwardModel<Scalar>::Vec::Zero(hidden_dim);
  m.w2.resize(output_dim, hidden_dim);
  m.b2 = FeedForwardModel<Scalar>::Vec::Zero(output_dim);
  const double lim1 = std::sqrt(6.0 / input_dim);
  for (int i = 0; i < hidden_dim; ++i) {
    for (int j = 0; j < input_dim; ++j) m.w1(i, j) = static_cast<Scalar>(rng.uniform(-lim1, lim1));
  }
  const double lim2 = std::sqrt(6.0 / hidden_dim);
  for (int i = 0; i < output_dim; ++i) {
    for (int j = 0; j < hidden_dim; ++j) m.w2(i, j) = static_cast<Scalar>(rng.uniform(-lim2, lim2));
  }
  return m;
}

namespace detail {

template <typename Scalar>
Scalar stable_sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// Sigmoid clamped to [eps, 1 - eps]: probabilities never collapse to
/// exactly 0 or 1 in finite precision.
template <typename Scalar>
Scalar sigmoid_prob(Scalar z) {
  return std::clamp(stable_sigmoid(z), Scalar(kProbClampEps), Scalar(1.0 - kProbClampEps));
}

}  // namespace detail

/// Batched forward pass; rows of X are samples, rows of the result are
/// probability vectors.
template <typename Scalar>
SampleMatrix<Scalar> forward_batch(const FeedForwardModel<Scalar>& m,
                                   const SampleMatrix<Scalar>& x) {
  if (x.cols() != m.input_dim()) {
    throw std::invalid_argument("forward: feature dimension does not match the model");
  }
  SampleMatrix<Scalar> hidden = (x * m.w1.transpose()).rowwise() + m.b1.transpose();
  hidden = hidden.cwiseMax(Scalar(0));
  SampleMatrix<Scalar> out = (hidden * m.w2.transpose()).rowwise() + m.b2.transpose();
  return out.unaryExpr([](Scalar z) { return detail::sigmoid_prob(z); });
}

template <typename Scalar>
typename FeedForwardModel<Scalar>::Vec forward(const FeedForwardModel<Scalar>& m,
                                               const typename FeedForwardModel<Scalar>::Vec& x) {
  SampleMatrix<Scalar> row(1, x.size());
  row.row(0) = x.transpose();
  return forward_batch(m, row).row(0).transpose();
}

/// Mean binary cross-entropy over all entries, with predictions clamped to
/// [eps, 1 - eps].
template <typename Derived1, typename Derived2>
double bce_loss(const Eigen::MatrixBase<Derived1>& pred, const Eigen::MatrixBase<Derived2>& target) {
  using Scalar = typename Derived1::Scalar;
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("bce_loss: shape mismatch");
  }
  const auto p = pred.derived().array().max(Scalar(kProbClampEps)).min(Scalar(1.0 - kProbClampEps));
  const auto y = target.derived().array().template cast<double>();
  const auto pd = p.template cast<double>();
  return (-(y * pd.log() + (1.0 - y) * (1.0 - pd).log())).mean();
}

struct TrainConfig {
  int epochs = 750;
  double learning_rate = 0.01;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct EpochLoss {
  double train = 0.0;
  double val = 0.0;
};

template <typename Scalar>
struct Gradients {
  typename FeedForwardModel<Scalar>::Mat w1;
  typename FeedForwardModel<Scalar>::Vec b1;
  typename FeedForwardModel<Scalar>::Mat w2;
  typename FeedForwardModel<Scalar>::Vec b2;
};

/// Backpropagated gradients of the mean BCE over the batch, plus the batch
/// loss. relu'(0) is taken as 0.
template <typename Scalar>
Gradients<Scalar> compute_gradients(const FeedForwardModel<Scalar>& m,
                                    const SampleMatrix<Scalar>& x,
                                    const SampleMatrix<Scalar>& y, double* loss_out = nullptr) {
  if (x.cols() != m.input_dim() || y.cols() != m.output_dim() || x.rows() != y.rows()) {
    throw std::invalid_argument("compute_gradients: shape mismatch");
  }
  const auto batch = x.rows();
  SampleMatrix<Scalar> z1 = (x * m.w1.transpose()).rowwise() + m.b1.transpose();
  SampleMatrix<Scalar> hidden = z1.cwiseMax(Scalar(0));
  SampleMatrix<Scalar> probs =
      ((hidden * m.w2.transpose()).rowwise() + m.b2.transpose())
          .unaryExpr([](Scalar z) { return detail::sigmoid_prob(z); });
  if (loss_out != nullptr) *loss_out = bce_loss(probs, y);

  const Scalar scale = Scalar(1) / static_cast<Scalar>(batch * m.output_dim());
  SampleMatrix<Scalar> g2 = (probs - y) * scale;
  Gradients<Scalar> g;
  g.w2.noalias() = g2.transpose() * hidden;
  g.b2 = g2.colwise().sum().transpose();
  SampleMatrix<Scalar> g1 =
      (g2 * m.w2).cwiseProduct((z1.array() > Scalar(0)).template cast<Scalar>().matrix());
  g.w1.noalias() = g1.transpose() * x;
  g.b1 = g1.colwise().sum().transpose();
  return g;
}

namespace detail {

template <typename Scalar>
double eval_loss_chunked(const FeedForwardModel<Scalar>& m, const SampleMatrix<Scalar>& x,
                         const SampleMatrix<Scalar>& y, Eigen::Index chunk = 4096) {
  double total = 0.0;
  for (Eigen::Index start = 0; start < x.rows(); start += chunk) {
    const Eigen::Index rows = std::min(chunk, x.rows() - start);
    const SampleMatrix<Scalar> p = forward_batch<Scalar>(m, x.middleRows(start, rows));
    total += bce_loss(p, y.middleRows(start, rows)) * static_cast<double>(rows);
  }
  return total / static_cast<double>(x.rows());
}

}  // namespace detail

/// Plain mini-batch SGD for a fixed number of epochs with seeded per-epoch
/// shuffling; no early stopping. Validation loss is monitored and recorded
/// but never steers training.
template <typename Scalar>
std::vector<EpochLoss> train(FeedForwardModel<Scalar>& model,
                             const Eigen::Ref<const SampleMatrix<Scalar>>& x_train,
                             const Eigen::Ref<const SampleMatrix<Scalar>>& y_train,
                             const Eigen::Ref<const SampleMatrix<Scalar>>& x_val,
                             const Eigen::Ref<const SampleMatrix<Scalar>>& y_val,
                             const TrainConfig& cfg) {
  if (x_train.rows() == 0) throw std::invalid_argument("train: empty training set");
  if (x_train.cols() != model.input_dim() || y_train.cols() != model.output_dim()) {
    throw std::invalid_argument("train: sample dimensions do not match the model");
  }
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");

  const Eigen::Index count = x_train.rows();
  std::vector<std::int64_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  RngStream shuffle_rng(mix_seed(cfg.seed, kTrainStream));

  const Eigen::Index batch_cap = std::min<Eigen::Index>(cfg.batch_size, count);
  SampleMatrix<Scalar> xb(batch_cap, x_train.cols());
  SampleMatrix<Scalar> yb(batch_cap, y_train.cols());
  const Scalar lr = static_cast<Scalar>(cfg.learning_rate);

  std::vector<EpochLoss> history;
  history.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (Eigen::Index i = count - 1; i > 0; --i) {
      const std::size_t j = shuffle_rng.uniform_index(static_cast<std::size_t>(i) + 1);
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < count; start += batch_cap) {
      const Eigen::Index rows = std::min(batch_cap, count - start);
      for (Eigen::Index r = 0; r < rows; ++r) {
        xb.row(r) = x_train.row(order[start + r]);
        yb.row(r) = y_train.row(order[start + r]);
      }
      double batch_loss = 0.0;
      const auto g = compute_gradients<Scalar>(model, xb.topRows(rows), yb.topRows(rows),
                                               &batch_loss);
      model.w1.noalias() -= lr * g.w1;
      model.b1.noalias() -= lr * g.b1;
      model.w2.noalias() -= lr * g.w2;
      model.b2.noalias() -= lr * g.b2;
      epoch_loss += batch_loss * static_cast<double>(rows);
    }
    EpochLoss entry;
    entry.train = epoch_loss / static_cast<double>(count);
    entry.val = x_val.rows() > 0
                    ? detail::eval_loss_chunked<Scalar>(model, x_val, y_val)
                    : 0.0;
    if (!std::isfinite(entry.train) || !std::isfinite(entry.val)) {
      throw std::runtime_error("train: loss became non-finite at epoch " +
                               std::to_string(epoch) + "; lower the learning rate");
    }
    history.push_back(entry);
  }
  return history;
}

/// Shared-model inference for every user's current feature row.
inline PredictionMatrix predict_matrix(const PredictionModel& model,
                                       const SampleMatrix<float>& per_user_features) {
  const SampleMatrix<float> probs = forward_batch(model, per_user_features);
  PredictionMatrix out(static_cast<int>(probs.rows()), static_cast<int>(probs.cols()));
  for (int i = 0; i < out.n_users; ++i) {
    for (int j = 0; j < out.n_aps; ++j) out.set(i, j, probs(i, j));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: dims and the feature layout the model was trained with,
// then row-major float32 weights. The round trip is loss-free.
// ---------------------------------------------------------------------------

inline constexpr char kModelMagic[8] = {'T', 'H', 'Z', 'L', 'M', 'D', 'L', '1'};

struct ModelFile {
  PredictionModel model;
  FeatureSpec features;
};

namespace detail {

inline void write_i32(std::ostream& out, std::int32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline std::int32_t read_i32(std::istream& in) {
  std::int32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

template <typename Derived>
void write_mat(std::ostream& out, const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const float v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
}
template <typename Derived>
void read_mat(std::istream& in, Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      float v = 0.0f;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      m(i, j) = v;
    }
  }
}

}  // namespace detail

inline void save_model(const std::string& path, const PredictionModel& model,
                       const FeatureSpec& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out.write(kModelMagic, sizeof kModelMagic);
  detail::write_i32(out, model.input_dim());
  detail::write_i32(out, model.hidden_dim());
  detail::write_i32(out, model.output_dim());
  detail::write_i32(out, features.history_h);
  detail::write_i32(out, features.include_own_position ? 1 : 0);
  detail::write_i32(out, features.include_own_rotation ? 1 : 0);
  detail::write_i32(out, features.include_others_position ? 1 : 0);
  detail::write_i32(out, features.include_others_rotation ? 1 : 0);
  detail::write_i32(out, features.max_users);
  detail::write_mat(out, model.w1);
  detail::write_mat(out, model.b1);
  detail::write_mat(out, model.w2);
  detail::write_mat(out, model.b2);
  if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (std::memcmp(magic, kModelMagic, sizeof magic) != 0) {
    throw std::runtime_error("load_model: " + path + " is not a model file");
  }
  ModelFile f;
  const int input = detail::read_i32(in);
  const int hidden = detail::read_i32(in);
  const int output = detail::read_i32(in);
  f.features.history_h = detail::read_i32(in);
  f.features.include_own_position = detail::read_i32(in) != 0;
  f.features.include_own_rotation = detail::read_i32(in) != 0;
  f.features.include_others_position = detail::read_i32(in) != 0;
  f.features.include_others_rotation = detail::read_i32(in) != 0;
  f.features.max_users = detail::read_i32(in);
  if (!in || input < 1 || hidden < 1 || output < 1) {
    throw std::runtime_error("load_model: corrupt header in " + path);
  }
  f.model.w1.resize(hidden, input);
  f.model.b1.resize(hidden);
  f.model.w2.resize(output, hidden);
  f.model.b2.resize(output);
  detail::read_mat(in, f.model.w1);
  detail::read_mat(in, f.model.b1);
  detail::read_mat(in, f.model.w2);
  detail::read_mat(in, f.model.b2);
  if (!in) throw std::runtime_error("load_model: truncated file " + path);
  return f;
}

}  // namespace thzlab

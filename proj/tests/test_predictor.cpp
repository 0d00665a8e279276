#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "thzlab/predictor.hpp"

using namespace thzlab;
using Catch::Approx;

TEST_CASE("init is deterministic, zero-biased, and bounded") {
  RngStream a(5);
  RngStream b(5);
  const auto m1 = init_model<float>(11, 13, 7, a);
  const auto m2 = init_model<float>(11, 13, 7, b);
  CHECK(m1.w1 == m2.w1);
  CHECK(m1.w2 == m2.w2);
  CHECK(m1.b1.isZero());
  CHECK(m1.b2.isZero());
  CHECK(m1.w1.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 11));
  CHECK(m1.w2.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 13));
  CHECK_THROWS_AS(init_model<float>(0, 1, 1, a), std::invalid_argument);
}

TEST_CASE("forward: all-zero weights give 0.5 everywhere") {
  FeedForwardModel<float> m;
  m.w1 = Eigen::MatrixXf::Zero(4, 3);
  m.b1 = Eigen::VectorXf::Zero(4);
  m.w2 = Eigen::MatrixXf::Zero(2, 4);
  m.b2 = Eigen::VectorXf::Zero(2);
  Eigen::VectorXf x(3);
  x << 0.3f, -0.7f, 1.0f;
  const Eigen::VectorXf y = forward(m, x);
  CHECK(y(0) == Approx(0.5));
  CHECK(y(1) == Approx(0.5));
}

TEST_CASE("forward: hand-computed single-path case") {
  FeedForwardModel<double> m;
  m.w1 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  m.b1 = Eigen::VectorXd::Zero(1);
  m.w2 = Eigen::MatrixXd::Constant(1, 1, 2.0);
  m.b2 = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd x(1);
  x << 0.5;
  CHECK(forward(m, x)(0) == Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
  CHECK(forward(m, x)(0) == Approx(0.7310586).margin(1e-6));
  // negative pre-activation is cut by the relu
  x << -0.5;
  CHECK(forward(m, x)(0) == Approx(0.5));
}

TEST_CASE("forward validates the feature dimension") {
  RngStream rng(1);
  const auto m = init_model<float>(4, 5, 3, rng);
  SampleMatrix<float> x(2, 3);
  x.setZero();
  CHECK_THROWS_AS(forward_batch(m, x), std::invalid_argument);
}

TEST_CASE("binary cross entropy reference points") {
  Eigen::VectorXd p = Eigen::VectorXd::Constant(6, 0.5);
  Eigen::VectorXd y(6);
  y << 1, 0, 1, 1, 0, 0;
  CHECK(bce_loss(p, y) == Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(bce_loss(y, y) <= 1e-6);
  Eigen::VectorXd p1 = Eigen::VectorXd::Constant(1, 0.9);
  Eigen::VectorXd y1 = Eigen::VectorXd::Constant(1, 1.0);
  CHECK(bce_loss(p1, y1) == Approx(-std::log(0.9)).epsilon(1e-12));
  CHECK(bce_loss(p1, y1) == Approx(0.1053605).margin(1e-6));
}

TEST_CASE("backprop matches central finite differences on a double model") {
  RngStream rng(33);
  auto model = init_model<double>(5, 7, 3, rng);
  SampleMatrix<double> x(4, 5);
  SampleMatrix<double> y(4, 3);
  for (Eigen::Index r = 0; r < 4; ++r) {
    for (Eigen::Index c = 0; c < 5; ++c) x(r, c) = rng.uniform(-1.0, 1.0);
    for (Eigen::Index c = 0; c < 3; ++c) y(r, c) = rng.uniform01() < 0.5 ? 0.0 : 1.0;
  }
  const auto grads = compute_gradients<double>(model, x, y);

  const double h = 1e-5;
  const auto numeric = [&](double& param) {
    const double saved = param;
    param = saved + h;
    const double up = bce_loss(forward_batch(model, x), y);
    param = saved - h;
    const double down = bce_loss(forward_batch(model, x), y);
    param = saved;
    return (up - down) / (2.0 * h);
  };
  double worst = 0.0;
  const auto compare = [&](double analytic, double& param) {
    const double fd = numeric(param);
    const double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-8});
    worst = std::max(worst, rel);
  };
  for (Eigen::Index i = 0; i < model.w1.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.w1.cols(); ++j) compare(grads.w1(i, j), model.w1(i, j));
  }
  for (Eigen::Index i = 0; i < model.b1.size(); ++i) compare(grads.b1(i), model.b1(i));
  for (Eigen::Index i = 0; i < model.w2.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.w2.cols(); ++j) compare(grads.w2(i, j), model.w2(i, j));
  }
  for (Eigen::Index i = 0; i < model.b2.size(); ++i) compare(grads.b2(i), model.b2(i));
  INFO("worst relative error " << worst);
  CHECK(worst < 1e-4);
}

namespace {

struct Toy {
  SampleMatrix<float> x;
  SampleMatrix<float> y;
};

Toy toy_problem() {
  Toy t;
  t.x.resize(2, 3);
  t.x << 1.f, 0.f, 1.f,  //
      0.f, 1.f, 0.f;
  t.y.resize(2, 2);
  t.y << 1.f, 0.f,  //
      0.f, 1.f;
  return t;
}

}  // namespace

TEST_CASE("training descends on a separable toy problem") {
  RngStream rng(7);
  auto model = init_model<float>(3, 8, 2, rng);
  const Toy t = toy_problem();
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.learning_rate = 2.0;  // the mean-over-entries loss makes raw gradients small
  cfg.batch_size = 2;
  cfg.seed = 3;
  const auto history = train<float>(model, t.x, t.y, t.x, t.y, cfg);
  REQUIRE(history.size() == 60);
  CHECK(history.back().train < history.front().train);
  CHECK(history.back().val < history.front().val);
}

TEST_CASE("training is bit-deterministic in (seed, data, config)") {
  const Toy t = toy_problem();
  TrainConfig cfg;
  cfg.epochs = 25;
  cfg.learning_rate = 1.0;
  cfg.batch_size = 1;
  cfg.seed = 11;
  RngStream r1(9);
  RngStream r2(9);
  auto m1 = init_model<float>(3, 8, 2, r1);
  auto m2 = init_model<float>(3, 8, 2, r2);
  const auto h1 = train<float>(m1, t.x, t.y, t.x, t.y, cfg);
  const auto h2 = train<float>(m2, t.x, t.y, t.x, t.y, cfg);
  CHECK(m1.w1 == m2.w1);
  CHECK(m1.b1 == m2.b1);
  CHECK(m1.w2 == m2.w2);
  CHECK(m1.b2 == m2.b2);
  for (std::size_t e = 0; e < h1.size(); ++e) {
    CHECK(h1[e].train == h2[e].train);
    CHECK(h1[e].val == h2[e].val);
  }
}

TEST_CASE("an absurd learning rate aborts with a diagnostic") {
  RngStream rng(13);
  auto model = init_model<float>(3, 8, 2, rng);
  const Toy t = toy_problem();
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 1e30;
  cfg.batch_size = 2;
  CHECK_THROWS_AS(train<float>(model, t.x, t.y, t.x, t.y, cfg), std::runtime_error);
}

TEST_CASE("predict_matrix shapes, range, and purity") {
  RngStream rng(21);
  const auto model = init_model<float>(6, 9, 4, rng);
  SampleMatrix<float> features(3, 6);
  features.setZero();
  features.row(0).setConstant(0.25f);
  features.row(1).setConstant(0.25f);
  features.row(2).setConstant(0.75f);
  const PredictionMatrix p = predict_matrix(model, features);
  CHECK(p.n_users == 3);
  CHECK(p.n_aps == 4);
  for (int j = 0; j < 4; ++j) {
    CHECK(p.at(0, j) == p.at(1, j));  // identical features, identical rows
    CHECK(p.at(2, j) > 0.0f);
    CHECK(p.at(2, j) < 1.0f);
  }
}

TEST_CASE("model serialization round trip is loss-free") {
  RngStream rng(31);
  const auto model = init_model<float>(10, 12, 5, rng);
  FeatureSpec spec = feature_preset(3, 2);
  spec.max_users = 8;
  const std::string path =
      (std::filesystem::temp_directory_path() / "thzlab_model_test.bin").string();
  save_model(path, model, spec);
  const ModelFile loaded = load_model(path);
  CHECK(loaded.model.w1 == model.w1);
  CHECK(loaded.model.b1 == model.b1);
  CHECK(loaded.model.w2 == model.w2);
  CHECK(loaded.model.b2 == model.b2);
  CHECK(loaded.features.history_h == 2);
  CHECK(loaded.features.include_own_rotation);
  CHECK_FALSE(loaded.features.include_others_position);
  CHECK(loaded.features.max_users == 8);

  SampleMatrix<float> x(2, 10);
  x.setRandom();
  CHECK(forward_batch(loaded.model, x) == forward_batch(model, x));
  std::filesystem::remove(path);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thzlab/channel.hpp"

using namespace thzlab;
using Catch::Approx;

namespace {
const PathlossParams kParams;  // reference 0.14 THz values
}

TEST_CASE("pathloss at the reference distance is pl_d0") {
  CHECK(pathloss_db(0.35, kParams, 0.0) == Approx(25.0).margin(1e-12));
}

TEST_CASE("pathloss matches an independent evaluation of the log-distance law") {
  const auto oracle = [](double d) { return 25.0 + 10.0 * 2.117 * std::log10(d / 0.35); };
  for (double d : {0.5, 1.0, 3.5, 8.0, 10.0, 25.0}) {
    CHECK(pathloss_db(d, kParams, 0.0) == Approx(oracle(d)).margin(1e-12));
  }
  CHECK(pathloss_db(3.5, kParams, 0.0) == Approx(46.17).margin(1e-9));
  CHECK(pathloss_db(8.0, kParams, 0.0) == Approx(53.7705).margin(1e-4));
}

TEST_CASE("shadow enters additively") {
  for (double x : {-3.0, -0.5, 0.0, 0.7, 4.0}) {
    CHECK(pathloss_db(0.35, kParams, x) == Approx(25.0 + x).margin(1e-12));
  }
}

TEST_CASE("pathloss rejects nonpositive distances") {
  CHECK_THROWS_AS(pathloss_db(0.0, kParams, 0.0), std::domain_error);
  CHECK_THROWS_AS(pathloss_db(-1.0, kParams, 0.0), std::domain_error);
}

TEST_CASE("pathloss is strictly increasing in distance") {
  double prev = pathloss_db(0.01, kParams, 0.0);
  for (double d = 0.02; d < 30.0; d += 0.13) {
    const double cur = pathloss_db(d, kParams, 0.0);
    REQUIRE(cur > prev);
    prev = cur;
  }
}

TEST_CASE("coverage is a sharp threshold at the inverted boundary") {
  // algebraic inversion of the pathloss law at p_th
  const double boundary = 0.35 * std::pow(10.0, (55.0 - 25.0) / 21.17);
  CHECK(coverage_boundary(kParams) == Approx(boundary).margin(1e-12));
  CHECK(boundary == Approx(9.1447).margin(5e-4));
  CHECK(in_coverage(8.0, kParams, 0.0));
  CHECK_FALSE(in_coverage(10.0, kParams, 0.0));
  CHECK(in_coverage(boundary - 1e-6, kParams, 0.0));
  CHECK_FALSE(in_coverage(boundary + 1e-6, kParams, 0.0));
}

TEST_CASE("degenerate shadow distribution is identically zero") {
  PathlossParams p = kParams;
  p.sigma = 0.0;
  RngStream rng(1);
  for (int k = 0; k < 100; ++k) CHECK(sample_shadow(p, rng) == 0.0);
}

TEST_CASE("shadow draws match the configured moments") {
  RngStream rng(12);
  const int n = 100000;
  double sum = 0.0;
  double sq = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = sample_shadow(kParams, rng);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) <= 0.01);
  CHECK(std::abs(sd - 0.5712) <= 0.02 * 0.5712);
}

TEST_CASE("signal proxy negates pathloss and vanishes when blocked") {
  CHECK(signal_dbm_proxy(0.35, kParams, 0.0, false).value() == Approx(-25.0).margin(1e-12));
  CHECK_FALSE(signal_dbm_proxy(0.35, kParams, 0.0, true).has_value());
  CHECK_FALSE(signal_dbm_proxy(100.0, kParams, 0.0, true).has_value());
  // closer unblocked link always has the stronger proxy
  double prev = *signal_dbm_proxy(0.5, kParams, 0.0, false);
  for (double d = 1.0; d < 12.0; d += 0.5) {
    const double cur = *signal_dbm_proxy(d, kParams, 0.0, false);
    REQUIRE(cur < prev);
    prev = cur;
  }
}

TEST_CASE("shadow field is keyed, reproducible, and optional") {
  const ShadowField field{0.5712, 42, true};
  CHECK(field.at(3, 1, 7) == field.at(3, 1, 7));
  CHECK(field.at(3, 1, 7) != field.at(4, 1, 7));
  CHECK(field.at(3, 1, 7) != field.at(3, 2, 7));
  CHECK(ShadowField::off().at(3, 1, 7) == 0.0);

  double sum = 0.0;
  double sq = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const double x = field.at(k, k % 5, k % 121);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(sd - 0.5712) < 0.012);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "thzlab/geometry.hpp"
#include "thzlab/rng.hpp"

using namespace thzlab;
using Catch::Approx;

TEST_CASE("bicone radius: apexes are zero, midpoint is maximal") {
  const BeamRegion r4{{0, 0, 1}, {4, 0, 1}, 2.5};
  CHECK(bicone_radius_at(r4, 0.0) == 0.0);
  CHECK(bicone_radius_at(r4, 4.0) == Approx(0.0).margin(1e-12));
  // independent trig evaluation of the mid-plane radius
  CHECK(bicone_radius_at(r4, 2.0) == Approx(2.0 * std::tan(deg2rad(1.25))));
  CHECK(bicone_radius_at(r4, 2.0) == Approx(0.0436402).margin(1e-6));

  const BeamRegion r8{{0, 0, 1}, {8, 0, 1}, 2.5};
  CHECK(bicone_radius_at(r8, 4.0) == Approx(4.0 * std::tan(deg2rad(1.25))));
  CHECK(bicone_radius_at(r8, 4.0) == Approx(0.0872803).margin(1e-6));
}

TEST_CASE("bicone radius rejects out-of-range arc length") {
  const BeamRegion r{{0, 0, 1}, {4, 0, 1}, 2.5};
  CHECK_THROWS_AS(bicone_radius_at(r, -0.1), std::domain_error);
  CHECK_THROWS_AS(bicone_radius_at(r, 4.1), std::domain_error);
}

TEST_CASE("bicone radius is piecewise linear and symmetric about the midpoint") {
  const BeamRegion r{{1, 2, 0.5}, {5, -1, 2.0}, 5.0};
  const double d = distance(r.tx, r.rx);
  RngStream rng(5);
  for (int k = 0; k < 200; ++k) {
    const double s = rng.uniform(0.0, d);
    CHECK(bicone_radius_at(r, s) == Approx(bicone_radius_at(r, d - s)).margin(1e-12));
  }
  // linear on the first half: r(s) = s * r(d/4) / (d/4)
  const double quarter = bicone_radius_at(r, d / 4);
  CHECK(bicone_radius_at(r, d / 8) == Approx(quarter / 2));
}

TEST_CASE("segment-cylinder: through, above, and near-miss cases") {
  const BodyCylinder body{0.0, 0.0, 0.2, 1.8, -1};
  // horizontal segment at chest height straight through the axis
  CHECK(segment_hits_cylinder({-1, 0, 1.0}, {1, 0, 1.0}, body));
  // same segment lifted above the body
  CHECK_FALSE(segment_hits_cylinder({-1, 0, 2.0}, {1, 0, 2.0}, body));
  // closest xy-approach 0.25 > radius 0.2
  CHECK_FALSE(segment_hits_cylinder({-1, 0.25, 1.0}, {1, 0.25, 1.0}, body));
  // closest approach just inside
  CHECK(segment_hits_cylinder({-1, 0.19, 1.0}, {1, 0.19, 1.0}, body));
}

TEST_CASE("segment-cylinder: grazing contact does not block") {
  const BodyCylinder body{0.0, 0.0, 0.2, 1.8, -1};
  // vertical ray leaving the body surface exactly at the radius
  CHECK_FALSE(segment_hits_cylinder({0.2, 0, 1.35}, {0.2, 0, 2.4}, body));
  // a ray along the top cap
  CHECK_FALSE(segment_hits_cylinder({-1, 0, 1.8}, {1, 0, 1.8}, body));
  // vertical ray strictly inside
  CHECK(segment_hits_cylinder({0.1, 0, 1.0}, {0.1, 0, 2.4}, body));
}

TEST_CASE("segment-cylinder: z-clipping of an oblique segment") {
  const BodyCylinder body{0.0, 0.0, 0.5, 1.0, -1};
  // passes over the xy-disc but only above the cylinder top
  CHECK_FALSE(segment_hits_cylinder({-2, 0, 1.5}, {2, 0, 3.0}, body));
  // descends into the cylinder within the disc span
  CHECK(segment_hits_cylinder({-2, 0, 1.5}, {2, 0, 0.2}, body));
}

TEST_CASE("link visibility with no obstacles") {
  CHECK(link_visible({0, 0, 1.35}, {4, 0, 1.35}, 2.5, {}, 8));
}

TEST_CASE("a wide cylinder on the axis swallows the whole bicone") {
  // mid-plane radius ~0.0436 m << 0.5 m, so every sampled path is inside
  const std::vector<BodyCylinder> bodies{{2.0, 0.0, 0.5, 1.8, -1}};
  CHECK_FALSE(link_visible({0, 0, 1.35}, {4, 0, 1.35}, 2.5, bodies, 8));
}

TEST_CASE("a body far from the axis cannot block") {
  // 2.0 m lateral offset > 0.5 + 0.0437
  const std::vector<BodyCylinder> bodies{{2.0, 2.0, 0.5, 1.8, -1}};
  CHECK(link_visible({0, 0, 1.35}, {4, 0, 1.35}, 2.5, bodies, 8));
}

TEST_CASE("a body enclosing a ray origin does not intercept") {
  // terminal strictly inside a pedestrian it interpenetrates
  const BodyCylinder engulfing{0.05, 0.0, 0.2, 1.8, -1};
  CHECK(cylinder_contains(engulfing, {0.0, 0.0, 1.35}));
  CHECK(link_visible({0, 0, 1.35}, {4, 0, 1.35}, 2.5, std::vector{engulfing}, 8));
  // a terminal on its carrier's surface is NOT contained: self-blockage holds
  const BodyCylinder own{-0.2, 0.0, 0.2, 1.8, -1};
  CHECK_FALSE(cylinder_contains(own, {0.0, 0.0, 1.35}));
  CHECK_FALSE(link_visible({0, 0, 1.35}, {-4, 0, 1.35}, 2.5, std::vector{own}, 8));
  // other bodies still block while one is excluded
  const std::vector<BodyCylinder> both{engulfing, {2.0, 0.0, 0.5, 1.8, -1}};
  CHECK_FALSE(link_visible({0, 0, 1.35}, {4, 0, 1.35}, 2.5, both, 8));
}

namespace {

std::vector<BodyCylinder> random_bodies(RngStream& rng, int count) {
  std::vector<BodyCylinder> bodies;
  for (int k = 0; k < count; ++k) {
    bodies.push_back({rng.uniform(0, 6), rng.uniform(-2, 2), rng.uniform(0.1, 0.4),
                      rng.uniform(1.2, 2.0), -1});
  }
  return bodies;
}

}  // namespace

TEST_CASE("link visibility is symmetric under endpoint swap") {
  RngStream rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const Point3 tx{rng.uniform(0, 6), rng.uniform(-2, 2), rng.uniform(0.5, 2.0)};
    const Point3 rx{rng.uniform(0, 6), rng.uniform(-2, 2), rng.uniform(0.5, 2.4)};
    if (distance(tx, rx) < 1e-6) continue;
    const auto bodies = random_bodies(rng, 3);
    for (int rays : {0, 3, 5, 8}) {
      CHECK(link_visible(tx, rx, 2.5, bodies, rays) == link_visible(rx, tx, 2.5, bodies, rays));
    }
  }
}

TEST_CASE("removing a body never turns a visible link blocked") {
  RngStream rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const Point3 tx{rng.uniform(0, 6), rng.uniform(-2, 2), 1.35};
    const Point3 rx{rng.uniform(0, 6), rng.uniform(-2, 2), 2.4};
    if (distance(tx, rx) < 1e-6) continue;
    auto bodies = random_bodies(rng, 4);
    const bool with_all = link_visible(tx, rx, 2.5, bodies, 8);
    bodies.pop_back();
    const bool with_fewer = link_visible(tx, rx, 2.5, bodies, 8);
    if (with_all) CHECK(with_fewer);
  }
}

TEST_CASE("blocked at a ray budget implies blocked at every divisor budget") {
  RngStream rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const Point3 tx{rng.uniform(0, 6), rng.uniform(-2, 2), 1.15};
    const Point3 rx{rng.uniform(0, 6), rng.uniform(-2, 2), 2.4};
    if (distance(tx, rx) < 1e-6) continue;
    const auto bodies = random_bodies(rng, 3);
    if (!link_visible(tx, rx, 2.5, bodies, 8)) {
      for (int rays : {1, 2, 4}) CHECK_FALSE(link_visible(tx, rx, 2.5, bodies, rays));
    }
  }
}

TEST_CASE("culling far bodies does not change visibility") {
  RngStream rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    const Point3 tx{rng.uniform(0, 8), rng.uniform(-3, 3), rng.uniform(1.0, 1.4)};
    const Point3 rx{rng.uniform(0, 8), rng.uniform(-3, 3), 2.4};
    if (distance(tx, rx) < 1e-6) continue;
    const auto bodies = random_bodies(rng, 6);
    std::vector<BodyCylinder> near;
    for (const auto& body : bodies) {
      if (body_near_link(tx, rx, 2.5, body)) near.push_back(body);
    }
    CHECK(link_visible(tx, rx, 2.5, bodies, 8) == link_visible(tx, rx, 2.5, near, 8));
  }
}

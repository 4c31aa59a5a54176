#include <doctest.h>

#include "bihc/cage.hpp"
#include "test_util.hpp"

using namespace bihc;
using testutil::Rng;

namespace {

// Independent winding number from a uniformly sampled polyline.
int dense_winding(const Cage& cage, const Point2& p, int per_curve) {
  std::vector<Point2> poly;
  for (const auto& c : cage.curves()) {
    for (int i = 0; i < per_curve; ++i) poly.push_back(bezier_eval(c, static_cast<double>(i) / per_curve));
  }
  int w = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
    if (a.y() <= p.y() && b.y() > p.y() && cross > 0) ++w;
    if (a.y() > p.y() && b.y() <= p.y() && cross < 0) --w;
  }
  return w;
}

}  // namespace

TEST_CASE("validation of simple cages") {
  const Cage sq = testutil::unit_square();
  const ValidationReport r = validate_cage(sq);
  CHECK(r.valid());
  CHECK(r.counter_clockwise);
  CHECK(r.signed_area == doctest::Approx(1.0));

  std::vector<BezierCurve> curves = sq.curves();
  auto pts = curves[2].control_points();
  std::reverse(pts.begin(), pts.end());
  curves[2] = BezierCurve(pts);
  const ValidationReport broken = validate_cage(Cage(curves));
  CHECK_FALSE(broken.valid());
  REQUIRE_FALSE(broken.closure_violations.empty());
  // Curve 1 no longer ends where curve 2 starts, and curve 2 no longer meets curve 3.
  CHECK(std::find(broken.closure_violations.begin(), broken.closure_violations.end(), 1u) !=
        broken.closure_violations.end());
  CHECK(std::find(broken.closure_violations.begin(), broken.closure_violations.end(), 2u) !=
        broken.closure_violations.end());
}

TEST_CASE("figure eight is reported as self-intersecting") {
  const Cage eight = Cage::from_loop({{0, 0}, {1, 1}, {1, 0}, {0, 1}}, {{}, {}, {}, {}});
  const ValidationReport r = validate_cage(eight);
  CHECK_FALSE(r.valid());
  REQUIRE_FALSE(r.intersections.empty());
  // Brute-force oracle: segments 0 and 2 cross at (0.5, 0.5).
  bool has02 = false;
  for (auto [a, b] : r.intersections) has02 |= (a == 0 && b == 2) || (a == 2 && b == 0);
  CHECK(has02);
}

TEST_CASE("orientation normalization") {
  const Cage cw = reversed(testutil::unit_square());
  CHECK(signed_area(cw) == doctest::Approx(-1.0));
  ValidationReport rep;
  const Cage ccw = normalize_orientation(cw, &rep);
  CHECK(rep.reversal_applied);
  CHECK(signed_area(ccw) == doctest::Approx(1.0));
  CHECK(content_hash(reversed(cw)) == content_hash(testutil::unit_square()));
  CHECK(validate_cage(ccw).valid());
}

TEST_CASE("containment on the unit square") {
  const Cage sq = testutil::unit_square();
  CHECK(point_inside(sq, {0.5, 0.5}));
  CHECK_FALSE(point_inside(sq, {1.5, 0.5}));
  CHECK_FALSE(point_inside(sq, {1.0, 0.5}));
}

TEST_CASE("containment agrees with a dense winding oracle") {
  const Cage blob = testutil::load("cubic_blob.cage");
  const ContainmentTester tester(blob);
  const BoundingBox box = blob.bbox();
  Rng rng(11);
  int agree = 0;
  const int count = 1000;
  for (int i = 0; i < count; ++i) {
    const Point2 p(rng.uniform(box.min.x(), box.max.x()), rng.uniform(box.min.y(), box.max.y()));
    const bool oracle = dense_winding(blob, p, 25000) == 1;
    agree += tester.inside(p) == oracle ? 1 : 0;
  }
  CHECK(agree == count);
}

TEST_CASE("closest point") {
  const Cage blob = testutil::load("cubic_blob.cage");
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const Point2 p = rng.point(0.2, 1.8);
    const ClosestPoint cp = closest_point(blob, p);
    double brute = 1e300;
    for (const auto& c : blob.curves()) {
      for (int k = 0; k <= 20000; ++k) brute = std::min(brute, (bezier_eval(c, k / 20000.0) - p).norm());
    }
    CHECK(cp.distance <= brute + 1e-12);
    CHECK(cp.distance >= brute - 1e-6);
    CHECK((bezier_eval(blob.curve(cp.curve), cp.t) - cp.point).norm() < 1e-12);
  }
}

TEST_CASE("elevation keeps shared endpoints bitwise") {
  const Cage blob = testutil::load("quadratic_blob.cage");
  const Cage up = elevate_cage(blob, 5);
  CHECK(up.order() == 5);
  for (std::size_t i = 0; i < up.size(); ++i) {
    CHECK(up.curve(i).back() == up.curve((i + 1) % up.size()).front());
  }
}

TEST_CASE("content hash") {
  const Cage a = testutil::unit_square();
  const Cage b = Cage::from_loop({{0, 0}, {1, 0}, {1, 1}, {0, 1.0000000000000002}}, {{}, {}, {}, {}});
  CHECK(content_hash(a) == content_hash(testutil::unit_square()));
  CHECK(content_hash(a) != content_hash(b));
}

TEST_CASE("shipped cages are valid") {
  for (const char* name : {"square.cage", "quadratic_blob.cage", "cubic_blob.cage", "cubic_blob_bent.cage",
                           "quartic_wave.cage"}) {
    CAPTURE(name);
    CHECK(validate_cage(testutil::load(name)).valid());
  }
}

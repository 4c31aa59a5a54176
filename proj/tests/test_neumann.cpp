#include <doctest.h>

#include "bihc/errors.hpp"
#include "bihc/neumann.hpp"
#include "bihc/suites.hpp"
#include "test_util.hpp"

using namespace bihc;

namespace {

DeformationConfig cfg3() {
  DeformationConfig c;
  c.n = 3;
  return c;
}

Cage scaled(const Cage& c, double lambda) {
  std::vector<BezierCurve> out;
  for (const auto& curve : c.curves()) {
    std::vector<Point2> p;
    for (const auto& q : curve.control_points()) p.push_back(lambda * q);
    out.emplace_back(p);
  }
  return Cage(out);
}

struct Fixture {
  Cage rest = testutil::load("cubic_blob.cage");
  Cage bent = testutil::load("cubic_blob_bent.cage");
  CoordinateSystem sys = build_system(rest, cfg3());
  std::vector<Point2> probes = random_interior_points(rest, 12, 0.05, 3);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

}  // namespace

TEST_CASE("quadratic form matches the direct energy") {
  const Fixture& fx = fixture();
  testutil::Rng rng(50);
  for (ScaleMode mode : {ScaleMode::AHAP, ScaleMode::AAAP, ScaleMode::AAAPCentered}) {
    CAPTURE(to_string(mode));
    for (double w : {1.0, 0.5}) {
      const ScaleProblem prob = build_scale_problem(fx.sys, BoundaryData::from_cage(fx.bent, 3), mode, w, fx.probes);
      for (int trial = 0; trial < 20; ++trial) {
        BoundaryData bd = BoundaryData::from_cage(fx.bent, 3);
        Eigen::VectorXd s(bd.edge_count());
        for (int e = 0; e < bd.edge_count(); ++e) s[e] = bd.scales[e] = rng.uniform(0.2, 3.0);
        const double direct = direct_energy(fx.sys, bd, mode, w, fx.probes);
        CHECK(std::abs(prob.energy(s) - direct) <= 1e-8 * std::max(1.0, direct));
        CHECK(std::abs((prob.A * s + prob.a).squaredNorm() - direct) <= 1e-8 * std::max(1.0, direct));
      }
    }
  }
}

TEST_CASE("identity target has vanishing harmonic energy") {
  const Fixture& fx = fixture();
  const ScaleProblem prob = build_scale_problem(fx.sys, BoundaryData::from_cage(fx.rest, 3), ScaleMode::AHAP, 1.0, fx.probes);
  const double e = prob.energy(Eigen::VectorXd::Ones(prob.Q.rows()));
  const double bent =
      build_scale_problem(fx.sys, BoundaryData::from_cage(fx.bent, 3), ScaleMode::AHAP, 1.0, fx.probes)
          .energy(Eigen::VectorXd::Ones(prob.Q.rows()));
  CHECK(e <= 1e-6 * bent);
}

TEST_CASE("energies scale quadratically with the target") {
  const Fixture& fx = fixture();
  const double lambda = 1.7;
  for (ScaleMode mode : {ScaleMode::AHAP, ScaleMode::AAAP}) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(fx.bent.size()));
    const double e1 = build_scale_problem(fx.sys, BoundaryData::from_cage(fx.bent, 3), mode, 1.0, fx.probes).energy(ones);
    const double e2 =
        build_scale_problem(fx.sys, BoundaryData::from_cage(scaled(fx.bent, lambda), 3), mode, 1.0, fx.probes).energy(ones);
    CHECK(e2 == doctest::Approx(lambda * lambda * e1).epsilon(1e-9));
  }
}

TEST_CASE("unit mode returns ones") {
  const Fixture& fx = fixture();
  const ScaleProblem prob = build_scale_problem(fx.sys, BoundaryData::from_cage(fx.bent, 3), ScaleMode::Unit);
  const ScaleSolution sol = optimize_scales(prob);
  CHECK(sol.s == Eigen::VectorXd::Ones(static_cast<Eigen::Index>(fx.bent.size())));
}

TEST_CASE("optimized scales never do worse than unit scales") {
  const Fixture& fx = fixture();
  for (ScaleMode mode : {ScaleMode::AHAP, ScaleMode::AAAP, ScaleMode::AAAPCentered}) {
    CAPTURE(to_string(mode));
    const ScaleProblem prob = build_scale_problem(fx.sys, BoundaryData::from_cage(fx.bent, 3), mode, 1.0, fx.probes);
    const ScaleSolution sol = optimize_scales(prob);
    CHECK(sol.energy <= sol.unit_energy + 1e-12 * std::max(1.0, sol.unit_energy));
    CHECK(sol.s.minCoeff() >= kMinScale);
    CHECK(sol.kkt_residual <= 1e-8 * std::max(1.0, prob.Q.norm()));
    CHECK(kkt_residual(prob, sol.s) == doctest::Approx(sol.kkt_residual));
  }
}

TEST_CASE("bound constraint becomes active") {
  ScaleProblem p;
  p.mode = ScaleMode::AHAP;
  p.Q = Eigen::Matrix2d::Identity();
  p.b = Eigen::Vector2d(1.0, -2.0);  // unconstrained minimizer (−1, 2)
  p.A = Eigen::Matrix2d::Identity();
  p.a = p.b;
  p.c = p.b.squaredNorm();
  const ScaleSolution sol = optimize_scales(p);
  CHECK(sol.s[0] == kMinScale);
  CHECK(sol.s[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sol.kkt_residual <= 1e-8);
  CHECK(sol.energy == doctest::Approx(p.energy(sol.s)));

  ScaleProblem bad = p;
  bad.Q << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(optimize_scales(bad), ConditioningError);
}

TEST_CASE("scale mode names round trip") {
  for (ScaleMode m : {ScaleMode::Unit, ScaleMode::AHAP, ScaleMode::AAAP, ScaleMode::AAAPCentered}) {
    CHECK(parse_scale_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_scale_mode("bogus"), ValidationError);
}

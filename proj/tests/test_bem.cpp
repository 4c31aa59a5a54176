#include <doctest.h>

#include <numbers>

#include "bihc/bem.hpp"
#include "bihc/errors.hpp"
#include "bihc/suites.hpp"
#include "test_util.hpp"

using namespace bihc;

namespace {

DeformationConfig cfg(int n, int subdiv = 4) {
  DeformationConfig c;
  c.n = n;
  c.subdiv = subdiv;
  return c;
}

struct Field {
  std::function<double(const Point2&)> f, lap;
  std::function<Point2(const Point2&)> grad, grad_lap;
};

struct SubData {
  Eigen::VectorXd g1, g2, h1, h2;
};

SubData traces(const Discretization& disc, const Field& fd) {
  const int ns = disc.element_count(), n = disc.n, k = disc.k;
  SubData d{Eigen::VectorXd::Zero(ns * n), Eigen::VectorXd::Zero(ns * n), Eigen::VectorXd::Zero(ns * k),
            Eigen::VectorXd::Zero(ns * k)};
  for (int s = 0; s < ns; ++s) {
    const BezierCurve& e = disc.elements[s];
    const BezierCurve de = bezier_derivative(e);
    const auto c1 = fit_bernstein([&](double t) { return fd.f(bezier_eval(e, t)); }, n);
    const auto c2 = fit_bernstein([&](double t) { return fd.grad(bezier_eval(e, t)).dot(perp(bezier_eval(de, t))); }, n - 1);
    const auto c3 = fit_bernstein([&](double t) { return fd.lap(bezier_eval(e, t)); }, k);
    const auto c4 = fit_bernstein(
        [&](double t) {
          const Point2 v = bezier_eval(de, t);
          return fd.grad_lap(bezier_eval(e, t)).dot(perp(v)) / v.squaredNorm();
        },
        k - 1);
    for (int j = 0; j <= n; ++j) d.g1[shared_index(s, j, n, ns)] = c1[j];
    for (int j = 0; j < n; ++j) d.g2[s * n + j] = c2[j];
    for (int j = 0; j <= k; ++j) d.h1[shared_index(s, j, k, ns)] = c3[j];
    for (int j = 0; j < k; ++j) d.h2[s * k + j] = c4[j];
  }
  return d;
}

Cage rotated_square() {
  // Unit square rotated by 90° about its centre, listed from a different start vertex.
  return Cage::from_loop({{1, 0}, {1, 1}, {0, 1}, {0, 0}}, {{}, {}, {}, {}});
}

}  // namespace

TEST_CASE("discretization of the square") {
  const Discretization d = discretize(testutil::unit_square(), cfg(3));
  CHECK(d.element_count() == 16);
  CHECK(d.samples.size() == 96);
  CHECK(d.delta == doctest::Approx(1e-4 * std::sqrt(2.0)));
  for (const auto& s : d.samples) {
    CHECK(point_inside(d.cage, s.eta));
    CHECK((s.point - s.eta).norm() == doctest::Approx(s.offset));
    CHECK(s.outward.norm() == doctest::Approx(1.0));
    CHECK(s.outward.dot(s.point - s.eta) > 0);
  }
  CHECK(d.S.rows() == 16 * 3);
  CHECK(d.S.cols() == 4 * 3);
  CHECK(d.T.rows() == 16 * 3);
  CHECK(d.T.cols() == 4 * 3);
}

TEST_CASE("one sub-element per edge reproduces the edges") {
  const Cage blob = testutil::load("cubic_blob.cage");
  const Discretization d = discretize(blob, cfg(3, 1));
  REQUIRE(d.element_count() == static_cast<int>(blob.size()));
  for (int s = 0; s < d.element_count(); ++s) {
    for (int j = 0; j <= 3; ++j) {
      CHECK((d.elements[s].control_point(j) - blob.curve(s).control_point(j)).norm() < 1e-15);
    }
  }
  CHECK((d.S - Eigen::MatrixXd::Identity(d.S.rows(), d.S.cols())).norm() < 1e-15);
}

TEST_CASE("sample count scales with samples per element") {
  DeformationConfig a = cfg(3), b = cfg(3);
  a.samples = 6;
  b.samples = 12;
  const Cage sq = testutil::unit_square();
  const BemMatrices ma = assemble(discretize(sq, a)), mb = assemble(discretize(sq, b));
  CHECK(mb.M_n.rows() == 2 * ma.M_n.rows());
  CHECK(mb.E().rows() == 2 * ma.E().rows());
}

TEST_CASE("matrix shapes and partition of unity") {
  const Discretization d = discretize(testutil::unit_square(), cfg(3));
  const BemMatrices m = assemble(d);
  const int rows = static_cast<int>(d.samples.size());
  CHECK(m.Phi_n.rows() == rows);
  CHECK(m.Phi_n.cols() == 16 * 3);
  CHECK(m.Psi_n.cols() == 16 * 3);
  CHECK(m.PhiBar_k.cols() == 16 * 3);
  CHECK(m.E().cols() == m.F().cols());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.Phi_n.cols());
  CHECK((m.Phi_n * ones - Eigen::VectorXd::Ones(rows)).lpNorm<Eigen::Infinity>() <= 1e-9);
  CHECK((m.M_n * ones - Eigen::VectorXd::Ones(rows)).lpNorm<Eigen::Infinity>() <= 1e-14);
  CHECK(m.fallback_rows.empty());
}

TEST_CASE("serial and parallel assembly agree") {
  const Discretization d = discretize(testutil::load("quadratic_blob.cage"), cfg(3));
  const BemMatrices a = assemble(d, {}, Execution::Serial), b = assemble(d, {}, Execution::Parallel);
  CHECK((a.E() - b.E()).norm() == 0.0);
  CHECK((a.F() - b.F()).norm() == 0.0);
  CHECK((a.W_g1() - b.W_g1()).norm() == 0.0);
  CHECK((a.W_g2() - b.W_g2()).norm() == 0.0);
}

TEST_CASE("regularized solves") {
  for (const char* name : {"square.cage", "cubic_blob.cage"}) {
    CAPTURE(name);
    const Discretization d = discretize(testutil::load(name), cfg(3));
    const BemMatrices m = assemble(d);
    const RegularizedSolve s1 = solve_regularization(m, SolverMethod::BiHC1);
    const RegularizedSolve s12 = solve_regularization(m, SolverMethod::BiHC12);
    CHECK(s12.C().allFinite());
    CHECK(s1.C().allFinite());
    const double r1 = combined_residual(m, s1), r12 = combined_residual(m, s12);
    CHECK(r12 <= r1 + 1e-9);
    CHECK(std::isfinite(r12));
  }
}

TEST_CASE("rotation symmetry of the residual") {
  const DeformationConfig c = cfg(3);
  const BemMatrices a = assemble(discretize(testutil::unit_square(), c));
  const BemMatrices b = assemble(discretize(rotated_square(), c));
  const double ra = combined_residual(a, solve_regularization(a, SolverMethod::BiHC12));
  const double rb = combined_residual(b, solve_regularization(b, SolverMethod::BiHC12));
  CHECK(std::abs(ra - rb) <= 1e-10 * std::max(1.0, ra));
  CHECK(a.Phi_n.norm() == doctest::Approx(b.Phi_n.norm()).epsilon(1e-12));
}

TEST_CASE("boundary identities for exact traces") {
  const Discretization d = discretize(testutil::unit_square(), cfg(3));
  const std::vector<Point2> pts{{0.5, 0.5}, {0.2, 0.7}, {0.9, 0.1}, {0.33, 0.05}};

  const Field one{[](const Point2&) { return 1.0; }, [](const Point2&) { return 0.0; },
                  [](const Point2&) { return Point2(0, 0); }, [](const Point2&) { return Point2(0, 0); }};
  const Field quad{[](const Point2& p) { return p.squaredNorm(); }, [](const Point2&) { return 4.0; },
                   [](const Point2& p) -> Point2 { return 2 * p; }, [](const Point2&) { return Point2(0, 0); }};
  const Field cube{[](const Point2& p) { return p.x() * p.x() * p.x(); }, [](const Point2& p) { return 6 * p.x(); },
                   [](const Point2& p) { return Point2(3 * p.x() * p.x(), 0); },
                   [](const Point2&) { return Point2(6, 0); }};

  for (const Field* f : {&one, &quad, &cube}) {
    const SubData t = traces(d, *f);
    for (const auto& p : pts) {
      const BieValue v = evaluate_bie(d, t.g1, t.g2, t.h1, t.h2, p);
      CHECK(std::abs(v.f - f->f(p)) <= 1e-10);
      CHECK(std::abs(v.laplacian - f->lap(p)) <= 1e-9);
    }
  }
}

TEST_CASE("configuration checks") {
  CHECK_THROWS_AS(check_config(cfg(2), 3), ValidationError);
  CHECK_NOTHROW(check_config(cfg(3), 3));
  DeformationConfig c = cfg(3);
  c.k = 2;
  CHECK_THROWS_AS(check_config(c, 1), ValidationError);
  c = cfg(3);
  c.subdiv = 0;
  CHECK_THROWS_AS(check_config(c, 1), ValidationError);
  CHECK(parse_solver_method(to_string(SolverMethod::BiHC1)) == SolverMethod::BiHC1);
  CHECK_THROWS(parse_solver_method("nonsense"));
}

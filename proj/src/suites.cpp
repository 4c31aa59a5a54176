#include "bihc/suites.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include <Eigen/Dense>

#include "bihc/errors.hpp"
#include "bihc/quadrature.hpp"

namespace bihc {

bool SuiteReport::passed() const {
  for (const auto& s : suites) {
    if (!s.passed) return false;
  }
  return !suites.empty();
}

std::string SuiteReport::to_string() const {
  std::string out;
  char buf[256];
  for (const auto& s : suites) {
    std::snprintf(buf, sizeof buf, "%-4s %-28s worst %.3e  tol %.1e  %s\n", s.passed ? "PASS" : "FAIL",
                  s.name.c_str(), s.worst, s.tolerance, s.detail.c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "quadrature fallbacks: %d\n", fallbacks);
  out += buf;
  return out;
}

Eigen::VectorXd fit_bernstein(const std::function<double(double)>& f, int p) {
  Eigen::MatrixXd A(p + 1, p + 1);
  Eigen::VectorXd rhs(p + 1);
  for (int i = 0; i <= p; ++i) {
    // Chebyshev–Lobatto nodes keep the collocation system well conditioned.
    const double t = p == 0 ? 0.5 : 0.5 - 0.5 * std::cos(M_PI * i / p);
    const auto row = bernstein_row(p, t);
    for (int j = 0; j <= p; ++j) A(i, j) = row[j];
    rhs[i] = f(t);
  }
  return A.partialPivLu().solve(rhs);
}

std::vector<Point2> random_interior_points(const Cage& cage, int count, double margin, std::uint64_t seed) {
  const BoundingBox box = cage.bbox();
  const double diag = box.diagonal();
  const ContainmentTester inside(cage);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.min.x(), box.max.x());
  std::uniform_real_distribution<double> uy(box.min.y(), box.max.y());
  std::vector<Point2> out;
  int attempts = 0, close = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 1000 * count + 10000) throw DomainError("random_interior_points: cage has no usable interior");
    const Point2 p(ux(rng), uy(rng));
    if (!inside.inside(p)) continue;
    if (closest_point(cage, p).distance < margin * diag) {
      // Thin cages: relax the margin rather than give up.
      if (++close >= 500) {
        margin *= 0.5;
        close = 0;
        if (margin < 1e-3) throw DomainError("random_interior_points: cage too thin for any usable margin");
      }
      continue;
    }
    out.push_back(p);
  }
  return out;
}

namespace {

double sup_rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double d = b.lpNorm<Eigen::Infinity>();
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(d, 1e-300);
}

double family_error(const BasisIntegrals& a, const BasisIntegrals& b) {
  return std::max({sup_rel(a.phi, b.phi), sup_rel(a.psi, b.psi), sup_rel(a.phit, b.phit), sup_rel(a.psit, b.psit),
                   sup_rel(a.phik, b.phik), sup_rel(a.psiw, b.psiw)});
}

SuiteResult quadrature_suite(const Cage& cage, const DeformationConfig& config, std::uint64_t seed) {
  SuiteResult r{"quadrature equivalence", true, 0.0, 1e-8, ""};
  const Cage elevated = elevate_cage(cage, cage.order());
  const auto pts = random_interior_points(cage, 8, 0.02, seed);
  int pairs = 0;
  for (const auto& curve : elevated.curves()) {
    for (const auto& p : pts) {
      const int n = config.n;
      const int k = config.order_k();
      try {
        const BasisIntegrals a = basis_integrals(curve, p, n, k, config.kernel);
        const BasisIntegrals b = quadrature_basis_integrals(curve, p, n, k);
        const BasisGradients ga = basis_integral_gradients(curve, p, n, k, config.kernel);
        const BasisGradients gb = quadrature_basis_gradients(curve, p, n, k);
        r.worst = std::max({r.worst, family_error(a, b), family_error(ga.dx, gb.dx), family_error(ga.dy, gb.dy)});
        ++pairs;
      } catch (const ProximityError&) {
        // Pair handled by the fallback; nothing to compare.
      }
    }
  }
  r.passed = r.worst <= r.tolerance;
  r.detail = std::to_string(pairs) + " (curve, point) pairs, values and gradients";
  return r;
}

SuiteResult unity_suite(const Cage& cage, const DeformationConfig& config, std::uint64_t seed, int* fallbacks) {
  SuiteResult r{"partition of unity", true, 0.0, 1e-7, ""};
  const Discretization disc = discretize(cage, config);
  std::vector<Point2> pts = random_interior_points(cage, 20, 0.02, seed + 1);
  const double near = 1e-7 * disc.diagonal;
  for (std::size_t i = 0; i < disc.samples.size(); i += std::max<std::size_t>(1, disc.samples.size() / 8)) {
    pts.push_back(disc.samples[i].point - near * disc.samples[i].outward);
  }
  for (const auto& p : pts) {
    const BasisRow row = basis_row(disc, p, config.kernel);
    *fallbacks += row.fallbacks;
    r.worst = std::max(r.worst, std::abs(row.phi.sum() - 1.0));
  }
  r.passed = r.worst <= r.tolerance;
  r.detail = std::to_string(pts.size()) + " points, including near-boundary probes";
  return r;
}

struct Monomial {
  int a, b;
};

SuiteResult monomial_suite(const Cage& cage, const DeformationConfig& config, std::uint64_t seed) {
  const int m = cage.order();
  const bool polygonal = m == 1;
  const int degree = polygonal ? 3 : 2;
  DeformationConfig c = config;
  c.n = std::max(config.n, degree * m);
  c.k = c.n;
  SuiteResult r{"monomial reproduction", true, 0.0, 1e-6, ""};
  const Discretization disc = discretize(cage, c);
  const int ns = disc.element_count();
  const int n = disc.n;
  const int k = disc.k;
  const BoundingBox box = cage.bbox();
  const double L = box.diagonal();
  const Point2 o = box.min;

  std::vector<Monomial> monos;
  for (int d = 0; d <= degree; ++d) {
    for (int a = d; a >= 0; --a) monos.push_back({a, d - a});
  }
  auto pw = [](double x, int e) { return e < 0 ? 0.0 : std::pow(x, e); };
  const auto pts = random_interior_points(cage, 50, 0.05, seed + 2);
  std::vector<BasisRow> rows;
  for (const auto& p : pts) rows.push_back(basis_row(disc, p, config.kernel));

  for (const auto& mo : monos) {
    const int a = mo.a, b = mo.b;
    auto f = [&](const Point2& x) { return pw((x.x() - o.x()) / L, a) * pw((x.y() - o.y()) / L, b); };
    auto grad = [&](const Point2& x) -> Point2 {
      const double u = (x.x() - o.x()) / L, v = (x.y() - o.y()) / L;
      return Point2(a * pw(u, a - 1) * pw(v, b) / L, b * pw(u, a) * pw(v, b - 1) / L);
    };
    auto lap = [&](const Point2& x) {
      const double u = (x.x() - o.x()) / L, v = (x.y() - o.y()) / L;
      return (a * (a - 1) * pw(u, a - 2) * pw(v, b) + b * (b - 1) * pw(u, a) * pw(v, b - 2)) / (L * L);
    };
    auto grad_lap = [&](const Point2& x) -> Point2 {
      const double u = (x.x() - o.x()) / L, v = (x.y() - o.y()) / L;
      const double gx = a * (a - 1) * (a - 2) * pw(u, a - 3) * pw(v, b) + b * (b - 1) * a * pw(u, a - 1) * pw(v, b - 2);
      const double gy = a * (a - 1) * b * pw(u, a - 2) * pw(v, b - 1) + b * (b - 1) * (b - 2) * pw(u, a) * pw(v, b - 3);
      return Point2(gx, gy) / (L * L * L);
    };
    Eigen::VectorXd g1 = Eigen::VectorXd::Zero(ns * n), g2 = Eigen::VectorXd::Zero(ns * n);
    Eigen::VectorXd h1 = Eigen::VectorXd::Zero(ns * k), h2 = Eigen::VectorXd::Zero(ns * k);
    for (int s = 0; s < ns; ++s) {
      const BezierCurve& e = disc.elements[s];
      const BezierCurve de = bezier_derivative(e);
      const Eigen::VectorXd c1 = fit_bernstein([&](double t) { return f(bezier_eval(e, t)); }, n);
      const Eigen::VectorXd c2 = fit_bernstein(
          [&](double t) { return grad(bezier_eval(e, t)).dot(perp(bezier_eval(de, t))); }, n - 1);
      const Eigen::VectorXd c3 = fit_bernstein([&](double t) { return lap(bezier_eval(e, t)); }, k);
      const Eigen::VectorXd c4 = fit_bernstein(
          [&](double t) {
            const Point2 d = bezier_eval(de, t);
            return grad_lap(bezier_eval(e, t)).dot(perp(d)) / d.squaredNorm();
          },
          k - 1);
      for (int j = 0; j <= n; ++j) g1[shared_index(s, j, n, ns)] = c1[j];
      for (int j = 0; j < n; ++j) g2[s * n + j] = c2[j];
      for (int j = 0; j <= k; ++j) h1[shared_index(s, j, k, ns)] = c3[j];
      for (int j = 0; j < k; ++j) h2[s * k + j] = c4[j];
    }
    double fmax = 0.0, lmax = 1.0 / (L * L), ef = 0.0, el = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      fmax = std::max(fmax, std::abs(f(pts[i])));
      lmax = std::max(lmax, std::abs(lap(pts[i])));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const BasisRow& row = rows[i];
      const double fv = row.phi.dot(g1) + row.psi.dot(g2) + row.phit.dot(h1) + row.psit.dot(h2);
      const double lv = row.phik.dot(h1) + row.psiw.dot(h2);
      ef = std::max(ef, std::abs(fv - f(pts[i])) / fmax);
      el = std::max(el, std::abs(lv - lap(pts[i])) / lmax);
    }
    r.worst = std::max({r.worst, ef, el});
  }
  r.passed = r.worst <= r.tolerance;
  r.detail = std::to_string(monos.size()) + " monomials of degree <= " + std::to_string(degree) + " at n = " +
             std::to_string(n) + ", values and Laplacians";
  return r;
}

}  // namespace

SuiteReport run_validation_suites(const Cage& cage, const DeformationConfig& config, std::uint64_t seed) {
  SuiteReport rep;
  rep.suites.push_back(quadrature_suite(cage, config, seed));
  rep.suites.push_back(unity_suite(cage, config, seed, &rep.fallbacks));
  rep.suites.push_back(monomial_suite(cage, config, seed));
  return rep;
}

}  // namespace bihc

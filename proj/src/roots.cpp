#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bihc/errors.hpp"
#include "bihc/polynomial.hpp"

namespace bihc {

namespace {

constexpr int kMaxAberthIterations = 500;
constexpr double kResidualTolerance = 1e-10;

std::vector<cplx> aberth(const ComplexPoly& p) {
  const int n = p.degree();
  const auto& a = p.coefficients();
  if (n == 1) return {-a[0] / a[1]};

  // Start on a circle around the root centroid with radius from the
  // geometric mean of the root magnitudes.
  const cplx centroid = -a[n - 1] / (static_cast<double>(n) * a[n]);
  double radius = std::pow(std::abs(p(centroid) / a[n]), 1.0 / n);
  if (!(radius > 0.0) || !std::isfinite(radius)) radius = 1.0;
  std::vector<cplx> z(n);
  for (int k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n + 0.4;
    z[k] = centroid + radius * cplx(std::cos(angle), std::sin(angle));
  }

  std::vector<bool> done(n, false);
  for (int it = 0; it < kMaxAberthIterations; ++it) {
    bool all_done = true;
    for (int i = 0; i < n; ++i) {
      if (done[i]) continue;
      cplx v, dv;
      p.eval_with_derivative(z[i], v, dv);
      if (v == 0.0) {
        done[i] = true;
        continue;
      }
      const cplx ratio = v / dv;
      cplx sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) sum += 1.0 / (z[i] - z[j]);
      }
      const cplx step = ratio / (1.0 - ratio * sum);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) {
        // Collision with another estimate: nudge and retry.
        z[i] += cplx(1e-8, 1e-8) * (1.0 + std::abs(z[i]));
        all_done = false;
        continue;
      }
      z[i] -= step;
      if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(z[i]))) {
        done[i] = true;
      } else {
        all_done = false;
      }
    }
    if (all_done) break;
  }

  // Newton polishing; keep an update only if it lowers the residual.
  for (auto& root : z) {
    for (int it = 0; it < 3; ++it) {
      cplx v, dv;
      p.eval_with_derivative(root, v, dv);
      if (v == 0.0 || dv == 0.0) break;
      const cplx next = root - v / dv;
      if (std::abs(p(next)) < std::abs(v)) {
        root = next;
      } else {
        break;
      }
    }
  }
  return z;
}

}  // namespace

RootSet cluster_roots(const std::vector<cplx>& values, double cluster_tol) {
  const std::size_t n = values.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(values[i] - values[j]) < cluster_tol) parent[find(i)] = find(j);
    }
  }
  RootSet set;
  std::vector<long> slot(n, -1);
  std::vector<cplx> sums;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(set.roots.size());
      set.roots.push_back({0.0, 0});
      sums.push_back(0.0);
    }
    sums[slot[r]] += values[i];
    set.roots[slot[r]].multiplicity += 1;
  }
  for (std::size_t k = 0; k < set.roots.size(); ++k) {
    set.roots[k].value = sums[k] / static_cast<double>(set.roots[k].multiplicity);
  }
  return set;
}

RootSet complex_roots(const ComplexPoly& p, double cluster_tol) {
  if (p.degree() < 1) throw DomainError("complex_roots: degree must be ≥ 1");
  const std::vector<cplx> z = aberth(p);
  RootSet set = cluster_roots(z, cluster_tol);

  const double scale = p.max_coefficient_magnitude();
  double worst = 0.0;
  for (const auto& r : set.roots) {
    if (r.multiplicity != 1) continue;
    const double growth = std::pow(std::max(1.0, std::abs(r.value)), p.degree());
    const double residual = std::abs(p(r.value)) / (scale * growth);
    if (!std::isfinite(residual)) worst = std::numeric_limits<double>::infinity();
    worst = std::max(worst, residual);
  }
  if (worst > kResidualTolerance) {
    throw NumericalError("complex_roots: root finder did not converge", worst);
  }
  return set;
}

}  // namespace bihc

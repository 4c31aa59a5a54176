#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bihc/bem.hpp"
#include "bihc/cage.hpp"

namespace bihc {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::vector<SuiteResult> suites;
  int fallbacks = 0;
  bool passed() const;
  std::string to_string() const;
};

/// Quadrature equivalence, partition of unity (including near-boundary points
/// that exercise the fallback), and monomial reproduction with exact traces.
SuiteReport run_validation_suites(const Cage& ccw_cage, const DeformationConfig& config, std::uint64_t seed = 1);

/// Bernstein coefficients (order p) of a polynomial given by its values on [0,1].
Eigen::VectorXd fit_bernstein(const std::function<double(double)>& f, int p);

/// Interior points at least `margin`·diag from the boundary, drawn by rejection;
/// the margin is halved (down to 1e-3) when the cage is too thin for it.
std::vector<Point2> random_interior_points(const Cage& cage, int count, double margin, std::uint64_t seed);

}  // namespace bihc

#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "bihc/coordinates.hpp"

namespace bihc {

enum class ScaleMode { Unit, AHAP, AAAP, AAAPCentered };

std::string to_string(ScaleMode m);
ScaleMode parse_scale_mode(const std::string& s);

/// energy(s) = sᵀQs + 2bᵀs + c, minimized over s_i ≥ s_min.
struct ScaleProblem {
  ScaleMode mode = ScaleMode::Unit;
  std::vector<Point2> probes;
  Eigen::MatrixXd Q;
  Eigen::VectorXd b;
  double c = 0.0;
  double s_min = kMinScale;
  /// Residual rows: energy(s) = ‖A s + a‖².
  Eigen::MatrixXd A;
  Eigen::VectorXd a;

  double energy(const Eigen::VectorXd& s) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& s) const;
};

/// Probes default to the inward-offset sample points of the discretization.
ScaleProblem build_scale_problem(const CoordinateSystem& sys, const BoundaryData& target, ScaleMode mode,
                                 double w = 1.0, const std::vector<Point2>& probes = {});

/// Δf at `probes` (AHAP) or the Jacobian entries (AAAP) evaluated directly
/// from a fully specified BoundaryData; used to cross-check the quadratic form.
double direct_energy(const CoordinateSystem& sys, const BoundaryData& bd, ScaleMode mode, double w,
                     const std::vector<Point2>& probes);

struct ScaleSolution {
  Eigen::VectorXd s;
  double energy = 0.0;
  double unit_energy = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// Active-set solve of the box-constrained quadratic; Unit mode returns s ≡ 1.
ScaleSolution optimize_scales(const ScaleProblem& problem);

/// Stationarity/complementarity residual of s for the bound-constrained problem.
double kkt_residual(const ScaleProblem& problem, const Eigen::VectorXd& s);

}  // namespace bihc

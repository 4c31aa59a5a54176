#pragma once

#include "bihc/bezier.hpp"
#include "bihc/kernels.hpp"

namespace bihc {

enum class Family { Phi, Psi, PhiTilde, PsiTilde, PhiK, PsiWeighted, F2, F4, LogMoment };

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  /// False when some piece did not reach tolerance within the depth cap.
  bool converged = true;
};

struct QuadratureSettings {
  double tolerance = 1e-12;
  unsigned max_depth = 15;
};

/// Adaptive Gauss–Kronrod integration of one basis function or moment, with
/// breakpoints graded geometrically toward the parameter of closest approach.
///
/// For the basis families `index` selects the Bernstein function and
/// `basis_order` its order (n for Phi/Psi-type data, k for the tilde families;
/// Psi, PsiTilde and PsiWeighted use basis_order − 1 internally). For the
/// moments `index` is the power h and basis_order is ignored.
QuadratureResult quadrature_oracle(Family family, const BezierCurve& curve, const Point2& eta,
                                   int index, int basis_order, const QuadratureSettings& settings = {});

/// ∂/∂η of a basis family (not defined for the moments).
Point2 quadrature_gradient(Family family, const BezierCurve& curve, const Point2& eta, int index,
                           int basis_order, const QuadratureSettings& settings = {});

BasisIntegrals quadrature_basis_integrals(const BezierCurve& curve, const Point2& eta, int n, int k,
                                          const QuadratureSettings& settings = {});
BasisGradients quadrature_basis_gradients(const BezierCurve& curve, const Point2& eta, int n, int k,
                                          const QuadratureSettings& settings = {});

}  // namespace bihc

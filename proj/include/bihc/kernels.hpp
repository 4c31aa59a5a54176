#pragma once

#include <Eigen/Core>

#include "bihc/bezier.hpp"
#include "bihc/polynomial.hpp"

namespace bihc {

/// G1 = −ln r / 2π and G2 = −r² (ln r − 1) / 8π with their gradients taken with
/// respect to the evaluation point η (these are the kernels' "∇₁" in the
/// boundary integrals; they equal minus the ξ-gradient).
struct FundamentalKernels {
  double g1 = 0.0;
  double g2 = 0.0;
  Point2 grad_g1 = Point2::Zero();
  Point2 grad_g2 = Point2::Zero();
};

FundamentalKernels fundamental_kernels(const Point2& xi, const Point2& eta);

struct KernelSettings {
  /// Parameter-space distance from a root to [0,1] below which the closed form is refused.
  double proximity_threshold = 1e-6;
  double cluster_tolerance = 1e-7;
  /// Relative imaginary residue tolerated before the result is deemed unreliable.
  double imaginary_tolerance = 1e-8;
  /// Leading monomial coefficients below this fraction of the curve scale are dropped.
  double degree_trim = 1e-12;
};

struct MomentPair {
  double f2 = 0.0;
  double f4 = 0.0;
};

/// F_{h,2} = ∫₀¹ t^h/‖c(t)−η‖² dt and F_{h,4} = ∫₀¹ t^h/‖c(t)−η‖⁴ dt by residues.
MomentPair F2_F4(int h, const BezierCurve& curve, const Point2& eta, const KernelSettings& settings = {});

/// ∫₀¹ t^j ln‖c(t)−η‖ dt via integration by parts onto F_{h,2}.
double log_moment_integral(int j, const BezierCurve& curve, const Point2& eta,
                           const KernelSettings& settings = {});

/// Per-element basis integrals at one evaluation point η.
///
///   phi_j  = ∫ ∇G1·c'^⊥ B_j^n dt          j = 0..n      (Dirichlet data)
///   psi_j  = ∫ G1 B_j^{n−1} dt             j = 0..n−1    (Neumann flux data)
///   phit_j = ∫ ∇G2·c'^⊥ B_j^k dt          j = 0..k      (Δf)
///   psit_j = ∫ G2 ‖c'‖² B_j^{k−1} dt       j = 0..k−1    (∂Δf/∂n)
///   phik_j = ∫ ∇G1·c'^⊥ B_j^k dt          j = 0..k      (Δf in the Laplacian identity)
///   psiw_j = ∫ G1 ‖c'‖² B_j^{k−1} dt       j = 0..k−1    (∂Δf/∂n in the Laplacian identity)
struct BasisIntegrals {
  Eigen::VectorXd phi, psi, phit, psit, phik, psiw;

  static BasisIntegrals zero(int n, int k);
  bool all_finite() const;
};

struct BasisGradients {
  BasisIntegrals dx, dy;
};

/// Closed form; throws ProximityError when η is too close to the curve.
BasisIntegrals basis_integrals(const BezierCurve& curve, const Point2& eta, int n, int k,
                               const KernelSettings& settings = {});
BasisGradients basis_integral_gradients(const BezierCurve& curve, const Point2& eta, int n, int k,
                                        const KernelSettings& settings = {});

/// Closed form with automatic fallback to adaptive quadrature on proximity
/// (or on an unreliable imaginary residue). `used_fallback` reports which path ran.
BasisIntegrals basis_integrals_robust(const BezierCurve& curve, const Point2& eta, int n, int k,
                                      const KernelSettings& settings, bool* used_fallback = nullptr);
BasisGradients basis_integral_gradients_robust(const BezierCurve& curve, const Point2& eta, int n,
                                               int k, const KernelSettings& settings,
                                               bool* used_fallback = nullptr);

/// Largest relative imaginary residue observed by the residue evaluation of
/// F_{h,2} and F_{h,4} for h = 0..h_max.
double moment_imaginary_residue(const BezierCurve& curve, const Point2& eta, int h_max,
                                const KernelSettings& settings = {});

}  // namespace bihc

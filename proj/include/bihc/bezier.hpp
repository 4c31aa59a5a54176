#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

namespace bihc {

using Point2 = Eigen::Vector2d;

/// (a, b)^⊥ = (b, −a). For a counter-clockwise loop, c'(t)^⊥ points outward.
inline Point2 perp(const Point2& a) { return {a.y(), -a.x()}; }

/// Bernstein basis of order n evaluated at t ∈ [0,1].
std::vector<double> bernstein_row(int n, double t);

/// Binomial coefficient as a double; exact for the orders used here.
double binomial(int n, int k);

/// Bézier curve of order m given by m+1 control points.
///
/// Order 0 is allowed so that hodographs of linear curves are representable;
/// cage edges require order ≥ 1 (checked by the cage).
class BezierCurve {
 public:
  BezierCurve() = default;
  explicit BezierCurve(std::vector<Point2> control_points);

  int order() const { return static_cast<int>(points_.size()) - 1; }
  const std::vector<Point2>& control_points() const { return points_; }
  const Point2& control_point(int j) const { return points_[j]; }
  const Point2& front() const { return points_.front(); }
  const Point2& back() const { return points_.back(); }

  /// True when every control point coincides with the first one.
  bool degenerate() const;

 private:
  std::vector<Point2> points_;
};

/// De Casteljau evaluation.
Point2 bezier_eval(const BezierCurve& curve, double t);

/// Hodograph: order m−1 with control points m·(c_{j+1} − c_j).
BezierCurve bezier_derivative(const BezierCurve& curve);

BezierCurve degree_elevate(const BezierCurve& curve, int target_order);

/// Split at t ∈ (0,1); both halves keep the order of the input.
std::pair<BezierCurve, BezierCurve> split_de_casteljau(const BezierCurve& curve, double t);

/// Sub-curve over the parameter interval [a, b] ⊆ [0, 1], reparametrized to [0, 1].
BezierCurve restrict_curve(const BezierCurve& curve, double a, double b);

/// Monomial coefficients a_i with c(t) = Σ a_i t^i.
std::vector<Point2> monomial_coefficients(const BezierCurve& curve);

/// Linear map taking the n+1 Bernstein coefficients of a polynomial on [0,1] to
/// the coefficients of its restriction to [a, b] (rows: sub coefficients).
Eigen::MatrixXd restriction_matrix(int n, double a, double b);

/// Linear map from order-n Bernstein coefficients to order-target coefficients.
Eigen::MatrixXd elevation_matrix(int n, int target_order);

/// Monomial coefficients of the Bernstein basis polynomial B_j^n.
std::vector<double> bernstein_monomial(int n, int j);

/// Bernstein coefficients of the polynomial with the given monomial coefficients,
/// expressed at order n (n ≥ degree).
std::vector<double> monomial_to_bernstein(const std::vector<double>& monomial, int n);

}  // namespace bihc

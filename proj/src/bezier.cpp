#include "bihc/bezier.hpp"

#include <cmath>
#include <string>

#include "bihc/errors.hpp"

namespace bihc {

namespace {

void check_unit(double t, const char* op) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError(std::string(op) + ": parameter " + std::to_string(t) + " outside [0,1]");
  }
}

// Blossom evaluation: reduce the control polygon once per entry of `params`.
template <class T>
T blossom(std::vector<T> pts, const std::vector<double>& params) {
  const int m = static_cast<int>(pts.size()) - 1;
  for (int level = 0; level < m; ++level) {
    const double t = params[level];
    for (int j = 0; j < m - level; ++j) {
      pts[j] = (1.0 - t) * pts[j] + t * pts[j + 1];
    }
  }
  return pts[0];
}

template <class T>
std::vector<T> restrict_coefficients(const std::vector<T>& pts, double a, double b) {
  const int m = static_cast<int>(pts.size()) - 1;
  std::vector<T> out(pts.size());
  std::vector<double> params(m);
  for (int i = 0; i <= m; ++i) {
    for (int l = 0; l < m; ++l) params[l] = l < m - i ? a : b;
    out[i] = blossom(pts, params);
  }
  return out;
}

}  // namespace

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

std::vector<double> bernstein_row(int n, double t) {
  if (n < 0) throw DomainError("bernstein_row: negative order");
  check_unit(t, "bernstein_row");
  // Triangle recursion keeps every entry non-negative.
  std::vector<double> row(n + 1, 0.0);
  row[0] = 1.0;
  const double s = 1.0 - t;
  for (int deg = 1; deg <= n; ++deg) {
    double carry = 0.0;
    for (int j = 0; j < deg; ++j) {
      const double v = row[j];
      row[j] = s * v + carry;
      carry = t * v;
    }
    row[deg] = carry;
  }
  return row;
}

BezierCurve::BezierCurve(std::vector<Point2> control_points) : points_(std::move(control_points)) {
  if (points_.empty()) throw DomainError("BezierCurve: no control points");
  for (const auto& p : points_) {
    if (!p.allFinite()) throw DomainError("BezierCurve: non-finite control point");
  }
}

bool BezierCurve::degenerate() const {
  for (const auto& p : points_) {
    if (p != points_.front()) return false;
  }
  return true;
}

Point2 bezier_eval(const BezierCurve& curve, double t) {
  check_unit(t, "bezier_eval");
  std::vector<Point2> pts = curve.control_points();
  const int m = curve.order();
  for (int level = 1; level <= m; ++level) {
    for (int j = 0; j <= m - level; ++j) pts[j] = (1.0 - t) * pts[j] + t * pts[j + 1];
  }
  return pts[0];
}

BezierCurve bezier_derivative(const BezierCurve& curve) {
  const int m = curve.order();
  if (m < 1) throw DomainError("bezier_derivative: order must be ≥ 1");
  std::vector<Point2> d(m);
  for (int j = 0; j < m; ++j) d[j] = m * (curve.control_point(j + 1) - curve.control_point(j));
  return BezierCurve(std::move(d));
}

BezierCurve degree_elevate(const BezierCurve& curve, int target_order) {
  if (target_order < curve.order()) {
    throw DomainError("degree_elevate: target order " + std::to_string(target_order) +
                      " below curve order " + std::to_string(curve.order()));
  }
  std::vector<Point2> pts = curve.control_points();
  for (int m = curve.order(); m < target_order; ++m) {
    std::vector<Point2> next(m + 2);
    next[0] = pts[0];
    next[m + 1] = pts[m];
    for (int j = 1; j <= m; ++j) {
      const double a = static_cast<double>(j) / (m + 1);
      next[j] = a * pts[j - 1] + (1.0 - a) * pts[j];
    }
    pts = std::move(next);
  }
  return BezierCurve(std::move(pts));
}

std::pair<BezierCurve, BezierCurve> split_de_casteljau(const BezierCurve& curve, double t) {
  if (!(t > 0.0 && t < 1.0)) {
    throw DomainError("split_de_casteljau: parameter " + std::to_string(t) + " outside (0,1)");
  }
  const int m = curve.order();
  std::vector<Point2> pts = curve.control_points();
  std::vector<Point2> left(m + 1), right(m + 1);
  left[0] = pts[0];
  right[m] = pts[m];
  for (int level = 1; level <= m; ++level) {
    for (int j = 0; j <= m - level; ++j) pts[j] = (1.0 - t) * pts[j] + t * pts[j + 1];
    left[level] = pts[0];
    right[m - level] = pts[m - level];
  }
  return {BezierCurve(std::move(left)), BezierCurve(std::move(right))};
}

BezierCurve restrict_curve(const BezierCurve& curve, double a, double b) {
  check_unit(a, "restrict_curve");
  check_unit(b, "restrict_curve");
  if (!(a < b)) throw DomainError("restrict_curve: empty interval");
  return BezierCurve(restrict_coefficients(curve.control_points(), a, b));
}

std::vector<Point2> monomial_coefficients(const BezierCurve& curve) {
  const int m = curve.order();
  std::vector<Point2> a(m + 1, Point2::Zero());
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      a[i] += sign * binomial(m, i) * binomial(i, j) * curve.control_point(j);
    }
  }
  return a;
}

Eigen::MatrixXd restriction_matrix(int n, double a, double b) {
  Eigen::MatrixXd r(n + 1, n + 1);
  for (int col = 0; col <= n; ++col) {
    std::vector<double> unit(n + 1, 0.0);
    unit[col] = 1.0;
    const auto sub = restrict_coefficients(unit, a, b);
    for (int row = 0; row <= n; ++row) r(row, col) = sub[row];
  }
  return r;
}

Eigen::MatrixXd elevation_matrix(int n, int target_order) {
  if (target_order < n) throw DomainError("elevation_matrix: target below source order");
  Eigen::MatrixXd e = Eigen::MatrixXd::Identity(n + 1, n + 1);
  for (int m = n; m < target_order; ++m) {
    Eigen::MatrixXd step = Eigen::MatrixXd::Zero(m + 2, m + 1);
    step(0, 0) = 1.0;
    step(m + 1, m) = 1.0;
    for (int j = 1; j <= m; ++j) {
      const double w = static_cast<double>(j) / (m + 1);
      step(j, j - 1) = w;
      step(j, j) = 1.0 - w;
    }
    e = step * e;
  }
  return e;
}

std::vector<double> bernstein_monomial(int n, int j) {
  std::vector<double> c(n + 1, 0.0);
  const double lead = binomial(n, j);
  for (int i = 0; i <= n - j; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    c[j + i] = sign * lead * binomial(n - j, i);
  }
  return c;
}

std::vector<double> monomial_to_bernstein(const std::vector<double>& monomial, int n) {
  const int deg = static_cast<int>(monomial.size()) - 1;
  if (deg > n) throw DomainError("monomial_to_bernstein: degree exceeds target order");
  // t^i = Σ_{j≥i} C(j,i)/C(n,i) B_j^n(t)
  std::vector<double> b(n + 1, 0.0);
  for (int i = 0; i <= deg; ++i) {
    if (monomial[i] == 0.0) continue;
    for (int j = i; j <= n; ++j) b[j] += monomial[i] * binomial(j, i) / binomial(n, i);
  }
  return b;
}

}  // namespace bihc

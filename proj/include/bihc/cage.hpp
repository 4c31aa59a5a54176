#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bihc/bezier.hpp"

namespace bihc {

struct BoundingBox {
  Point2 min;
  Point2 max;
  double diagonal() const { return (max - min).norm(); }
};

/// Closed loop of Bézier curves; curve i ends where curve i+1 starts.
///
/// Construction does not validate: use validate_cage() for a full report.
class Cage {
 public:
  Cage() = default;
  explicit Cage(std::vector<BezierCurve> curves);

  /// Builds a loop from shared vertices plus per-curve interior control points;
  /// curve i runs from vertices[i] to vertices[(i+1) % N].
  static Cage from_loop(const std::vector<Point2>& vertices,
                        const std::vector<std::vector<Point2>>& interiors);

  std::size_t size() const { return curves_.size(); }
  const BezierCurve& curve(std::size_t i) const { return curves_[i]; }
  const std::vector<BezierCurve>& curves() const { return curves_; }

  /// Highest curve order in the loop.
  int order() const;
  BoundingBox bbox() const;

 private:
  std::vector<BezierCurve> curves_;
};

/// Every curve raised to `order`; shared endpoints are preserved bitwise.
Cage elevate_cage(const Cage& cage, int order);

/// Reversed traversal (and reversed curves).
Cage reversed(const Cage& cage);

/// Signed area enclosed by the adaptively flattened loop.
double signed_area(const Cage& cage);

struct ValidationReport {
  std::vector<std::size_t> closure_violations;  ///< i: end of curve i ≠ start of curve i+1
  std::vector<std::size_t> degenerate_curves;
  std::vector<std::pair<std::size_t, std::size_t>> intersections;  ///< curve index pairs
  double signed_area = 0.0;
  bool counter_clockwise = false;
  bool reversal_applied = false;
  bool too_few_curves = false;

  bool valid() const;
  std::string to_string() const;
};

ValidationReport validate_cage(const Cage& cage);

/// Returns the cage in CCW orientation; `report.reversal_applied` tells whether it was flipped.
Cage normalize_orientation(const Cage& cage, ValidationReport* report = nullptr);

/// Adaptive flattening: control polygon within `tolerance` of the chord.
std::vector<Point2> flatten_curve(const BezierCurve& curve, double tolerance);

struct ClosestPoint {
  std::size_t curve = 0;
  double t = 0.0;
  Point2 point = Point2::Zero();
  double distance = 0.0;
};

/// Nearest boundary point by dense sampling followed by Newton refinement.
ClosestPoint closest_point(const Cage& cage, const Point2& p);
ClosestPoint closest_point_on_curve(const BezierCurve& curve, const Point2& p);

/// Point classification against a flattened copy of the cage, refined near the boundary.
class ContainmentTester {
 public:
  explicit ContainmentTester(const Cage& cage);

  /// Winding number = 1 and farther than 1e-9·bbox from the boundary.
  bool inside(const Point2& p) const;
  int winding_number(const Point2& p) const;

 private:
  Cage cage_;
  double diagonal_;
  double tolerance_;
  std::vector<std::vector<Point2>> polylines_;
};

bool point_inside(const Cage& cage, const Point2& p);

/// FNV-1a over the order, curve count and IEEE bit patterns of every control point.
std::uint64_t content_hash(const Cage& cage);

}  // namespace bihc

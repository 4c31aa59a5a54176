#include "bihc/cage.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "bihc/errors.hpp"

namespace bihc {

namespace {

constexpr double kFlattenFraction = 1e-6;
constexpr double kBoundaryFraction = 1e-9;

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

double flatness(const BezierCurve& c) {
  const Point2& a = c.front();
  const Point2& b = c.back();
  const Point2 chord = b - a;
  const double len = chord.norm();
  double worst = 0.0;
  for (int j = 1; j < c.order(); ++j) {
    const Point2 d = c.control_point(j) - a;
    const double dist = len > 0.0 ? std::abs(cross(chord, d)) / len : d.norm();
    worst = std::max(worst, dist);
  }
  return worst;
}

void flatten_into(const BezierCurve& c, double tol, int depth, std::vector<Point2>& out) {
  if (c.order() <= 1 || depth >= 24 || flatness(c) <= tol) {
    out.push_back(c.back());
    return;
  }
  auto halves = split_de_casteljau(c, 0.5);
  flatten_into(halves.first, tol, depth + 1, out);
  flatten_into(halves.second, tol, depth + 1, out);
}

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

int orient(const Point2& a, const Point2& b, const Point2& c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

std::vector<std::vector<Point2>> flatten_all(const Cage& cage, double tol) {
  std::vector<std::vector<Point2>> lines;
  lines.reserve(cage.size());
  for (const auto& c : cage.curves()) lines.push_back(flatten_curve(c, tol));
  return lines;
}

}  // namespace

Cage::Cage(std::vector<BezierCurve> curves) : curves_(std::move(curves)) {}

Cage Cage::from_loop(const std::vector<Point2>& vertices,
                     const std::vector<std::vector<Point2>>& interiors) {
  if (vertices.size() != interiors.size()) {
    throw ContractError("Cage::from_loop: vertex and interior lists differ in length");
  }
  std::vector<BezierCurve> curves;
  curves.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    std::vector<Point2> pts;
    pts.push_back(vertices[i]);
    pts.insert(pts.end(), interiors[i].begin(), interiors[i].end());
    pts.push_back(vertices[(i + 1) % vertices.size()]);
    curves.emplace_back(std::move(pts));
  }
  return Cage(std::move(curves));
}

int Cage::order() const {
  int m = 0;
  for (const auto& c : curves_) m = std::max(m, c.order());
  return m;
}

BoundingBox Cage::bbox() const {
  BoundingBox box{Point2::Constant(std::numeric_limits<double>::infinity()),
                  Point2::Constant(-std::numeric_limits<double>::infinity())};
  // The control polygon hull contains the curve.
  for (const auto& c : curves_) {
    for (const auto& p : c.control_points()) {
      box.min = box.min.cwiseMin(p);
      box.max = box.max.cwiseMax(p);
    }
  }
  return box;
}

Cage elevate_cage(const Cage& cage, int order) {
  std::vector<BezierCurve> curves;
  curves.reserve(cage.size());
  for (const auto& c : cage.curves()) curves.push_back(degree_elevate(c, order));
  return Cage(std::move(curves));
}

Cage reversed(const Cage& cage) {
  std::vector<BezierCurve> curves;
  curves.reserve(cage.size());
  for (auto it = cage.curves().rbegin(); it != cage.curves().rend(); ++it) {
    std::vector<Point2> pts(it->control_points().rbegin(), it->control_points().rend());
    curves.emplace_back(std::move(pts));
  }
  return Cage(std::move(curves));
}

std::vector<Point2> flatten_curve(const BezierCurve& curve, double tolerance) {
  std::vector<Point2> out{curve.front()};
  flatten_into(curve, tolerance, 0, out);
  return out;
}

double signed_area(const Cage& cage) {
  const double tol = kFlattenFraction * cage.bbox().diagonal();
  double area = 0.0;
  for (const auto& c : cage.curves()) {
    const auto line = flatten_curve(c, tol);
    for (std::size_t i = 0; i + 1 < line.size(); ++i) area += cross(line[i], line[i + 1]);
  }
  return 0.5 * area;
}

bool ValidationReport::valid() const {
  return !too_few_curves && closure_violations.empty() && degenerate_curves.empty() &&
         intersections.empty() && counter_clockwise;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  os << "cage validation: " << (valid() ? "valid" : "INVALID") << "\n";
  if (too_few_curves) os << "  fewer than 3 curves\n";
  for (auto i : closure_violations) os << "  closure violation after curve " << i << "\n";
  for (auto i : degenerate_curves) os << "  degenerate curve " << i << "\n";
  for (auto [a, b] : intersections) os << "  self-intersection between curves " << a << " and " << b << "\n";
  os << "  signed area " << signed_area << (counter_clockwise ? " (ccw)" : " (cw)") << "\n";
  if (reversal_applied) os << "  orientation reversal applied\n";
  return os.str();
}

ValidationReport validate_cage(const Cage& cage) {
  ValidationReport report;
  const std::size_t n = cage.size();
  report.too_few_curves = n < 3;
  if (n == 0) return report;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = cage.curve(i);
    if (c.order() < 1 || c.degenerate()) report.degenerate_curves.push_back(i);
    if (c.back() != cage.curve((i + 1) % n).front()) report.closure_violations.push_back(i);
  }
  report.signed_area = signed_area(cage);
  report.counter_clockwise = report.signed_area > 0.0;

  // Brute-force segment intersection on the flattened loop; neighbouring
  // segments (sharing a vertex) are skipped.
  const double tol = kFlattenFraction * cage.bbox().diagonal();
  struct Seg {
    Point2 a, b;
    std::size_t curve;
    std::size_t loop_index;
  };
  std::vector<Seg> segs;
  for (std::size_t i = 0; i < n; ++i) {
    const auto line = flatten_curve(cage.curve(i), tol);
    for (std::size_t s = 0; s + 1 < line.size(); ++s) {
      segs.push_back({line[s], line[s + 1], i, segs.size()});
    }
  }
  const std::size_t total = segs.size();
  std::vector<std::pair<std::size_t, std::size_t>> hits;
  for (std::size_t i = 0; i < total; ++i) {
    const Point2 lo_i = segs[i].a.cwiseMin(segs[i].b), hi_i = segs[i].a.cwiseMax(segs[i].b);
    for (std::size_t j = i + 1; j < total; ++j) {
      if (j == i + 1 || (i == 0 && j == total - 1)) continue;
      const Point2 lo_j = segs[j].a.cwiseMin(segs[j].b), hi_j = segs[j].a.cwiseMax(segs[j].b);
      if ((lo_i.array() > hi_j.array()).any() || (lo_j.array() > hi_i.array()).any()) continue;
      if (segments_intersect(segs[i].a, segs[i].b, segs[j].a, segs[j].b)) {
        hits.emplace_back(std::min(segs[i].curve, segs[j].curve), std::max(segs[i].curve, segs[j].curve));
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  report.intersections = std::move(hits);
  return report;
}

Cage normalize_orientation(const Cage& cage, ValidationReport* report) {
  ValidationReport local = validate_cage(cage);
  if (local.counter_clockwise || local.signed_area == 0.0) {
    if (report) *report = local;
    return cage;
  }
  Cage flipped = reversed(cage);
  ValidationReport after = validate_cage(flipped);
  after.reversal_applied = true;
  if (report) *report = after;
  return flipped;
}

ClosestPoint closest_point_on_curve(const BezierCurve& curve, const Point2& p) {
  const int samples = 32 * std::max(1, curve.order());
  ClosestPoint best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= samples; ++s) {
    const double t = static_cast<double>(s) / samples;
    const Point2 q = bezier_eval(curve, t);
    const double d = (q - p).norm();
    if (d < best.distance) best = {0, t, q, d};
  }
  if (curve.order() < 1) return best;
  const BezierCurve d1 = bezier_derivative(curve);
  const BezierCurve d2 = curve.order() >= 2 ? bezier_derivative(d1) : BezierCurve({Point2::Zero()});
  double t = best.t;
  for (int it = 0; it < 30; ++it) {
    const Point2 c = bezier_eval(curve, t) - p;
    const Point2 c1 = bezier_eval(d1, t);
    const Point2 c2 = bezier_eval(d2, t);
    const double f = c.dot(c1);
    const double df = c1.squaredNorm() + c.dot(c2);
    if (df <= 0.0) break;
    const double next = std::clamp(t - f / df, 0.0, 1.0);
    if (std::abs(next - t) < 1e-16) {
      t = next;
      break;
    }
    t = next;
  }
  const Point2 q = bezier_eval(curve, t);
  const double d = (q - p).norm();
  if (d < best.distance) best = {0, t, q, d};
  return best;
}

ClosestPoint closest_point(const Cage& cage, const Point2& p) {
  ClosestPoint best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cage.size(); ++i) {
    ClosestPoint cp = closest_point_on_curve(cage.curve(i), p);
    if (cp.distance < best.distance) {
      best = cp;
      best.curve = i;
    }
  }
  return best;
}

ContainmentTester::ContainmentTester(const Cage& cage)
    : cage_(cage), diagonal_(cage.bbox().diagonal()), tolerance_(kFlattenFraction * diagonal_) {
  polylines_ = flatten_all(cage_, tolerance_);
}

int ContainmentTester::winding_number(const Point2& p) const {
  int wn = 0;
  for (const auto& line : polylines_) {
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      const Point2& a = line[i];
      const Point2& b = line[i + 1];
      if (a.y() <= p.y()) {
        if (b.y() > p.y() && cross(b - a, p - a) > 0.0) ++wn;
      } else {
        if (b.y() <= p.y() && cross(b - a, p - a) < 0.0) --wn;
      }
    }
  }
  return wn;
}

bool ContainmentTester::inside(const Point2& p) const {
  double poly_dist = std::numeric_limits<double>::infinity();
  for (const auto& line : polylines_) {
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      poly_dist = std::min(poly_dist, segment_distance(p, line[i], line[i + 1]));
    }
  }
  if (poly_dist > 20.0 * tolerance_) return winding_number(p) == 1;

  // Within the flattening band: decide against the exact curve.
  const ClosestPoint cp = closest_point(cage_, p);
  if (cp.distance <= kBoundaryFraction * diagonal_) return false;
  const bool interior_param = cp.t > 1e-9 && cp.t < 1.0 - 1e-9;
  if (interior_param) {
    const Point2 tangent = bezier_eval(bezier_derivative(cage_.curve(cp.curve)), cp.t);
    if (tangent.norm() > 0.0) return (p - cp.point).dot(perp(tangent)) < 0.0;
  }
  return winding_number(p) == 1;
}

bool point_inside(const Cage& cage, const Point2& p) { return ContainmentTester(cage).inside(p); }

std::uint64_t content_hash(const Cage& cage) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffULL;
      h *= 1099511628211ULL;
    }
  };
  mix(cage.size());
  for (const auto& c : cage.curves()) {
    mix(static_cast<std::uint64_t>(c.order()));
    for (const auto& p : c.control_points()) {
      for (int k = 0; k < 2; ++k) {
        std::uint64_t bits;
        const double v = p[k];
        std::memcpy(&bits, &v, sizeof bits);
        mix(bits);
      }
    }
  }
  return h;
}

}  // namespace bihc

#include "bihc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace bihc {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const SvgScene& scene) {
  Point2 lo(1e300, 1e300), hi(-1e300, -1e300);
  auto grow = [&](const Point2& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  };
  for (const auto& m : scene.meshes) {
    for (const auto& v : m.vertices) grow(v);
  }
  for (const auto& c : scene.cages) {
    for (const auto& curve : c.cage.curves()) {
      for (const auto& p : curve.control_points()) grow(p);
    }
  }
  if (lo.x() > hi.x()) {
    lo = Point2::Zero();
    hi = Point2::Ones();
  }
  const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12});
  const double margin = 0.05 * span;
  const double scale = scene.width / (span + 2 * margin);
  const int height = static_cast<int>(std::ceil((hi.y() - lo.y() + 2 * margin) * scale));
  auto X = [&](const Point2& p) { return num((p.x() - lo.x() + margin) * scale); };
  auto Y = [&](const Point2& p) { return num((hi.y() - p.y() + margin) * scale); };
  auto XY = [&](const Point2& p) { return X(p) + "," + Y(p); };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(scene.width) +
                    "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(scene.width) +
                    " " + std::to_string(height) + "\">\n";
  if (!scene.title.empty()) out += "<title>" + escape(scene.title) + "</title>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& m : scene.meshes) {
    out += "<g class=\"mesh\" fill=\"" + m.fill + "\" fill-opacity=\"0.55\" stroke=\"#7a5200\" stroke-width=\"0.4\">\n";
    for (const auto& t : m.triangles) {
      out += "<polygon points=\"" + XY(m.vertices[t[0]]) + " " + XY(m.vertices[t[1]]) + " " + XY(m.vertices[t[2]]) +
             "\"/>\n";
    }
    out += "</g>\n";
  }
  const double flat_tol = span * 1e-4;
  for (const auto& c : scene.cages) {
    out += "<g class=\"cage\" fill=\"none\" stroke=\"" + c.stroke + "\" stroke-width=\"" + (c.ghost ? "1" : "2") +
           "\"" + (c.ghost ? " stroke-dasharray=\"4 3\" stroke-opacity=\"0.5\"" : "") + ">\n";
    for (const auto& curve : c.cage.curves()) {
      const auto& p = curve.control_points();
      std::string d = "M " + XY(p.front());
      if (curve.order() == 1) {
        d += " L " + XY(p[1]);
      } else if (curve.order() == 2) {
        d += " Q " + XY(p[1]) + " " + XY(p[2]);
      } else if (curve.order() == 3) {
        d += " C " + XY(p[1]) + " " + XY(p[2]) + " " + XY(p[3]);
      } else {
        const auto poly = flatten_curve(curve, flat_tol);
        for (std::size_t i = 1; i < poly.size(); ++i) d += " L " + XY(poly[i]);
      }
      out += "<path d=\"" + d + "\"/>\n";
    }
    out += "</g>\n";
    if (c.control_points && !c.ghost) {
      out += "<g class=\"handles\" fill=\"" + c.stroke + "\">\n";
      for (const auto& curve : c.cage.curves()) {
        const auto& p = curve.control_points();
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
          out += "<circle cx=\"" + X(p[i]) + "\" cy=\"" + Y(p[i]) + "\" r=\"" + (i == 0 ? "4" : "3") + "\"/>\n";
        }
      }
      out += "</g>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace bihc

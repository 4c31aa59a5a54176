#pragma once

#include <string>
#include <vector>

#include "bihc/cage.hpp"
#include "bihc/io.hpp"

namespace bihc {

struct SvgCage {
  Cage cage;
  std::string stroke = "#1f4e9c";
  bool control_points = true;
  bool ghost = false;
};

struct SvgMesh {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::string fill = "#f2b134";
};

struct SvgScene {
  std::vector<SvgMesh> meshes;
  std::vector<SvgCage> cages;
  std::string title;
  int width = 800;
};

/// One <path> per cage curve, one <g class="mesh"> of polygons per mesh.
std::string render_svg(const SvgScene& scene);

}  // namespace bihc

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bihc/cage.hpp"
#include "bihc/coordinates.hpp"

namespace bihc {

// Text cage: "CVCAGE 1", order, shared vertex list, then per curve the start and
// end vertex indices followed by its interior control points.
Cage parse_cage(const std::string& text);
std::string format_cage(const Cage& cage);
Cage read_cage_file(const std::string& path);
void write_cage_file(const std::string& path, const Cage& cage);

struct GridDescriptor {
  Point2 origin = Point2::Zero();
  Point2 spacing = Point2::Ones();
  int nx = 0;
  int ny = 0;
};

/// Triangle mesh; grids are expanded to their node mesh (two CCW triangles per cell).
struct Shape {
  enum class Kind { Mesh, Grid } kind = Kind::Mesh;
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
  GridDescriptor grid;
};

Shape parse_shape(const std::string& text);
std::string format_shape(const Shape& shape);
Shape read_shape_file(const std::string& path);
void write_shape_file(const std::string& path, const Shape& shape);
Shape grid_shape(const GridDescriptor& grid);
/// Mesh with the same triangles and new vertex positions.
Shape with_vertices(const Shape& shape, std::vector<Point2> vertices);

constexpr std::uint32_t kCacheVersion = 1;

std::string serialize_cache(const CoordinateTable& table);
/// Throws IoError on bad magic, version, truncation, or (when expected_hash
/// is non-zero) a cage-hash mismatch.
CoordinateTable deserialize_cache(const std::string& bytes, std::uint64_t expected_hash = 0);
void write_cache_file(const std::string& path, const CoordinateTable& table);
CoordinateTable read_cache_file(const std::string& path, std::uint64_t expected_hash = 0);

/// Exterior/failed point listing written next to a cache.
std::string format_point_errors(const std::vector<PointError>& errors);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Little-endian f64 pairs.
std::string encode_points(const std::vector<Point2>& points);
std::vector<Point2> decode_points(const std::string& bytes);

}  // namespace bihc

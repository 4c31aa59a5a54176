#include "bihc/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bihc/errors.hpp"

namespace bihc {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Whitespace tokenizer that skips '#' comments and tracks line numbers.
class Tokens {
 public:
  explicit Tokens(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) toks_.push_back({tok, lineno});
    }
  }
  bool done() const { return pos_ >= toks_.size(); }
  std::string word() {
    if (done()) throw ValidationError("unexpected end of input");
    return toks_[pos_++].text;
  }
  void expect(const std::string& w) {
    const int line = current_line();
    const std::string got = word();
    if (got != w) throw ValidationError("line " + std::to_string(line) + ": expected '" + w + "', got '" + got + "'");
  }
  long integer() {
    const int line = current_line();
    const std::string s = word();
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') throw ValidationError("line " + std::to_string(line) + ": bad integer '" + s + "'");
    return v;
  }
  double real() {
    const int line = current_line();
    const std::string s = word();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) {
      throw ValidationError("line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
  }
  Point2 point() {
    const double x = real();
    return {x, real()};
  }

 private:
  int current_line() const { return done() ? (toks_.empty() ? 0 : toks_.back().line) : toks_[pos_].line; }
  struct Tok {
    std::string text;
    int line;
  };
  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
};

void check_count(long v, long max, const char* what) {
  if (v < 0 || v > max) throw ValidationError(std::string("implausible ") + what + " count " + std::to_string(v));
}

bool same(const Point2& a, const Point2& b) { return a.x() == b.x() && a.y() == b.y(); }

}  // namespace

Cage parse_cage(const std::string& text) {
  Tokens t(text);
  t.expect("CVCAGE");
  if (t.integer() != 1) throw ValidationError("unsupported cage format version");
  t.expect("order");
  const long m = t.integer();
  if (m < 1 || m > 20) throw ValidationError("cage order must lie in [1, 20]");
  t.expect("vertices");
  const long nv = t.integer();
  check_count(nv, 1000000, "vertex");
  std::vector<Point2> verts(nv);
  for (auto& v : verts) v = t.point();
  t.expect("curves");
  const long nc = t.integer();
  check_count(nc, 1000000, "curve");
  std::vector<BezierCurve> curves;
  for (long i = 0; i < nc; ++i) {
    const long a = t.integer();
    const long b = t.integer();
    if (a < 0 || a >= nv || b < 0 || b >= nv) {
      throw ValidationError("curve " + std::to_string(i) + ": vertex index out of range");
    }
    std::vector<Point2> pts{verts[a]};
    for (long j = 1; j < m; ++j) pts.push_back(t.point());
    pts.push_back(verts[b]);
    curves.emplace_back(std::move(pts));
  }
  if (!t.done()) throw ValidationError("trailing content after the last curve");
  return Cage(std::move(curves));
}

std::string format_cage(const Cage& input) {
  const int m = input.order();
  const Cage cage = elevate_cage(input, m);
  std::vector<Point2> verts;
  auto index_of = [&](const Point2& p) {
    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (same(verts[i], p)) return static_cast<int>(i);
    }
    verts.push_back(p);
    return static_cast<int>(verts.size()) - 1;
  };
  std::vector<std::pair<int, int>> ends;
  for (const auto& c : cage.curves()) {
    const int a = index_of(c.front());
    ends.emplace_back(a, index_of(c.back()));
  }
  std::string out = "CVCAGE 1\norder " + std::to_string(m) + "\nvertices " + std::to_string(verts.size()) + "\n";
  for (const auto& v : verts) out += fmt(v.x()) + " " + fmt(v.y()) + "\n";
  out += "curves " + std::to_string(cage.size()) + "\n";
  for (std::size_t i = 0; i < cage.size(); ++i) {
    out += std::to_string(ends[i].first) + " " + std::to_string(ends[i].second);
    const auto& pts = cage.curve(i).control_points();
    for (int j = 1; j < m; ++j) out += " " + fmt(pts[j].x()) + " " + fmt(pts[j].y());
    out += "\n";
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read error on '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write error on '" + path + "'");
}

Cage read_cage_file(const std::string& path) { return parse_cage(read_text_file(path)); }
void write_cage_file(const std::string& path, const Cage& cage) { write_text_file(path, format_cage(cage)); }

Shape grid_shape(const GridDescriptor& g) {
  if (g.nx < 2 || g.ny < 2) throw ValidationError("grid needs at least 2x2 nodes");
  if (!(g.spacing.x() > 0.0) || !(g.spacing.y() > 0.0)) throw ValidationError("grid spacing must be positive");
  Shape s;
  s.kind = Shape::Kind::Grid;
  s.grid = g;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      s.vertices.emplace_back(g.origin.x() + i * g.spacing.x(), g.origin.y() + j * g.spacing.y());
    }
  }
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const int a = j * g.nx + i;
      const int b = a + 1;
      const int c = a + g.nx + 1;
      const int d = a + g.nx;
      s.triangles.push_back({a, b, c});
      s.triangles.push_back({a, c, d});
    }
  }
  return s;
}

Shape parse_shape(const std::string& text) {
  Tokens t(text);
  const std::string tag = t.word();
  if (tag == "CVGRID") {
    if (t.integer() != 1) throw ValidationError("unsupported grid format version");
    GridDescriptor g;
    t.expect("origin");
    g.origin = t.point();
    t.expect("spacing");
    g.spacing = t.point();
    t.expect("dims");
    const long nx = t.integer();
    const long ny = t.integer();
    check_count(nx, 100000, "grid column");
    check_count(ny, 100000, "grid row");
    if (nx * ny > 10000000) throw ValidationError("grid too large");
    g.nx = static_cast<int>(nx);
    g.ny = static_cast<int>(ny);
    if (!t.done()) throw ValidationError("trailing content after grid descriptor");
    return grid_shape(g);
  }
  if (tag != "CVMESH") throw ValidationError("unknown shape format '" + tag + "'");
  if (t.integer() != 1) throw ValidationError("unsupported mesh format version");
  Shape s;
  t.expect("vertices");
  const long nv = t.integer();
  check_count(nv, 10000000, "vertex");
  s.vertices.resize(nv);
  for (auto& v : s.vertices) v = t.point();
  t.expect("triangles");
  const long nt = t.integer();
  check_count(nt, 20000000, "triangle");
  for (long i = 0; i < nt; ++i) {
    std::array<int, 3> tri{};
    for (auto& v : tri) {
      const long idx = t.integer();
      if (idx < 0 || idx >= nv) throw ValidationError("triangle " + std::to_string(i) + ": index out of range");
      v = static_cast<int>(idx);
    }
    const Point2 e1 = s.vertices[tri[1]] - s.vertices[tri[0]];
    const Point2 e2 = s.vertices[tri[2]] - s.vertices[tri[0]];
    if (e1.x() * e2.y() - e1.y() * e2.x() <= 0.0) {
      throw ValidationError("triangle " + std::to_string(i) + " is not positively oriented");
    }
    s.triangles.push_back(tri);
  }
  if (!t.done()) throw ValidationError("trailing content after the last triangle");
  return s;
}

std::string format_shape(const Shape& s) {
  if (s.kind == Shape::Kind::Grid) {
    const auto& g = s.grid;
    return "CVGRID 1\norigin " + fmt(g.origin.x()) + " " + fmt(g.origin.y()) + "\nspacing " + fmt(g.spacing.x()) +
           " " + fmt(g.spacing.y()) + "\ndims " + std::to_string(g.nx) + " " + std::to_string(g.ny) + "\n";
  }
  std::string out = "CVMESH 1\nvertices " + std::to_string(s.vertices.size()) + "\n";
  for (const auto& v : s.vertices) out += fmt(v.x()) + " " + fmt(v.y()) + "\n";
  out += "triangles " + std::to_string(s.triangles.size()) + "\n";
  for (const auto& t : s.triangles) {
    out += std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  }
  return out;
}

Shape read_shape_file(const std::string& path) { return parse_shape(read_text_file(path)); }
void write_shape_file(const std::string& path, const Shape& shape) { write_text_file(path, format_shape(shape)); }

Shape with_vertices(const Shape& shape, std::vector<Point2> vertices) {
  if (vertices.size() != shape.vertices.size()) throw ContractError("with_vertices: vertex count mismatch");
  Shape s;
  s.kind = Shape::Kind::Mesh;
  s.vertices = std::move(vertices);
  s.triangles = shape.triangles;
  return s;
}

namespace {

constexpr char kMagic[4] = {'C', 'V', 'C', 'G'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& b) : b_(b) {}
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw IoError("cache truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_cache(const CoordinateTable& table) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kCacheVersion);
  const TableMeta& m = table.meta;
  w.u32(static_cast<std::uint32_t>(m.n));
  w.u32(static_cast<std::uint32_t>(m.k));
  w.u32(static_cast<std::uint32_t>(m.subdiv));
  w.u32(static_cast<std::uint32_t>(m.samples));
  w.u32(m.method == SolverMethod::BiHC1 ? 1u : 2u);
  w.u32(m.offset_correction ? 1u : 0u);
  w.f64(m.offset);
  w.f64(m.residual);
  w.u32(static_cast<std::uint32_t>(m.edge_count));
  w.u64(m.cage_hash);
  const std::uint64_t rows = table.size();
  const std::uint64_t dim = static_cast<std::uint64_t>(table.dimension());
  w.u64(rows);
  w.u64(dim);
  for (std::size_t i = 0; i < table.size(); ++i) {
    w.f64(table.points[i].x());
    w.f64(table.points[i].y());
    w.u64(table.source_index[i]);
  }
  for (const Eigen::MatrixXd* M : {&table.alpha_c, &table.beta_c, &table.alpha_i, &table.beta_i}) {
    for (Eigen::Index r = 0; r < M->rows(); ++r) {
      for (Eigen::Index c = 0; c < M->cols(); ++c) w.f64((*M)(r, c));
    }
  }
  return w.take();
}

CoordinateTable deserialize_cache(const std::string& bytes, std::uint64_t expected_hash) {
  Reader r(bytes);
  if (bytes.size() < 4 || r.raw(4) != std::string(kMagic, 4)) throw IoError("not a coordinate cache (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCacheVersion) throw IoError("unsupported cache version " + std::to_string(version));
  CoordinateTable t;
  TableMeta& m = t.meta;
  m.n = static_cast<int>(r.u32());
  m.k = static_cast<int>(r.u32());
  m.subdiv = static_cast<int>(r.u32());
  m.samples = static_cast<int>(r.u32());
  const std::uint32_t method = r.u32();
  if (method != 1u && method != 2u) throw IoError("cache: unknown solver method");
  m.method = method == 1u ? SolverMethod::BiHC1 : SolverMethod::BiHC12;
  m.offset_correction = r.u32() != 0u;
  m.offset = r.f64();
  m.residual = r.f64();
  m.edge_count = static_cast<int>(r.u32());
  m.cage_hash = r.u64();
  if (expected_hash != 0 && m.cage_hash != expected_hash) {
    throw IoError("cache was computed for a different cage (hash mismatch)");
  }
  const std::uint64_t rows = r.u64();
  const std::uint64_t dim = r.u64();
  if (m.n < 1 || m.edge_count < 1 || dim != static_cast<std::uint64_t>(m.edge_count) * m.n) {
    throw IoError("cache: inconsistent dimensions");
  }
  const std::uint64_t need = rows * 24 + rows * dim * 32;
  if (rows > (1ull << 32) || need != r.remaining()) throw IoError("cache: payload size mismatch");
  for (std::uint64_t i = 0; i < rows; ++i) {
    const double x = r.f64();
    const double y = r.f64();
    t.points.emplace_back(x, y);
    t.source_index.push_back(r.u64());
  }
  for (Eigen::MatrixXd* M : {&t.alpha_c, &t.beta_c, &t.alpha_i, &t.beta_i}) {
    M->resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    for (Eigen::Index a = 0; a < M->rows(); ++a) {
      for (Eigen::Index c = 0; c < M->cols(); ++c) (*M)(a, c) = r.f64();
    }
  }
  return t;
}

void write_cache_file(const std::string& path, const CoordinateTable& table) {
  write_text_file(path, serialize_cache(table));
}

CoordinateTable read_cache_file(const std::string& path, std::uint64_t expected_hash) {
  return deserialize_cache(read_text_file(path), expected_hash);
}

std::string format_point_errors(const std::vector<PointError>& errors) {
  std::string out = "# index x y reason\n";
  for (const auto& e : errors) {
    out += std::to_string(e.index) + " " + fmt(e.point.x()) + " " + fmt(e.point.y()) + " " + e.reason + "\n";
  }
  return out;
}

std::string encode_points(const std::vector<Point2>& points) {
  Writer w;
  for (const auto& p : points) {
    w.f64(p.x());
    w.f64(p.y());
  }
  return w.take();
}

std::vector<Point2> decode_points(const std::string& bytes) {
  if (bytes.size() % 16 != 0) throw IoError("point buffer length is not a multiple of 16");
  Reader r(bytes);
  std::vector<Point2> out;
  while (!r.done()) {
    const double x = r.f64();
    out.emplace_back(x, r.f64());
  }
  return out;
}

}  // namespace bihc

#include "bihc/coordinates.hpp"

#include <cmath>
#include <mutex>

#include "bihc/errors.hpp"

namespace bihc {

CoordinateSystem build_system(const Cage& cage, const DeformationConfig& config) {
  const ValidationReport report = validate_cage(cage);
  if (!report.valid()) throw ValidationError("invalid cage: " + report.to_string());
  if (!report.counter_clockwise) {
    throw ValidationError("cage must be counter-clockwise (normalize its orientation first)");
  }
  CoordinateSystem sys;
  sys.config = config;
  sys.cage = cage;
  sys.disc = discretize(cage, config);
  sys.mats = assemble(sys.disc, config.kernel, config.execution, config.offset_correction);
  sys.solve = solve_regularization(sys.mats, config.method);
  sys.W_alpha = sys.mats.W_g1() * sys.disc.S;
  sys.W_beta = sys.mats.W_g2() * sys.disc.T;
  const Eigen::MatrixXd C = sys.solve.C();
  sys.CW_alpha = C * sys.W_alpha;
  sys.CW_beta = C * sys.W_beta;
  sys.residual = combined_residual(sys.mats, sys.solve);
  return sys;
}

namespace {

Eigen::RowVectorXd stack(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  Eigen::RowVectorXd v(a.size() + b.size());
  v << a, b;
  return v;
}

// Edge-level Bernstein row of boundary parameter t on edge e.
Eigen::RowVectorXd boundary_row(const CoordinateSystem& sys, std::size_t e, double t) {
  const int n = sys.config.n;
  const int nc = sys.edge_count();
  Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(sys.dimension());
  const auto b = bernstein_row(n, std::clamp(t, 0.0, 1.0));
  for (int j = 0; j <= n; ++j) r[shared_index(static_cast<int>(e), j, n, nc)] += b[j];
  return r;
}

}  // namespace

CoordinateRow coordinate_row(const CoordinateSystem& sys, const Point2& p) {
  CoordinateRow out;
  const ClosestPoint cp = closest_point(sys.cage, p);
  const BasisRow r = basis_row(sys.disc, p, sys.config.kernel);
  out.fallbacks = r.fallbacks;
  out.alpha_c = r.phi * sys.disc.S;
  out.beta_c = r.psi * sys.disc.T;
  if (cp.distance < sys.disc.delta) {
    out.near_boundary = true;
    out.alpha_i = boundary_row(sys, cp.curve, cp.t) - out.alpha_c;
    out.beta_i = -out.beta_c;
    return out;
  }
  const Eigen::RowVectorXd v = stack(r.phit, r.psit);
  out.alpha_i = v * sys.CW_alpha;
  out.beta_i = v * sys.CW_beta;
  return out;
}

CoordinateGradient coordinate_gradient(const CoordinateSystem& sys, const Point2& p) {
  const BasisRowGradient g = basis_row_gradient(sys.disc, p, sys.config.kernel);
  CoordinateGradient out;
  out.alpha_c_x = g.dx.phi * sys.disc.S;
  out.alpha_c_y = g.dy.phi * sys.disc.S;
  out.beta_c_x = g.dx.psi * sys.disc.T;
  out.beta_c_y = g.dy.psi * sys.disc.T;
  const Eigen::RowVectorXd vx = stack(g.dx.phit, g.dx.psit);
  const Eigen::RowVectorXd vy = stack(g.dy.phit, g.dy.psit);
  out.alpha_x = out.alpha_c_x + vx * sys.CW_alpha;
  out.alpha_y = out.alpha_c_y + vy * sys.CW_alpha;
  out.beta_x = out.beta_c_x + vx * sys.CW_beta;
  out.beta_y = out.beta_c_y + vy * sys.CW_beta;
  return out;
}

CoordinateTable precompute_table(const CoordinateSystem& sys, const std::vector<Point2>& points,
                                 Execution execution, const ProgressFn& progress,
                                 const std::atomic<bool>* cancel) {
  CoordinateTable table;
  table.meta.cage_hash = content_hash(sys.cage);
  table.meta.edge_count = sys.edge_count();
  table.meta.n = sys.config.n;
  table.meta.k = sys.config.order_k();
  table.meta.subdiv = sys.config.subdiv;
  table.meta.samples = sys.config.samples_per_element();
  table.meta.offset = sys.config.offset_fraction;
  table.meta.method = sys.config.method;
  table.meta.offset_correction = sys.config.offset_correction;
  table.meta.residual = sys.residual;

  const ContainmentTester inside(sys.cage);
  std::vector<std::size_t> accepted;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) {
      table.errors.push_back({i, points[i], "non-finite coordinates"});
    } else if (!inside.inside(points[i])) {
      table.errors.push_back({i, points[i], "outside the cage or on its boundary"});
    } else {
      accepted.push_back(i);
    }
  }

  const int rows = static_cast<int>(accepted.size());
  const int dim = sys.dimension();
  table.alpha_c.resize(rows, dim);
  table.beta_c.resize(rows, dim);
  table.alpha_i.resize(rows, dim);
  table.beta_i.resize(rows, dim);
  std::vector<CoordinateRow> computed(rows);
  std::vector<std::string> failures(rows);
  std::size_t done = 0;
  std::mutex progress_mutex;

  auto work = [&](int r) {
    if (cancel && cancel->load(std::memory_order_relaxed)) return;
    try {
      computed[r] = coordinate_row(sys, points[accepted[r]]);
    } catch (const std::exception& e) {
      failures[r] = e.what();
    }
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      progress(++done, static_cast<std::size_t>(rows));
    }
  };
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int r = 0; r < rows; ++r) work(r);
  } else {
    for (int r = 0; r < rows; ++r) work(r);
  }

  if (cancel && cancel->load()) throw CancelledError("precompute cancelled");

  int out = 0;
  for (int r = 0; r < rows; ++r) {
    const std::size_t src = accepted[r];
    if (!failures[r].empty()) {
      table.errors.push_back({src, points[src], failures[r]});
      continue;
    }
    const CoordinateRow& c = computed[r];
    table.points.push_back(points[src]);
    table.source_index.push_back(src);
    table.alpha_c.row(out) = c.alpha_c;
    table.beta_c.row(out) = c.beta_c;
    table.alpha_i.row(out) = c.alpha_i;
    table.beta_i.row(out) = c.beta_i;
    table.fallbacks += c.fallbacks;
    table.near_boundary += c.near_boundary ? 1 : 0;
    ++out;
  }
  table.alpha_c.conservativeResize(out, dim);
  table.beta_c.conservativeResize(out, dim);
  table.alpha_i.conservativeResize(out, dim);
  table.beta_i.conservativeResize(out, dim);
  std::sort(table.errors.begin(), table.errors.end(),
            [](const PointError& a, const PointError& b) { return a.index < b.index; });
  return table;
}

CoordinateTable precompute_table(const Cage& cage, const std::vector<Point2>& points,
                                 const DeformationConfig& config, const ProgressFn& progress) {
  const CoordinateSystem sys = build_system(cage, config);
  return precompute_table(sys, points, config.execution, progress);
}

BoundaryData BoundaryData::from_cage(const Cage& target, int n) {
  if (target.order() > n) {
    throw ContractError("target cage order " + std::to_string(target.order()) + " exceeds n = " +
                        std::to_string(n));
  }
  BoundaryData bd;
  for (const auto& c : target.curves()) {
    bd.g1.push_back(degree_elevate(c, n).control_points());
    bd.scales.push_back(1.0);
  }
  return bd;
}

Eigen::MatrixXd g1_matrix(const BoundaryData& bd) {
  const int nc = bd.edge_count();
  const int n = bd.order();
  if (nc == 0 || n < 1) throw ContractError("boundary data is empty");
  Eigen::MatrixXd G(nc * n, 2);
  for (int e = 0; e < nc; ++e) {
    if (static_cast<int>(bd.g1[e].size()) != n + 1) throw ContractError("boundary data: mixed orders");
    if (bd.g1[e].back() != bd.g1[(e + 1) % nc].front()) {
      throw ContractError("boundary data: edge " + std::to_string(e) + " does not end where the next starts");
    }
    for (int j = 0; j < n; ++j) G.row(e * n + j) = bd.g1[e][j].transpose();
  }
  return G;
}

Eigen::MatrixXd neumann_vector_edge(const BoundaryData& bd, int e) {
  const int nc = bd.edge_count();
  const int n = bd.order();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nc * n, 2);
  for (int j = 0; j < n; ++j) {
    const Point2 d = static_cast<double>(n) * (bd.g1[e][j + 1] - bd.g1[e][j]);
    G.row(e * n + j) = perp(d).transpose();
  }
  return G;
}

Eigen::MatrixXd neumann_vector(const BoundaryData& bd) {
  const int nc = bd.edge_count();
  const int n = bd.order();
  if (static_cast<int>(bd.scales.size()) != nc) throw ContractError("boundary data: scale count mismatch");
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nc * n, 2);
  for (int e = 0; e < nc; ++e) {
    for (int j = 0; j < n; ++j) {
      const Point2 d = static_cast<double>(n) * (bd.g1[e][j + 1] - bd.g1[e][j]);
      G.row(e * n + j) = bd.scales[e] * perp(d).transpose();
    }
  }
  return G;
}

namespace {

void check_dims(const CoordinateTable& table, const BoundaryData& bd) {
  if (bd.edge_count() != table.meta.edge_count || bd.order() != table.meta.n) {
    throw ContractError("boundary data (" + std::to_string(bd.edge_count()) + " edges, order " +
                        std::to_string(bd.order()) + ") does not match the table (" +
                        std::to_string(table.meta.edge_count) + " edges, order " +
                        std::to_string(table.meta.n) + ")");
  }
}

}  // namespace

std::vector<Point2> deform_points(const CoordinateTable& table, const BoundaryData& bd, double w) {
  check_dims(table, bd);
  const Eigen::MatrixXd G1 = g1_matrix(bd);
  const Eigen::MatrixXd G2 = neumann_vector(bd);
  const int dim = table.dimension();
  std::vector<Point2> out(table.size());
  for (std::size_t p = 0; p < table.size(); ++p) {
    const Eigen::Index r = static_cast<Eigen::Index>(p);
    double x = 0.0, y = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double a = table.alpha_c(r, j) + w * table.alpha_i(r, j);
      x += a * G1(j, 0);
      y += a * G1(j, 1);
    }
    for (int j = 0; j < dim; ++j) {
      const double b = table.beta_c(r, j) + w * table.beta_i(r, j);
      x += b * G2(j, 0);
      y += b * G2(j, 1);
    }
    out[p] = Point2(x, y);
  }
  return out;
}

std::vector<Point2> deform_points_green(const CoordinateTable& table, const BoundaryData& bd) {
  check_dims(table, bd);
  const Eigen::MatrixXd G1 = g1_matrix(bd);
  const Eigen::MatrixXd G2 = neumann_vector(bd);
  const int dim = table.dimension();
  std::vector<Point2> out(table.size());
  for (std::size_t p = 0; p < table.size(); ++p) {
    const Eigen::Index r = static_cast<Eigen::Index>(p);
    double x = 0.0, y = 0.0;
    for (int j = 0; j < dim; ++j) {
      x += table.alpha_c(r, j) * G1(j, 0);
      y += table.alpha_c(r, j) * G1(j, 1);
    }
    for (int j = 0; j < dim; ++j) {
      x += table.beta_c(r, j) * G2(j, 0);
      y += table.beta_c(r, j) * G2(j, 1);
    }
    out[p] = Point2(x, y);
  }
  return out;
}

Eigen::Matrix2d jacobian_at(const CoordinateSystem& sys, const Point2& p, const BoundaryData& bd, double w) {
  if (bd.edge_count() != sys.edge_count() || bd.order() != sys.config.n) {
    throw ContractError("jacobian_at: boundary data does not match the system");
  }
  const CoordinateGradient g = coordinate_gradient(sys, p);
  const Eigen::MatrixXd G1 = g1_matrix(bd);
  const Eigen::MatrixXd G2 = neumann_vector(bd);
  const Eigen::RowVectorXd ax = g.alpha_c_x + w * (g.alpha_x - g.alpha_c_x);
  const Eigen::RowVectorXd ay = g.alpha_c_y + w * (g.alpha_y - g.alpha_c_y);
  const Eigen::RowVectorXd bx = g.beta_c_x + w * (g.beta_x - g.beta_c_x);
  const Eigen::RowVectorXd by = g.beta_c_y + w * (g.beta_y - g.beta_c_y);
  Eigen::Matrix2d J;
  J.col(0) = (ax * G1 + bx * G2).transpose();
  J.col(1) = (ay * G1 + by * G2).transpose();
  return J;
}

}  // namespace bihc

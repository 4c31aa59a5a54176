#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bihc/bem.hpp"
#include "bihc/cage.hpp"

namespace bihc {

/// Everything derived from the rest cage: discretization, matrices, solver
/// operators, and their compositions with the edge-level data layouts.
struct CoordinateSystem {
  DeformationConfig config;
  Cage cage;  ///< rest cage, CCW
  Discretization disc;
  BemMatrices mats;
  RegularizedSolve solve;
  Eigen::MatrixXd W_alpha;  ///< (M_n − Φ_n)·S over edge-level G1
  Eigen::MatrixXd W_beta;   ///< −(Ψ_n + N_n)·T over edge-level G2
  Eigen::MatrixXd CW_alpha, CW_beta;
  double residual = 0.0;

  int edge_count() const { return static_cast<int>(cage.size()); }
  int dimension() const { return edge_count() * config.n; }
};

/// Validates and orients the cage, then discretizes, assembles and solves.
CoordinateSystem build_system(const Cage& cage, const DeformationConfig& config);

struct CoordinateRow {
  Eigen::RowVectorXd alpha_c, beta_c, alpha_i, beta_i;
  bool near_boundary = false;
  int fallbacks = 0;
};

/// Interior point farther than δ from the boundary: full evaluation.
/// Closer points are bound to their nearest boundary parameter.
CoordinateRow coordinate_row(const CoordinateSystem& sys, const Point2& p);

struct CoordinateGradient {
  Eigen::RowVectorXd alpha_x, alpha_y, beta_x, beta_y;  ///< at w = 1
  Eigen::RowVectorXd alpha_c_x, alpha_c_y, beta_c_x, beta_c_y;
};
CoordinateGradient coordinate_gradient(const CoordinateSystem& sys, const Point2& p);

struct TableMeta {
  std::uint64_t cage_hash = 0;
  int edge_count = 0;
  int n = 0;
  int k = 0;
  int subdiv = 0;
  int samples = 0;
  double offset = 0.0;
  SolverMethod method = SolverMethod::BiHC12;
  bool offset_correction = true;
  double residual = 0.0;
};

struct PointError {
  std::size_t index = 0;
  Point2 point = Point2::Zero();
  std::string reason;
};

struct CoordinateTable {
  TableMeta meta;
  std::vector<Point2> points;
  std::vector<std::uint64_t> source_index;  ///< position in the input point list
  Eigen::MatrixXd alpha_c, beta_c, alpha_i, beta_i;
  std::vector<PointError> errors;
  int fallbacks = 0;
  int near_boundary = 0;

  std::size_t size() const { return points.size(); }
  int dimension() const { return static_cast<int>(alpha_c.cols()); }
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Setting `*cancel` makes the remaining rows skip and the call throw CancelledError.
CoordinateTable precompute_table(const CoordinateSystem& sys, const std::vector<Point2>& points,
                                 Execution execution = Execution::Parallel,
                                 const ProgressFn& progress = {}, const std::atomic<bool>* cancel = nullptr);
CoordinateTable precompute_table(const Cage& cage, const std::vector<Point2>& points,
                                 const DeformationConfig& config, const ProgressFn& progress = {});

/// Per-edge order-n Dirichlet control points and Neumann scales.
struct BoundaryData {
  std::vector<std::vector<Point2>> g1;
  std::vector<double> scales;

  /// Target cage elevated to order n; s ≡ 1.
  static BoundaryData from_cage(const Cage& target, int n);
  int edge_count() const { return static_cast<int>(g1.size()); }
  int order() const { return g1.empty() ? 0 : static_cast<int>(g1.front().size()) - 1; }
};

constexpr double kMinScale = 1e-3;

/// Edge-level G1 as an (N_c·n) × 2 matrix; throws ContractError on broken sharing.
Eigen::MatrixXd g1_matrix(const BoundaryData& bd);
/// Entries s_i·(n(g_{j+1} − g_j))^⊥ as an (N_c·n) × 2 matrix.
Eigen::MatrixXd neumann_vector(const BoundaryData& bd);
/// Unit-scale Neumann vector of edge e alone.
Eigen::MatrixXd neumann_vector_edge(const BoundaryData& bd, int e);

std::vector<Point2> deform_points(const CoordinateTable& table, const BoundaryData& bd, double w);
/// Green part only: α_c·G1 + β_c·G2.
std::vector<Point2> deform_points_green(const CoordinateTable& table, const BoundaryData& bd);

/// 2×2 Jacobian ∂f/∂η of the deformation at an interior point.
Eigen::Matrix2d jacobian_at(const CoordinateSystem& sys, const Point2& p, const BoundaryData& bd, double w);

}  // namespace bihc

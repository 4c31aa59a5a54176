#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bihc/coordinates.hpp"
#include "bihc/io.hpp"
#include "bihc/neumann.hpp"

namespace bihc {

/// Rest cage after validation and orientation normalization.
struct PreparedCage {
  Cage cage;
  bool reversed = false;
  ValidationReport report;
};

/// Throws ValidationError (carrying the report text) if the cage is unusable.
PreparedCage prepare_rest_cage(const Cage& raw);

/// Applies the rest cage's reversal, checks the edge count, and elevates to order n.
Cage prepare_target_cage(const Cage& raw, bool reverse, int n, int edge_count);

/// Defaults: n = max(m, 3), k = n, subdiv 4, 2n samples, offset 1e-4, BiHC12.
DeformationConfig default_config(int cage_order);
DeformationConfig config_from_meta(const TableMeta& meta);

/// Unset fields fall back to default_config(m).
struct ConfigOverrides {
  std::optional<int> n, k, subdiv, samples;
  std::optional<double> offset;
  std::optional<std::string> method;
};

/// Throws ValidationError for n < m, k < n, or out-of-range values.
DeformationConfig resolve_config(int cage_order, const ConfigOverrides& o);

/// Classifies the shape vertices and precomputes their coordinate rows.
CoordinateTable precompute_scene(const Cage& rest_ccw, const Shape& shape, const DeformationConfig& config,
                                 const ProgressFn& progress = {});

struct DeformOutcome {
  std::vector<Point2> points;  ///< one per table row
  Eigen::VectorXd scales;
  double energy = 0.0;
  double unit_energy = 0.0;
  double kkt_residual = 0.0;
};

/// w ∈ [0,1]; optimized modes need the coordinate system of the rest cage.
DeformOutcome deform_scene(const CoordinateTable& table, const Cage& target_prepared, ScaleMode mode, double w,
                           const CoordinateSystem* sys = nullptr);

/// Shape vertices with the deformed table rows substituted; the rest stay put.
std::vector<Point2> scatter_deformed(const Shape& shape, const CoordinateTable& table,
                                     const std::vector<Point2>& deformed);

}  // namespace bihc

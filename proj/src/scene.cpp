#include "bihc/scene.hpp"

#include <algorithm>
#include <cmath>

#include "bihc/errors.hpp"

namespace bihc {

PreparedCage prepare_rest_cage(const Cage& raw) {
  PreparedCage out;
  const ValidationReport first = validate_cage(raw);
  if (!first.valid()) throw ValidationError("invalid cage:\n" + first.to_string());
  out.cage = normalize_orientation(raw, &out.report);
  out.reversed = out.report.reversal_applied;
  return out;
}

Cage prepare_target_cage(const Cage& raw, bool reverse, int n, int edge_count) {
  if (static_cast<int>(raw.size()) != edge_count) {
    throw ContractError("target cage has " + std::to_string(raw.size()) + " curves, rest cage has " +
                        std::to_string(edge_count));
  }
  if (raw.order() > n) {
    throw ContractError("target cage order " + std::to_string(raw.order()) + " exceeds n = " + std::to_string(n));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& next = raw.curve((i + 1) % raw.size());
    if (raw.curve(i).back() != next.front()) {
      throw ContractError("target cage is not closed at curve " + std::to_string(i));
    }
  }
  const Cage oriented = reverse ? reversed(raw) : raw;
  return elevate_cage(oriented, n);
}

DeformationConfig default_config(int cage_order) {
  DeformationConfig c;
  c.n = std::max(cage_order, 3);
  return c;
}

DeformationConfig resolve_config(int cage_order, const ConfigOverrides& o) {
  DeformationConfig c = default_config(cage_order);
  if (o.n) c.n = *o.n;
  if (o.k) c.k = *o.k;
  if (o.subdiv) c.subdiv = *o.subdiv;
  if (o.samples) c.samples = *o.samples;
  if (o.offset) c.offset_fraction = *o.offset;
  if (o.method) c.method = parse_solver_method(*o.method);
  check_config(c, cage_order);
  if (o.samples && *o.samples < 1) throw ValidationError("samples must be >= 1");
  if (c.order_k() > 12 || c.subdiv > 64 || c.samples_per_element() > 256) {
    throw ValidationError("n, k <= 12, subdiv <= 64 and samples <= 256 are supported");
  }
  return c;
}

DeformationConfig config_from_meta(const TableMeta& meta) {
  DeformationConfig c;
  c.n = meta.n;
  c.k = meta.k;
  c.subdiv = meta.subdiv;
  c.samples = meta.samples;
  c.offset_fraction = meta.offset;
  c.method = meta.method;
  c.offset_correction = meta.offset_correction;
  return c;
}

CoordinateTable precompute_scene(const Cage& rest_ccw, const Shape& shape, const DeformationConfig& config,
                                 const ProgressFn& progress) {
  const CoordinateSystem sys = build_system(rest_ccw, config);
  return precompute_table(sys, shape.vertices, config.execution, progress);
}

DeformOutcome deform_scene(const CoordinateTable& table, const Cage& target, ScaleMode mode, double w,
                           const CoordinateSystem* sys) {
  if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("w must lie in [0, 1]");
  BoundaryData bd = BoundaryData::from_cage(target, table.meta.n);
  DeformOutcome out;
  if (mode != ScaleMode::Unit) {
    if (sys == nullptr) throw ContractError("optimized Neumann scales need the rest cage");
    if (content_hash(sys->cage) != table.meta.cage_hash) {
      throw ContractError("rest cage does not match the coordinate table");
    }
    const ScaleProblem problem = build_scale_problem(*sys, bd, mode, w);
    const ScaleSolution sol = optimize_scales(problem);
    bd.scales.assign(sol.s.data(), sol.s.data() + sol.s.size());
    out.energy = sol.energy;
    out.unit_energy = sol.unit_energy;
    out.kkt_residual = sol.kkt_residual;
  }
  out.scales = Eigen::Map<const Eigen::VectorXd>(bd.scales.data(), static_cast<Eigen::Index>(bd.scales.size()));
  out.points = deform_points(table, bd, w);
  return out;
}

std::vector<Point2> scatter_deformed(const Shape& shape, const CoordinateTable& table,
                                     const std::vector<Point2>& deformed) {
  if (deformed.size() != table.size()) throw ContractError("deformed point count does not match the table");
  std::vector<Point2> out = shape.vertices;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::uint64_t src = table.source_index[i];
    if (src >= out.size()) throw ContractError("table refers to a vertex outside the shape");
    if (out[src] != table.points[i]) throw ContractError("table was computed for a different shape");
    out[src] = deformed[i];
  }
  return out;
}

}  // namespace bihc

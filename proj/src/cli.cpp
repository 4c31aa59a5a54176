#include "bihc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <optional>

#include <CLI11.hpp>

#include "bihc/errors.hpp"
#include "bihc/scene.hpp"
#include "bihc/service.hpp"
#include "bihc/suites.hpp"
#include "bihc/svg.hpp"

namespace bihc {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct PrecomputeArgs {
  std::string cage, shape, out;
  std::optional<int> n, k, subdiv, samples;
  std::optional<double> offset;
  std::optional<std::string> method;
};

struct DeformArgs {
  std::string cache, shape, target, cage, out, svg;
  double w = 1.0;
  std::string s_mode = "unit";
};

struct ValidateArgs {
  std::string cage, cache;
  std::optional<int> n;
  std::uint64_t seed = 1;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  int idle_timeout = 3600;
};

ConfigOverrides overrides(const PrecomputeArgs& a) {
  ConfigOverrides o;
  o.n = a.n;
  o.k = a.k;
  o.subdiv = a.subdiv;
  o.samples = a.samples;
  o.offset = a.offset;
  o.method = a.method;
  return o;
}

int precompute(const PrecomputeArgs& a, std::ostream& out) {
  const PreparedCage rest = prepare_rest_cage(read_cage_file(a.cage));
  const Shape shape = read_shape_file(a.shape);
  const DeformationConfig config = resolve_config(rest.cage.order(), overrides(a));
  if (rest.reversed) out << "note: rest cage was clockwise; stored reversed\n";
  const CoordinateTable table = precompute_scene(rest.cage, shape, config);
  write_cache_file(a.out, table);
  const std::string sidecar = a.out + ".exterior.txt";
  write_text_file(sidecar, format_point_errors(table.errors));
  out << "rows " << table.size() << " of " << shape.vertices.size() << " vertices; n " << config.n << " k "
      << config.order_k() << " subdiv " << config.subdiv << " samples " << config.samples_per_element() << " "
      << to_string(config.method) << "\n";
  out << "residual " << fmt("%.6e", table.meta.residual) << "; near-boundary " << table.near_boundary
      << "; quadrature fallbacks " << table.fallbacks << "\n";
  if (!table.errors.empty()) out << table.errors.size() << " vertices skipped, listed in " << sidecar << "\n";
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

int deform(const DeformArgs& a, std::ostream& out) {
  if (!(a.w >= 0.0 && a.w <= 1.0)) throw ValidationError("--w must lie in [0, 1]");
  const ScaleMode mode = parse_scale_mode(a.s_mode);
  std::optional<PreparedCage> rest;
  if (!a.cage.empty()) rest = prepare_rest_cage(read_cage_file(a.cage));
  const CoordinateTable table = read_cache_file(a.cache, rest ? content_hash(rest->cage) : 0);
  const Shape shape = read_shape_file(a.shape);
  const Cage raw = read_cage_file(a.target);
  // Without the rest cage, the target's own orientation decides.
  const bool reverse = rest ? rest->reversed : signed_area(raw) < 0.0;
  const Cage target = prepare_target_cage(raw, reverse, table.meta.n, table.meta.edge_count);

  std::optional<CoordinateSystem> sys;
  if (mode != ScaleMode::Unit) {
    if (!rest) throw ValidationError("--s-mode " + a.s_mode + " needs the rest cage (--cage)");
    sys = build_system(rest->cage, config_from_meta(table.meta));
  }
  const DeformOutcome res = deform_scene(table, target, mode, a.w, sys ? &*sys : nullptr);
  const std::vector<Point2> verts = scatter_deformed(shape, table, res.points);
  const Shape deformed = with_vertices(shape, verts);
  write_shape_file(a.out, deformed);
  out << "deformed " << table.size() << " of " << shape.vertices.size() << " vertices (w " << a.w << ", s-mode "
      << to_string(mode) << ")\n";
  if (mode != ScaleMode::Unit) {
    out << "energy " << fmt("%.6e", res.energy) << " (unit " << fmt("%.6e", res.unit_energy) << "), kkt "
        << fmt("%.2e", res.kkt_residual) << "\nscales";
    for (Eigen::Index i = 0; i < res.scales.size(); ++i) out << " " << fmt("%.6g", res.scales[i]);
    out << "\n";
  }
  out << "wrote " << a.out << "\n";
  if (!a.svg.empty()) {
    SvgScene scene;
    scene.title = "deformed (w " + fmt("%g", a.w) + ", " + to_string(mode) + ")";
    scene.meshes.push_back({deformed.vertices, deformed.triangles, "#f2b134"});
    if (rest) scene.cages.push_back({rest->cage, "#888888", false, true});
    scene.cages.push_back({target, "#1f4e9c", true, false});
    write_text_file(a.svg, render_svg(scene));
    out << "wrote " << a.svg << "\n";
  }
  return kExitOk;
}

int validate(const ValidateArgs& a, std::ostream& out) {
  if (a.cage.empty() == a.cache.empty()) throw ValidationError("give exactly one of --cage or --cache");
  if (!a.cache.empty()) {
    const CoordinateTable t = read_cache_file(a.cache);
    out << "cache ok: " << t.size() << " rows, dimension " << t.dimension() << ", n " << t.meta.n << " k "
        << t.meta.k << ", " << t.meta.edge_count << " edges, " << to_string(t.meta.method) << ", residual "
        << fmt("%.6e", t.meta.residual) << "\n";
    return kExitOk;
  }
  const Cage raw = read_cage_file(a.cage);
  const ValidationReport report = validate_cage(raw);
  out << report.to_string();
  if (!report.valid()) return kExitValidation;
  const PreparedCage rest = prepare_rest_cage(raw);
  ConfigOverrides o;
  o.n = a.n;
  const DeformationConfig config = resolve_config(rest.cage.order(), o);
  const SuiteReport suites = run_validation_suites(rest.cage, config, a.seed);
  out << suites.to_string();
  DeformationConfig c1 = config;
  c1.method = SolverMethod::BiHC1;
  const double rho12 = build_system(rest.cage, config).residual;
  const double rho1 = build_system(rest.cage, c1).residual;
  out << "solver residual: bihc12 " << fmt("%.6e", rho12) << ", bihc1 " << fmt("%.6e", rho1) << "\n";
  return suites.passed() ? kExitOk : kExitNumerical;
}

int serve(const ServeArgs& a, std::ostream& out) {
  ServiceOptions o;
  o.host = a.host;
  o.port = a.port;
  o.idle_timeout = std::chrono::seconds(a.idle_timeout);
  DeformService service(o);
  out << "listening on " << a.host << ":" << a.port << std::endl;
  service.run();
  return kExitOk;
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ContractError& e) {
    err << "contract error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Biharmonic coordinates for curved cages"};
  app.require_subcommand(1);

  PrecomputeArgs pa;
  auto* pc = app.add_subcommand("precompute", "Precompute coordinates of a shape inside a rest cage");
  pc->add_option("--cage", pa.cage, "Rest cage file")->required();
  pc->add_option("--shape", pa.shape, "Shape file (mesh or grid)")->required();
  pc->add_option("--out", pa.out, "Coordinate cache to write")->required();
  pc->add_option("--order-n", pa.n, "Boundary order n (default max(m, 3))");
  pc->add_option("--order-k", pa.k, "Laplacian order k (default n)");
  pc->add_option("--subdiv", pa.subdiv, "Boundary elements per curve (default 4)");
  pc->add_option("--samples", pa.samples, "Collocation samples per element (default 2n)");
  pc->add_option("--offset", pa.offset, "Inward sample offset as a fraction of the bbox diagonal (default 1e-4)");
  pc->add_option("--method", pa.method, "bihc1 or bihc12 (default bihc12)");

  DeformArgs da;
  auto* dc = app.add_subcommand("deform", "Deform a shape with a precomputed cache and a target cage");
  dc->add_option("--cache", da.cache, "Coordinate cache")->required();
  dc->add_option("--shape", da.shape, "Shape file used for the cache")->required();
  dc->add_option("--target", da.target, "Target cage file")->required();
  dc->add_option("--out", da.out, "Deformed mesh to write")->required();
  dc->add_option("--cage", da.cage, "Rest cage (hash check, orientation, optimized scales)");
  dc->add_option("--w", da.w, "Blend weight in [0, 1] (default 1)");
  dc->add_option("--s-mode", da.s_mode, "unit, ahap, aaap or aaap-centered (default unit)");
  dc->add_option("--svg", da.svg, "Optional SVG rendering");

  ValidateArgs va;
  auto* vc = app.add_subcommand("validate", "Run the oracle suites on a cage, or check a cache file");
  vc->add_option("--cage", va.cage, "Cage file");
  vc->add_option("--cache", va.cache, "Cache file");
  vc->add_option("--order-n", va.n, "Boundary order n (default max(m, 3))");
  vc->add_option("--seed", va.seed, "Seed for the random probe points");

  ServeArgs sa;
  auto* sc = app.add_subcommand("serve", "Run the deformation service");
  sc->add_option("--host", sa.host, "Bind address (default 127.0.0.1)");
  sc->add_option("--port", sa.port, "Port (default 8080)");
  sc->add_option("--idle-timeout", sa.idle_timeout, "Session idle timeout in seconds (default 3600)")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> reversed_args(args.rbegin(), args.rend());
  try {
    app.parse(reversed_args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (pc->parsed()) return precompute(pa, out);
    if (dc->parsed()) return deform(da, out);
    if (vc->parsed()) return validate(va, out);
    if (sc->parsed()) return serve(sa, out);
  } catch (...) {
    return exit_code_for_current_exception(err);
  }
  return kExitValidation;
}

}  // namespace bihc

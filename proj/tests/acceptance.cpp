// One PASS/FAIL line per acceptance criterion. Exit status is non-zero if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "bihc/cli.hpp"
#include "bihc/errors.hpp"
#include "bihc/io.hpp"
#include "bihc/neumann.hpp"
#include "bihc/quadrature.hpp"
#include "bihc/scene.hpp"
#include "bihc/service.hpp"
#include "bihc/suites.hpp"
#include "bihc/svg.hpp"

#include <httplib.h>
#include <json.hpp>

using namespace bihc;
namespace fs = std::filesystem;

namespace {

constexpr double kOracleValueTol = 1e-8;
constexpr double kOracleGradTol = 1e-5;
constexpr double kOracleSeconds = 60.0;
constexpr double kMonomialTol = 1e-6;
constexpr double kUnityTol = 1e-7;
constexpr double kReproductionTol = 1e-4;
constexpr double kAffineTraceTol = 1e-6;
constexpr double kSolverSlack = 1e-9;
constexpr double kBlendLinearTol = 1e-12;
constexpr double kEnergySlack = 1e-12;
constexpr double kKktTol = 1e-8;
constexpr double kServiceAgreementTol = 1e-10;

std::string data(const std::string& name) { return std::string(BIHC_DATA_DIR) + "/" + name; }
Cage load(const std::string& name) { return read_cage_file(data(name)); }

struct Line {
  bool pass;
  std::string name;
  std::string detail;
};

std::vector<Line> lines;

void report(bool pass, const std::string& name, const std::string& detail) {
  lines.push_back({pass, name, detail});
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string sci(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", v);
  return b;
}

// Runs a criterion; an exception counts as a failure with its message.
void criterion(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [pass, detail] = body();
    report(pass, name, detail);
  } catch (const std::exception& e) {
    report(false, name, std::string("exception: ") + e.what());
  }
}

double sup_rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(b.lpNorm<Eigen::Infinity>(), 1e-300);
}

double family_error(const BasisIntegrals& a, const BasisIntegrals& b) {
  return std::max({sup_rel(a.phi, b.phi), sup_rel(a.psi, b.psi), sup_rel(a.phit, b.phit), sup_rel(a.psit, b.psit),
                   sup_rel(a.phik, b.phik), sup_rel(a.psiw, b.psiw)});
}

Cage map_cage(const Cage& c, const std::function<Point2(const Point2&)>& f) {
  std::vector<BezierCurve> out;
  for (const auto& curve : c.curves()) {
    std::vector<Point2> p;
    for (const auto& q : curve.control_points()) p.push_back(f(q));
    out.emplace_back(p);
  }
  return Cage(out);
}

// Smooth bend used to build targets of any order from a rest cage.
Point2 bend(const Point2& p) { return {p.x() + 0.25 * std::sin(1.2 * p.y()), p.y() + 0.12 * p.x() * p.x()}; }

double max_dist(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, (a[i] - b[i]).norm());
  return w;
}

SvgScene scene(const std::string& title, const Shape& shape, const std::vector<Point2>& verts, const Cage& rest,
               const Cage& target) {
  SvgScene s;
  s.title = title;
  s.meshes.push_back({verts, shape.triangles});
  s.cages.push_back({rest, "#888888", false, true});
  s.cages.push_back({target});
  return s;
}

struct Random {
  std::mt19937_64 gen;
  explicit Random(std::uint64_t seed) : gen(seed) {}
  double u(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
};

// ---------------------------------------------------------------------------

std::pair<bool, std::string> oracle_equivalence() {
  Random rng(2024);
  const auto t0 = std::chrono::steady_clock::now();
  double worst_value = 0.0, worst_grad = 0.0, worst_grad_quad = 0.0;
  int pairs = 0;
  const int n = 3, k = 3;
  while (pairs < 1000) {
    std::vector<Point2> cp;
    for (int i = 0; i < 4; ++i) cp.emplace_back(rng.u(-1, 1), rng.u(-1, 1));
    const BezierCurve c(cp);
    const double diag = Cage({c}).bbox().diagonal();
    const Point2 eta(rng.u(-1.5, 1.5), rng.u(-1.5, 1.5));
    const double dist = closest_point_on_curve(c, eta).distance;
    if (dist < 0.02 * diag) continue;
    ++pairs;
    worst_value = std::max(worst_value, family_error(basis_integrals(c, eta, n, k), quadrature_basis_integrals(c, eta, n, k)));
    const BasisGradients g = basis_integral_gradients(c, eta, n, k);
    // Step scaled to the distance from the curve: the local length scale of the integrands.
    const double h = 1e-4 * dist;
    for (int d = 0; d < 2; ++d) {
      Point2 e = Point2::Zero();
      e[d] = h;
      const BasisIntegrals p = basis_integrals(c, eta + e, n, k), m = basis_integrals(c, eta - e, n, k);
      const BasisIntegrals& an = d == 0 ? g.dx : g.dy;
      BasisIntegrals fd;
      fd.phi = (p.phi - m.phi) / (2 * h);
      fd.psi = (p.psi - m.psi) / (2 * h);
      fd.phit = (p.phit - m.phit) / (2 * h);
      fd.psit = (p.psit - m.psit) / (2 * h);
      fd.phik = (p.phik - m.phik) / (2 * h);
      fd.psiw = (p.psiw - m.psiw) / (2 * h);
      worst_grad = std::max(worst_grad, family_error(an, fd));
    }
    if (pairs % 10 == 0) {
      const BasisGradients q = quadrature_basis_gradients(c, eta, n, k);
      worst_grad_quad = std::max({worst_grad_quad, family_error(g.dx, q.dx), family_error(g.dy, q.dy)});
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = worst_value <= kOracleValueTol && worst_grad <= kOracleGradTol && secs < kOracleSeconds;
  return {pass, "1000 cubic pairs; values vs quadrature " + sci(worst_value) + " (tol " + sci(kOracleValueTol) +
                    "), gradients vs central FD (step 1e-4 dist) " + sci(worst_grad) + " (tol " + sci(kOracleGradTol) +
                    "), gradients vs quadrature on 100 pairs " + sci(worst_grad_quad) + ", " + sci(secs) +
                    " s (limit " + sci(kOracleSeconds) + ")"};
}

std::pair<bool, std::string> monomial_reproduction() {
  const Cage sq = Cage::from_loop({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{}, {}, {}, {}});
  DeformationConfig cfg = default_config(1);
  cfg.n = 3;
  cfg.k = 3;
  const Discretization disc = discretize(sq, cfg);
  const auto pts = random_interior_points(sq, 50, 0.02, 11);
  std::vector<BasisRow> rows;
  for (const auto& p : pts) rows.push_back(basis_row(disc, p));
  auto pw = [](double x, int e) { return e < 0 ? 0.0 : std::pow(x, e); };
  const int ns = disc.element_count();
  double worst_f = 0.0, worst_lap = 0.0;
  int count = 0;
  for (int deg = 0; deg <= 3; ++deg) {
    for (int a = deg; a >= 0; --a) {
      const int b = deg - a;
      ++count;
      auto f = [&](const Point2& x) { return pw(x.x(), a) * pw(x.y(), b); };
      auto lap = [&](const Point2& x) {
        return a * (a - 1) * pw(x.x(), a - 2) * pw(x.y(), b) + b * (b - 1) * pw(x.x(), a) * pw(x.y(), b - 2);
      };
      auto grad = [&](const Point2& x) -> Point2 {
        return {a * pw(x.x(), a - 1) * pw(x.y(), b), b * pw(x.x(), a) * pw(x.y(), b - 1)};
      };
      auto grad_lap = [&](const Point2& x) -> Point2 {
        return {a * (a - 1) * (a - 2) * pw(x.x(), a - 3) * pw(x.y(), b) + b * (b - 1) * a * pw(x.x(), a - 1) * pw(x.y(), b - 2),
                a * (a - 1) * b * pw(x.x(), a - 2) * pw(x.y(), b - 1) + b * (b - 1) * (b - 2) * pw(x.x(), a) * pw(x.y(), b - 3)};
      };
      Eigen::VectorXd g1 = Eigen::VectorXd::Zero(ns * 3), g2 = g1, h1 = g1, h2 = g1;
      for (int s = 0; s < ns; ++s) {
        const BezierCurve& e = disc.elements[s];
        const BezierCurve de = bezier_derivative(e);
        const auto c1 = fit_bernstein([&](double t) { return f(bezier_eval(e, t)); }, 3);
        const auto c2 = fit_bernstein([&](double t) { return grad(bezier_eval(e, t)).dot(perp(bezier_eval(de, t))); }, 2);
        const auto c3 = fit_bernstein([&](double t) { return lap(bezier_eval(e, t)); }, 3);
        const auto c4 = fit_bernstein(
            [&](double t) {
              const Point2 v = bezier_eval(de, t);
              return grad_lap(bezier_eval(e, t)).dot(perp(v)) / v.squaredNorm();
            },
            2);
        for (int j = 0; j <= 3; ++j) g1[shared_index(s, j, 3, ns)] = c1[j];
        for (int j = 0; j < 3; ++j) g2[s * 3 + j] = c2[j];
        for (int j = 0; j <= 3; ++j) h1[shared_index(s, j, 3, ns)] = c3[j];
        for (int j = 0; j < 3; ++j) h2[s * 3 + j] = c4[j];
      }
      double fmax = 0.0, lmax = 1.0;
      for (const auto& p : pts) {
        fmax = std::max(fmax, std::abs(f(p)));
        lmax = std::max(lmax, std::abs(lap(p)));
      }
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const BasisRow& r = rows[i];
        const double fv = r.phi.dot(g1) + r.psi.dot(g2) + r.phit.dot(h1) + r.psit.dot(h2);
        const double lv = r.phik.dot(h1) + r.psiw.dot(h2);
        worst_f = std::max(worst_f, std::abs(fv - f(pts[i])) / fmax);
        worst_lap = std::max(worst_lap, std::abs(lv - lap(pts[i])) / lmax);
      }
    }
  }
  const bool pass = count == 10 && worst_f <= kMonomialTol && worst_lap <= kMonomialTol;
  return {pass, std::to_string(count) + " monomials, 50 points, n = k = 3; value " + sci(worst_f) + ", Laplacian " +
                    sci(worst_lap) + " (tol " + sci(kMonomialTol) + ")"};
}

std::pair<bool, std::string> partition_of_unity() {
  double worst = 0.0;
  std::string detail;
  for (const char* name : {"square.cage", "quadratic_blob.cage", "cubic_blob.cage", "quartic_wave.cage"}) {
    const Cage cage = load(name);
    const CoordinateSystem sys = build_system(cage, default_config(cage.order()));
    std::vector<Point2> pts = random_interior_points(cage, 40, 0.005, 12);
    // Points closer than the sample offset exercise the boundary binding.
    for (std::size_t i = 0; i < sys.disc.samples.size(); i += 7) {
      const auto& s = sys.disc.samples[i];
      pts.push_back(s.point - 0.3 * sys.disc.delta * s.outward);
      pts.push_back(s.point - 3.0 * sys.disc.delta * s.outward);
    }
    const CoordinateTable t = precompute_table(sys, pts);
    double w = 0.0;
    for (Eigen::Index r = 0; r < t.alpha_c.rows(); ++r) w = std::max(w, std::abs(t.alpha_c.row(r).sum() - 1.0));
    worst = std::max(worst, w);
    detail += std::string(name) + " (m " + std::to_string(cage.order()) + ", " + std::to_string(t.size()) + " pts) " +
              sci(w) + "; ";
  }
  return {worst <= kUnityTol, detail + "tol " + sci(kUnityTol)};
}

std::pair<bool, std::string> identity_similarity() {
  Eigen::Matrix2d A;
  const double s = 1.3, a = 0.7;
  A << s * std::cos(a), -s * std::sin(a), s * std::sin(a), s * std::cos(a);
  const Point2 shift(-0.4, 2.2);
  double worst_id = 0.0, worst_sim = 0.0, worst_affine = 0.0;
  for (const char* name : {"square.cage", "quadratic_blob.cage", "cubic_blob.cage", "quartic_wave.cage"}) {
    const Cage rest = load(name);
    const double diag = rest.bbox().diagonal();
    const CoordinateSystem sys = build_system(rest, default_config(rest.order()));
    const auto pts = random_interior_points(rest, 60, 0.05, 13);
    const CoordinateTable t = precompute_table(sys, pts);
    const int n = sys.config.n;
    worst_id = std::max(worst_id, max_dist(deform_points(t, BoundaryData::from_cage(rest, n), 1.0), pts) / diag);
    std::vector<Point2> want;
    for (const auto& p : pts) want.push_back(A * p + shift);
    const Cage target = map_cage(rest, [&](const Point2& p) -> Point2 { return A * p + shift; });
    worst_sim = std::max(worst_sim, max_dist(deform_points(t, BoundaryData::from_cage(target, n), 1.0), want) /
                                        target.bbox().diagonal());

    // Full affine maps through both identities with exact boundary traces.
    const Discretization& disc = sys.disc;
    const int ns = disc.element_count();
    for (const auto& [cx, cy, c0] : {std::tuple{0.8, -1.7, 0.3}, std::tuple{2.5, 0.4, -1.0}}) {
      Eigen::VectorXd g1 = Eigen::VectorXd::Zero(ns * n), g2 = Eigen::VectorXd::Zero(ns * n);
      const Eigen::VectorXd h1 = Eigen::VectorXd::Zero(ns * disc.k), h2 = Eigen::VectorXd::Zero(ns * disc.k);
      for (int e = 0; e < ns; ++e) {
        const BezierCurve& el = disc.elements[e];
        const BezierCurve d = bezier_derivative(el);
        const auto c1 = fit_bernstein([&](double t) { const Point2 q = bezier_eval(el, t); return cx * q.x() + cy * q.y() + c0; }, n);
        const auto c2 = fit_bernstein([&](double t) { return Point2(cx, cy).dot(perp(bezier_eval(d, t))); }, n - 1);
        for (int j = 0; j <= n; ++j) g1[shared_index(e, j, n, ns)] = c1[j];
        for (int j = 0; j < n; ++j) g2[e * n + j] = c2[j];
      }
      for (const auto& p : pts) {
        const BieValue v = evaluate_bie(disc, g1, g2, h1, h2, p);
        const double ref = cx * p.x() + cy * p.y() + c0;
        worst_affine = std::max(worst_affine, std::max(std::abs(v.f - ref), std::abs(v.laplacian)) / std::max(1.0, std::abs(ref)));
      }
    }
  }
  const bool pass = worst_id <= kReproductionTol && worst_sim <= kReproductionTol && worst_affine <= kAffineTraceTol;
  return {pass, "4 cages, 60 points >= 5% from boundary; identity " + sci(worst_id) + ", similarity " + sci(worst_sim) +
                    " (tol " + sci(kReproductionTol) + " of diag); affine traces " + sci(worst_affine) + " (tol " +
                    sci(kAffineTraceTol) + ")"};
}

std::pair<bool, std::string> solver_comparison() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"square.cage", "quadratic_blob.cage", "cubic_blob.cage", "cubic_blob_bent.cage",
                           "quartic_wave.cage"}) {
    const Cage cage = normalize_orientation(load(name));
    DeformationConfig c12 = default_config(cage.order()), c1 = c12;
    c1.method = SolverMethod::BiHC1;
    const Discretization disc = discretize(cage, c12);
    const BemMatrices m = assemble(disc);
    const double r12 = combined_residual(m, solve_regularization(m, SolverMethod::BiHC12));
    const double r1 = combined_residual(m, solve_regularization(m, SolverMethod::BiHC1));
    pass = pass && r12 <= r1 + kSolverSlack;
    detail += std::string(name) + " rho12 " + sci(r12) + " rho1 " + sci(r1) + "; ";
  }
  return {pass, detail + "slack " + sci(kSolverSlack)};
}

std::pair<bool, std::string> boundary_interpolation() {
  const Cage rest = load("cubic_blob.cage");
  const Cage target = load("cubic_blob_bent.cage");
  const double diag = rest.bbox().diagonal();
  // Probes a small distance inside the rest boundary, compared to the target
  // curve at the same parameter.
  std::vector<Point2> probes, on_target;
  for (std::size_t e = 0; e < rest.size(); ++e) {
    const BezierCurve d = bezier_derivative(rest.curve(e));
    for (int i = 1; i < 20; ++i) {
      const double t = i / 20.0;
      const Point2 nrm = perp(bezier_eval(d, t)).normalized();
      probes.push_back(bezier_eval(rest.curve(e), t) - 1e-3 * diag * nrm);
      on_target.push_back(bezier_eval(target.curve(e), t));
    }
  }
  std::vector<double> dev;
  for (int subdiv : {4, 8}) {
    DeformationConfig cfg = default_config(3);
    cfg.subdiv = subdiv;
    const CoordinateSystem sys = build_system(rest, cfg);
    const CoordinateTable t = precompute_table(sys, probes);
    const auto got = deform_points(t, BoundaryData::from_cage(target, 3), 1.0);
    dev.push_back(max_dist(got, on_target) / diag);
  }
  return {dev[1] < dev[0], "bent cubic target, 76 probes at 1e-3 diag; max deviation subdiv 4 " + sci(dev[0]) +
                               " -> subdiv 8 " + sci(dev[1]) + " (must decrease)"};
}

std::pair<bool, std::string> blend_semantics(const fs::path& artifacts) {
  const Cage rest = load("cubic_blob.cage");
  const Cage target = load("cubic_blob_bent.cage");
  const Shape shape = read_shape_file(data("blob_grid.shape"));
  const CoordinateTable t = precompute_scene(rest, shape, default_config(3));
  const BoundaryData bd = BoundaryData::from_cage(target, 3);
  const auto p0 = deform_points(t, bd, 0.0), ph = deform_points(t, bd, 0.5), p1 = deform_points(t, bd, 1.0);
  const auto green = deform_points_green(t, bd);
  bool bitwise = p0.size() == green.size();
  for (std::size_t i = 0; bitwise && i < p0.size(); ++i) bitwise = p0[i] == green[i];
  double lin = 0.0;
  Random rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    const double w = rng.u(0, 1);
    const auto pw = deform_points(t, bd, w);
    for (std::size_t i = 0; i < pw.size(); ++i) lin = std::max(lin, (pw[i] - ((1 - w) * p0[i] + w * p1[i])).norm());
  }
  for (std::size_t i = 0; i < ph.size(); ++i) lin = std::max(lin, (ph[i] - 0.5 * (p0[i] + p1[i])).norm());
  int written = 0;
  for (const auto& [w, pts] : {std::pair{0.0, &p0}, std::pair{0.5, &ph}, std::pair{1.0, &p1}}) {
    const auto verts = scatter_deformed(shape, t, *pts);
    char name[64];
    std::snprintf(name, sizeof name, "blend_w%.1f.svg", w);
    char title[64];
    std::snprintf(title, sizeof title, "blend w = %.1f", w);
    write_text_file((artifacts / name).string(), render_svg(scene(title, shape, verts, rest, target)));
    ++written;
  }
  return {bitwise && lin <= kBlendLinearTol && written == 3,
          std::string("w = 0 equals Green part bitwise: ") + (bitwise ? "yes" : "no") + "; linearity " + sci(lin) +
              " (tol " + sci(kBlendLinearTol) + "); 3 SVGs"};
}

std::pair<bool, std::string> neumann_optimization(const fs::path& artifacts) {
  const Cage rest = load("cubic_blob.cage");
  const Cage target = load("cubic_blob_bent.cage");
  const Shape shape = read_shape_file(data("blob_grid.shape"));
  const DeformationConfig cfg = default_config(3);
  const CoordinateSystem sys = build_system(rest, cfg);
  const CoordinateTable t = precompute_scene(rest, shape, cfg);
  bool pass = true;
  std::string detail;
  for (ScaleMode mode : {ScaleMode::Unit, ScaleMode::AHAP, ScaleMode::AAAP}) {
    const DeformOutcome out = deform_scene(t, target, mode, 1.0, &sys);
    const std::string name = to_string(mode);
    write_text_file((artifacts / ("neumann_" + name + ".svg")).string(),
                    render_svg(scene("s-mode " + name, shape, scatter_deformed(shape, t, out.points), rest, target)));
    if (mode == ScaleMode::Unit) continue;
    const bool ok = out.energy <= out.unit_energy + kEnergySlack * std::max(1.0, out.unit_energy) &&
                    out.scales.minCoeff() >= kMinScale && out.kkt_residual <= kKktTol;
    pass = pass && ok;
    detail += name + " energy " + sci(out.energy) + " / unit " + sci(out.unit_energy) + ", min s " +
              sci(out.scales.minCoeff()) + ", kkt " + sci(out.kkt_residual) + "; ";
  }
  return {pass, detail + "3 SVGs"};
}

std::pair<bool, std::string> order_sweep(const fs::path& artifacts) {
  const Cage rest = load("quadratic_blob.cage");
  const Shape shape = read_shape_file(data("blob_grid.shape"));
  bool pass = true;
  std::string detail;
  for (int n : {2, 3, 4}) {
    const Cage target = map_cage(elevate_cage(rest, n), bend);
    if (!validate_cage(target).valid()) throw ValidationError("bent target of order " + std::to_string(n) + " invalid");
    ConfigOverrides o;
    o.n = n;
    const DeformationConfig cfg = resolve_config(rest.order(), o);
    const CoordinateSystem sys = build_system(rest, cfg);
    const CoordinateTable t = precompute_scene(rest, shape, cfg);

    double unity = 0.0;
    for (Eigen::Index r = 0; r < t.alpha_c.rows(); ++r) unity = std::max(unity, std::abs(t.alpha_c.row(r).sum() - 1.0));
    const auto inner = random_interior_points(rest, 30, 0.05, 15);
    const CoordinateTable ti = precompute_table(sys, inner);
    const double ident = max_dist(deform_points(ti, BoundaryData::from_cage(rest, n), 1.0), inner) / rest.bbox().diagonal();
    const BoundaryData bd = BoundaryData::from_cage(target, n);
    const auto p0 = deform_points(t, bd, 0.0), ph = deform_points(t, bd, 0.5), p1 = deform_points(t, bd, 1.0);
    double lin = 0.0;
    for (std::size_t i = 0; i < ph.size(); ++i) lin = std::max(lin, (ph[i] - 0.5 * (p0[i] + p1[i])).norm());
    const DeformOutcome ahap = deform_scene(t, target, ScaleMode::AHAP, 1.0, &sys);
    const bool ok = unity <= kUnityTol && ident <= kReproductionTol && lin <= kBlendLinearTol &&
                    ahap.energy <= ahap.unit_energy + kEnergySlack * std::max(1.0, ahap.unit_energy) &&
                    ahap.kkt_residual <= kKktTol && t.size() == shape.vertices.size();
    pass = pass && ok;
    write_text_file((artifacts / ("order_n" + std::to_string(n) + ".svg")).string(),
                    render_svg(scene("n = " + std::to_string(n), shape, scatter_deformed(shape, t, p1), rest, target)));
    detail += "n " + std::to_string(n) + ": unity " + sci(unity) + " identity " + sci(ident) + " linearity " +
              sci(lin) + " ahap kkt " + sci(ahap.kkt_residual) + (ok ? "" : " [violated]") + "; ";
  }
  return {pass, detail + "3 SVGs"};
}

std::pair<bool, std::string> determinism(const fs::path& artifacts) {
  const fs::path dir = artifacts / "determinism";
  fs::create_directories(dir);
  const std::string cage = data("cubic_blob.cage"), shape = data("blob_grid.shape");
  std::ostringstream out, err;
  auto cli = [&](const std::vector<std::string>& a) { return run_cli(a, out, err); };
  const std::string c1 = (dir / "a.cache").string(), c2 = (dir / "b.cache").string();
  if (cli({"precompute", "--cage", cage, "--shape", shape, "--out", c1}) != kExitOk ||
      cli({"precompute", "--cage", cage, "--shape", shape, "--out", c2}) != kExitOk) {
    throw NumericalError("precompute failed: " + err.str(), 0.0);
  }
  const bool identical = read_text_file(c1) == read_text_file(c2);
  const std::string deformed = (dir / "cli.shape").string();
  if (cli({"deform", "--cache", c1, "--shape", shape, "--target", data("cubic_blob_bent.cage"), "--cage", cage,
           "--s-mode", "ahap", "--w", "0.7", "--out", deformed}) != kExitOk) {
    throw NumericalError("deform failed: " + err.str(), 0.0);
  }
  const auto via_cli = read_shape_file(deformed).vertices;

  DeformService svc(ServiceOptions{"127.0.0.1", 0, std::chrono::seconds(600)});
  const int port = svc.start();
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(300, 0);
  using nlohmann::json;
  const json body{{"cage", read_text_file(cage)}, {"shape", read_text_file(shape)}, {"config", json::object()}};
  auto created = client.Post("/sessions", body.dump(), "application/json");
  if (!created || created->status != 201) throw NumericalError("service refused the session", 0.0);
  const std::string id = json::parse(created->body).at("id");
  for (int i = 0; i < 30000; ++i) {
    auto st = client.Get("/sessions/" + id);
    if (st && json::parse(st->body).at("state") != "precomputing") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  auto table = client.Get("/sessions/" + id + "/table");
  const bool same_table = table && table->status == 200 && table->body == read_text_file(c1);
  const json req{{"target", read_text_file(data("cubic_blob_bent.cage"))}, {"w", 0.7}, {"s_mode", "ahap"}};
  auto def = client.Post("/sessions/" + id + "/deform", req.dump(), "application/json");
  svc.stop();
  if (!def || def->status != 200) throw NumericalError("service deform failed", 0.0);
  const auto via_service = decode_points(def->body);
  const double agree = via_service.size() == via_cli.size() ? max_dist(via_service, via_cli) : 1e300;
  return {identical && same_table && agree <= kServiceAgreementTol,
          std::string("two CLI caches byte-identical: ") + (identical ? "yes" : "no") +
              "; service table equals CLI cache: " + (same_table ? "yes" : "no") + "; CLI vs service deform (ahap, w 0.7) " +
              sci(agree) + " (tol " + sci(kServiceAgreementTol) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::string artifacts = "artifacts";
  app.add_option("--artifacts", artifacts, "Directory for SVG renders");
  CLI11_PARSE(app, argc, argv);
  const fs::path dir(artifacts);
  fs::create_directories(dir);

  criterion("integral oracle equivalence", oracle_equivalence);
  criterion("monomial reproduction", monomial_reproduction);
  criterion("green partition of unity", partition_of_unity);
  criterion("identity and similarity reproduction", identity_similarity);
  criterion("solver comparison", solver_comparison);
  criterion("boundary interpolation refinement", boundary_interpolation);
  criterion("blend semantics", [&] { return blend_semantics(dir); });
  criterion("neumann optimization", [&] { return neumann_optimization(dir); });
  criterion("order sweep", [&] { return order_sweep(dir); });
  criterion("determinism", [&] { return determinism(dir); });

  int failed = 0;
  for (const auto& l : lines) failed += l.pass ? 0 : 1;
  std::printf("%zu criteria, %d failed\n", lines.size(), failed);
  return failed == 0 ? 0 : 1;
}

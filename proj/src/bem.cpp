#include "bihc/bem.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "bihc/errors.hpp"

namespace bihc {

std::string to_string(SolverMethod m) { return m == SolverMethod::BiHC1 ? "bihc1" : "bihc12"; }

SolverMethod parse_solver_method(const std::string& s) {
  if (s == "bihc1") return SolverMethod::BiHC1;
  if (s == "bihc12") return SolverMethod::BiHC12;
  throw ValidationError("unknown solver method '" + s + "' (expected bihc1 or bihc12)");
}

void check_config(const DeformationConfig& config, int cage_order) {
  if (config.n < cage_order) {
    throw ValidationError("order n = " + std::to_string(config.n) + " is below the cage order " +
                          std::to_string(cage_order) + " (n >= m required for continuity)");
  }
  if (config.n < 1) throw ValidationError("order n must be >= 1");
  if (config.k < 0 || (config.k > 0 && config.k < config.n)) {
    throw ValidationError("order k must be >= n");
  }
  if (config.subdiv < 1) throw ValidationError("subdiv must be >= 1");
  if (config.samples < 0) throw ValidationError("samples must be >= 1");
  if (!(config.offset_fraction > 0.0) || config.offset_fraction >= 0.1) {
    throw ValidationError("offset fraction must lie in (0, 0.1)");
  }
}

Discretization discretize(const Cage& input, const DeformationConfig& config) {
  check_config(config, input.order());
  Discretization d;
  d.cage = elevate_cage(input, input.order());
  d.n = config.n;
  d.k = config.order_k();
  d.diagonal = d.cage.bbox().diagonal();
  d.delta = config.offset_fraction * d.diagonal;

  const int nc = d.edge_count();
  const int sub = config.subdiv;
  for (int i = 0; i < nc; ++i) {
    const BezierCurve& c = d.cage.curve(i);
    for (int p = 0; p < sub; ++p) {
      const double a = static_cast<double>(p) / sub;
      const double b = static_cast<double>(p + 1) / sub;
      BezierCurve piece = sub == 1 ? c : restrict_curve(c, a, b);
      // Keep shared endpoints bitwise identical to the parent.
      std::vector<Point2> pts = piece.control_points();
      if (p == 0) pts.front() = c.front();
      if (p == sub - 1) pts.back() = c.back();
      if (p > 0) pts.front() = d.elements.back().back();
      d.elements.emplace_back(std::move(pts));
      d.parents.push_back({static_cast<std::size_t>(i), a, b});
    }
  }

  const int ns = d.element_count();
  const int n = d.n;
  d.S = Eigen::MatrixXd::Zero(ns * n, nc * n);
  d.T = Eigen::MatrixXd::Zero(ns * n, nc * n);
  for (int s = 0; s < ns; ++s) {
    const auto& par = d.parents[s];
    const int e = static_cast<int>(par.edge);
    const Eigen::MatrixXd R = restriction_matrix(n, par.a, par.b);
    for (int j = 0; j <= n; ++j) {
      // Endpoint rows are owned by whichever element starts there; skip the duplicate.
      if (j == n) continue;
      const int row = shared_index(s, j, n, ns);
      for (int l = 0; l <= n; ++l) d.S(row, shared_index(e, l, n, nc)) += R(j, l);
    }
    const Eigen::MatrixXd R1 = restriction_matrix(n - 1, par.a, par.b) * (par.b - par.a);
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l) d.T(s * n + j, e * n + l) = R1(j, l);
    }
  }

  const ContainmentTester inside(d.cage);
  const int count = config.samples_per_element();
  for (int s = 0; s < ns; ++s) {
    const BezierCurve& c = d.elements[s];
    const BezierCurve dc = bezier_derivative(c);
    for (int l = 0; l < count; ++l) {
      BoundarySample smp;
      smp.element = s;
      smp.t = (l + 0.5) / count;
      smp.point = bezier_eval(c, smp.t);
      const Point2 tangent = bezier_eval(dc, smp.t);
      smp.speed = tangent.norm();
      if (smp.speed == 0.0) throw DomainError("discretize: zero tangent at a sample");
      smp.outward = perp(tangent) / smp.speed;
      double delta = d.delta;
      while (true) {
        smp.eta = smp.point - delta * smp.outward;
        if (inside.inside(smp.eta)) break;
        delta *= 0.5;
        if (delta < 1e-12 * d.diagonal) {
          throw DomainError("discretize: no interior offset point for sample " + std::to_string(l) +
                            " of element " + std::to_string(s));
        }
      }
      smp.offset = delta;
      d.samples.push_back(smp);
    }
  }
  return d;
}

namespace {

BasisRow empty_row(const Discretization& disc) {
  const int ns = disc.element_count();
  BasisRow r;
  r.phi = Eigen::RowVectorXd::Zero(ns * disc.n);
  r.psi = Eigen::RowVectorXd::Zero(ns * disc.n);
  r.phit = Eigen::RowVectorXd::Zero(ns * disc.k);
  r.psit = Eigen::RowVectorXd::Zero(ns * disc.k);
  r.phik = Eigen::RowVectorXd::Zero(ns * disc.k);
  r.psiw = Eigen::RowVectorXd::Zero(ns * disc.k);
  return r;
}

void scatter(BasisRow& row, const BasisIntegrals& b, int s, int n, int k, int ns) {
  for (int j = 0; j <= n; ++j) row.phi[shared_index(s, j, n, ns)] += b.phi[j];
  for (int j = 0; j < n; ++j) row.psi[s * n + j] += b.psi[j];
  for (int j = 0; j <= k; ++j) {
    row.phit[shared_index(s, j, k, ns)] += b.phit[j];
    row.phik[shared_index(s, j, k, ns)] += b.phik[j];
  }
  for (int j = 0; j < k; ++j) {
    row.psit[s * k + j] += b.psit[j];
    row.psiw[s * k + j] += b.psiw[j];
  }
}

}  // namespace

BasisRow basis_row(const Discretization& disc, const Point2& eta, const KernelSettings& settings) {
  BasisRow row = empty_row(disc);
  const int ns = disc.element_count();
  for (int s = 0; s < ns; ++s) {
    bool fb = false;
    const BasisIntegrals b = basis_integrals_robust(disc.elements[s], eta, disc.n, disc.k, settings, &fb);
    if (!b.all_finite()) throw NumericalError("basis_row: non-finite basis integral", 0.0);
    row.fallbacks += fb ? 1 : 0;
    scatter(row, b, s, disc.n, disc.k, ns);
  }
  return row;
}

BasisRowGradient basis_row_gradient(const Discretization& disc, const Point2& eta,
                                    const KernelSettings& settings) {
  BasisRowGradient g{empty_row(disc), empty_row(disc), 0};
  const int ns = disc.element_count();
  for (int s = 0; s < ns; ++s) {
    bool fb = false;
    const BasisGradients b =
        basis_integral_gradients_robust(disc.elements[s], eta, disc.n, disc.k, settings, &fb);
    g.fallbacks += fb ? 1 : 0;
    scatter(g.dx, b.dx, s, disc.n, disc.k, ns);
    scatter(g.dy, b.dy, s, disc.n, disc.k, ns);
  }
  return g;
}

Eigen::MatrixXd BemMatrices::E() const {
  Eigen::MatrixXd e(PhiBar_k.rows(), PhiBar_k.cols() + PsiBar_k.cols());
  e << PhiBar_k, PsiBar_k;
  return e;
}

Eigen::MatrixXd BemMatrices::F() const {
  Eigen::MatrixXd f(Phi_k.rows(), Phi_k.cols() + PsiW_k.cols());
  f << Phi_k - M_k, PsiW_k + N_k;
  return f;
}

Eigen::MatrixXd BemMatrices::W_g1() const { return M_n - Phi_n; }
Eigen::MatrixXd BemMatrices::W_g2() const { return -(Psi_n + N_n); }

BemMatrices assemble(const Discretization& disc, const KernelSettings& settings, Execution execution,
                     bool offset_correction) {
  const int rows = static_cast<int>(disc.samples.size());
  const int ns = disc.element_count();
  const int n = disc.n;
  const int k = disc.k;
  BemMatrices m;
  m.offset_correction = offset_correction;
  m.M_n = Eigen::MatrixXd::Zero(rows, ns * n);
  m.Phi_n = m.M_n;
  m.Psi_n = Eigen::MatrixXd::Zero(rows, ns * n);
  m.N_n = m.Psi_n;
  m.M_k = Eigen::MatrixXd::Zero(rows, ns * k);
  m.Phi_k = m.M_k;
  m.PhiBar_k = m.M_k;
  m.PsiBar_k = Eigen::MatrixXd::Zero(rows, ns * k);
  m.PsiW_k = m.PsiBar_k;
  m.N_k = m.PsiBar_k;
  std::vector<int> fallbacks(rows, 0);

  auto fill = [&](int l) {
    const BoundarySample& smp = disc.samples[l];
    const int s = static_cast<int>(smp.element);
    const auto bn = bernstein_row(n, smp.t);
    const auto bk = bernstein_row(k, smp.t);
    for (int j = 0; j <= n; ++j) m.M_n(l, shared_index(s, j, n, ns)) += bn[j];
    for (int j = 0; j <= k; ++j) m.M_k(l, shared_index(s, j, k, ns)) += bk[j];
    if (offset_correction) {
      const auto bn1 = bernstein_row(n - 1, smp.t);
      const auto bk1 = bernstein_row(k - 1, smp.t);
      for (int j = 0; j < n; ++j) m.N_n(l, s * n + j) = smp.offset * bn1[j] / smp.speed;
      for (int j = 0; j < k; ++j) m.N_k(l, s * k + j) = smp.offset * smp.speed * bk1[j];
    }
    const BasisRow r = basis_row(disc, smp.eta, settings);
    m.Phi_n.row(l) = r.phi;
    m.Psi_n.row(l) = r.psi;
    m.PhiBar_k.row(l) = r.phit;
    m.PsiBar_k.row(l) = r.psit;
    m.Phi_k.row(l) = r.phik;
    m.PsiW_k.row(l) = r.psiw;
    fallbacks[l] = r.fallbacks;
  };

  if (execution == Execution::Parallel) {
    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (int l = 0; l < rows; ++l) {
      try {
        fill(l);
      } catch (const std::exception& e) {
#pragma omp critical(bihc_assemble_error)
        if (failure.empty()) failure = "assemble: sample " + std::to_string(l) + ": " + e.what();
      }
    }
    if (!failure.empty()) throw NumericalError(failure, 0.0);
  } else {
    for (int l = 0; l < rows; ++l) {
      try {
        fill(l);
      } catch (const std::exception& e) {
        throw NumericalError("assemble: sample " + std::to_string(l) + ": " + e.what(), 0.0);
      }
    }
  }
  for (int l = 0; l < rows; ++l) {
    if (fallbacks[l] > 0) m.fallback_rows.push_back(l);
  }
  return m;
}

Eigen::MatrixXd RegularizedSolve::C() const {
  Eigen::MatrixXd c(C_L.rows() + C_D.rows(), C_L.cols());
  c << C_L, C_D;
  return c;
}

namespace {

constexpr double kRankTolerance = 1e-10;

Eigen::MatrixXd pinv_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const std::string& name) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(kRankTolerance);
  cod.compute(A);
  if (cod.rank() < std::min(A.rows(), A.cols())) {
    throw ConditioningError(name, "rank deficient (rank " + std::to_string(cod.rank()) + " of " +
                                      std::to_string(std::min(A.rows(), A.cols())) + ")");
  }
  return cod.solve(B);
}

}  // namespace

RegularizedSolve solve_regularization(const BemMatrices& mats, SolverMethod method) {
  RegularizedSolve out;
  out.method = method;
  const Eigen::Index hk1 = mats.PhiBar_k.cols();
  const Eigen::Index rows = mats.PhiBar_k.rows();
  if (method == SolverMethod::BiHC12) {
    const Eigen::MatrixXd E = mats.E();
    const Eigen::MatrixXd F = mats.F();
    Eigen::MatrixXd A(E.rows() + F.rows(), E.cols());
    A << E, F;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(A.rows(), rows);
    B.topRows(rows).setIdentity();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    qr.setThreshold(kRankTolerance);
    qr.compute(A);
    if (qr.rank() < A.cols()) {
      throw ConditioningError("[E; F]", "rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                                            std::to_string(A.cols()) + ")");
    }
    const Eigen::MatrixXd C = qr.solve(B);
    out.C_L = C.topRows(hk1);
    out.C_D = C.bottomRows(C.rows() - hk1);
  } else {
    const Eigen::MatrixXd PsiW = mats.PsiW_k + mats.N_k;
    const Eigen::MatrixXd A = pinv_solve(PsiW, mats.M_k - mats.Phi_k, "PsiW_k");
    const Eigen::MatrixXd G = mats.PhiBar_k + mats.PsiBar_k * A;
    out.C_L = pinv_solve(G, Eigen::MatrixXd::Identity(rows, rows), "PhiBar_k + PsiBar_k A");
    out.C_D = A * out.C_L;
  }
  if (!out.C_L.allFinite() || !out.C_D.allFinite()) {
    throw NumericalError("solve_regularization: non-finite operator", 0.0);
  }
  return out;
}

double combined_residual(const BemMatrices& mats, const RegularizedSolve& solve) {
  const Eigen::MatrixXd C = solve.C();
  const Eigen::MatrixXd EC = mats.E() * C;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(EC.rows(), EC.cols());
  return (EC - I).squaredNorm() + (mats.F() * C).squaredNorm();
}

BieValue evaluate_bie(const Discretization& disc, const Eigen::VectorXd& g1, const Eigen::VectorXd& g2,
                      const Eigen::VectorXd& h1, const Eigen::VectorXd& h2, const Point2& eta,
                      const KernelSettings& settings) {
  const int ns = disc.element_count();
  if (g1.size() != ns * disc.n || g2.size() != ns * disc.n || h1.size() != ns * disc.k ||
      h2.size() != ns * disc.k) {
    throw ContractError("evaluate_bie: coefficient vector size mismatch");
  }
  const BasisRow r = basis_row(disc, eta, settings);
  BieValue v;
  v.f = r.phi.dot(g1) + r.psi.dot(g2) + r.phit.dot(h1) + r.psit.dot(h2);
  v.laplacian = r.phik.dot(h1) + r.psiw.dot(h2);
  return v;
}

}  // namespace bihc

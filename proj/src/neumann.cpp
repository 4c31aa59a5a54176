#include "bihc/neumann.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "bihc/errors.hpp"

namespace bihc {

std::string to_string(ScaleMode m) {
  switch (m) {
    case ScaleMode::Unit: return "unit";
    case ScaleMode::AHAP: return "ahap";
    case ScaleMode::AAAP: return "aaap";
    case ScaleMode::AAAPCentered: return "aaap-centered";
  }
  return "unit";
}

ScaleMode parse_scale_mode(const std::string& s) {
  if (s == "unit") return ScaleMode::Unit;
  if (s == "ahap") return ScaleMode::AHAP;
  if (s == "aaap") return ScaleMode::AAAP;
  if (s == "aaap-centered") return ScaleMode::AAAPCentered;
  throw ValidationError("unknown s-mode '" + s + "' (expected unit, ahap, aaap or aaap-centered)");
}

double ScaleProblem::energy(const Eigen::VectorXd& s) const { return s.dot(Q * s) + 2.0 * b.dot(s) + c; }

Eigen::VectorXd ScaleProblem::gradient(const Eigen::VectorXd& s) const { return 2.0 * (Q * s + b); }

namespace {

std::vector<Point2> default_probes(const CoordinateSystem& sys) {
  std::vector<Point2> p;
  p.reserve(sys.disc.samples.size());
  for (const auto& s : sys.disc.samples) p.push_back(s.eta);
  return p;
}

Eigen::RowVectorXd stack(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  Eigen::RowVectorXd v(a.size() + b.size());
  v << a, b;
  return v;
}

// Affine rows of one probe: value = la·G1 + Σ_e s_e·lb·N_e, per output row.
struct ProbeRows {
  std::vector<Eigen::RowVectorXd> la, lb;  // one pair per scalar output
  std::vector<int> component;              // x or y of G
};

ProbeRows probe_rows(const CoordinateSystem& sys, const Point2& q, ScaleMode mode, double w) {
  ProbeRows pr;
  if (mode == ScaleMode::AHAP) {
    const BasisRow r = basis_row(sys.disc, q, sys.config.kernel);
    const Eigen::RowVectorXd v = stack(r.phik, r.psiw);
    const Eigen::RowVectorXd la = w * (v * sys.CW_alpha);
    const Eigen::RowVectorXd lb = w * (v * sys.CW_beta);
    for (int comp = 0; comp < 2; ++comp) {
      pr.la.push_back(la);
      pr.lb.push_back(lb);
      pr.component.push_back(comp);
    }
    return pr;
  }
  const CoordinateGradient g = coordinate_gradient(sys, q);
  const Eigen::RowVectorXd ax = g.alpha_c_x + w * (g.alpha_x - g.alpha_c_x);
  const Eigen::RowVectorXd ay = g.alpha_c_y + w * (g.alpha_y - g.alpha_c_y);
  const Eigen::RowVectorXd bx = g.beta_c_x + w * (g.beta_x - g.beta_c_x);
  const Eigen::RowVectorXd by = g.beta_c_y + w * (g.beta_y - g.beta_c_y);
  for (int comp = 0; comp < 2; ++comp) {
    pr.la.push_back(ax);
    pr.lb.push_back(bx);
    pr.component.push_back(comp);
    pr.la.push_back(ay);
    pr.lb.push_back(by);
    pr.component.push_back(comp);
  }
  return pr;
}

}  // namespace

ScaleProblem build_scale_problem(const CoordinateSystem& sys, const BoundaryData& target, ScaleMode mode,
                                 double w, const std::vector<Point2>& probes_in) {
  if (target.edge_count() != sys.edge_count() || target.order() != sys.config.n) {
    throw ContractError("build_scale_problem: target does not match the system");
  }
  const int nc = sys.edge_count();
  ScaleProblem p;
  p.mode = mode;
  p.Q = Eigen::MatrixXd::Zero(nc, nc);
  p.b = Eigen::VectorXd::Zero(nc);
  if (mode == ScaleMode::Unit) return p;
  p.probes = probes_in.empty() ? default_probes(sys) : probes_in;

  const Eigen::MatrixXd G1 = g1_matrix(target);
  std::vector<Eigen::MatrixXd> N(nc);
  for (int e = 0; e < nc; ++e) N[e] = neumann_vector_edge(target, e);

  const int np = static_cast<int>(p.probes.size());
  std::vector<ProbeRows> rows(np);
  std::vector<std::string> failures(np);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < np; ++i) {
    try {
      rows[i] = probe_rows(sys, p.probes[i], mode, w);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }
  for (int i = 0; i < np; ++i) {
    if (!failures[i].empty()) throw NumericalError("probe " + std::to_string(i) + ": " + failures[i], 0.0);
  }

  const int per = static_cast<int>(rows.empty() ? 0 : rows[0].la.size());
  p.A = Eigen::MatrixXd::Zero(np * per, nc);
  p.a = Eigen::VectorXd::Zero(np * per);
  for (int i = 0; i < np; ++i) {
    for (int r = 0; r < per; ++r) {
      const int comp = rows[i].component[r];
      p.a[i * per + r] = rows[i].la[r].dot(G1.col(comp));
      for (int e = 0; e < nc; ++e) p.A(i * per + r, e) = rows[i].lb[r].dot(N[e].col(comp));
    }
  }
  if (mode == ScaleMode::AAAPCentered && np > 0) {
    for (int r = 0; r < per; ++r) {
      double am = 0.0;
      Eigen::RowVectorXd Am = Eigen::RowVectorXd::Zero(nc);
      for (int i = 0; i < np; ++i) {
        am += p.a[i * per + r];
        Am += p.A.row(i * per + r);
      }
      am /= np;
      Am /= np;
      for (int i = 0; i < np; ++i) {
        p.a[i * per + r] -= am;
        p.A.row(i * per + r) -= Am;
      }
    }
  }
  p.Q = p.A.transpose() * p.A;
  p.b = p.A.transpose() * p.a;
  p.c = p.a.squaredNorm();
  return p;
}

double direct_energy(const CoordinateSystem& sys, const BoundaryData& bd, ScaleMode mode, double w,
                     const std::vector<Point2>& probes_in) {
  if (mode == ScaleMode::Unit) return 0.0;
  const std::vector<Point2> probes = probes_in.empty() ? default_probes(sys) : probes_in;
  const Eigen::MatrixXd G1 = g1_matrix(bd);
  const Eigen::MatrixXd G2 = neumann_vector(bd);
  if (mode == ScaleMode::AHAP) {
    // Boundary unknowns H from the constraint solve, then the Laplacian identity.
    const Eigen::MatrixXd R = sys.mats.W_g1() * (sys.disc.S * G1) + sys.mats.W_g2() * (sys.disc.T * G2);
    const Eigen::MatrixXd H = sys.solve.C() * R;
    double e = 0.0;
    for (const auto& q : probes) {
      const BasisRow r = basis_row(sys.disc, q, sys.config.kernel);
      const Eigen::RowVectorXd lap = w * (stack(r.phik, r.psiw) * H);
      e += lap.squaredNorm();
    }
    return e;
  }
  std::vector<Eigen::Matrix2d> J;
  for (const auto& q : probes) J.push_back(jacobian_at(sys, q, bd, w));
  Eigen::Matrix2d mean = Eigen::Matrix2d::Zero();
  if (mode == ScaleMode::AAAPCentered) {
    for (const auto& j : J) mean += j;
    mean /= static_cast<double>(J.size());
  }
  double e = 0.0;
  for (const auto& j : J) e += (j - mean).squaredNorm();
  return e;
}

double kkt_residual(const ScaleProblem& problem, const Eigen::VectorXd& s) {
  const Eigen::VectorXd g = problem.gradient(s);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] < problem.s_min - 1e-14) return std::numeric_limits<double>::infinity();
    const bool clamped = s[i] <= problem.s_min * (1.0 + 1e-12);
    worst = std::max(worst, clamped ? std::max(0.0, -g[i]) : std::abs(g[i]));
  }
  return worst;
}

ScaleSolution optimize_scales(const ScaleProblem& problem) {
  const Eigen::Index nc = problem.Q.rows();
  ScaleSolution sol;
  sol.s = Eigen::VectorXd::Ones(nc);
  sol.unit_energy = problem.energy(sol.s);
  if (problem.mode == ScaleMode::Unit || nc == 0) {
    sol.energy = sol.unit_energy;
    return sol;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(problem.Q);
  const double qmax = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  if (eig.eigenvalues().minCoeff() < -1e-10 * qmax) {
    throw ConditioningError("Q", "quadratic form is indefinite");
  }

  const double lo = problem.s_min;
  Eigen::VectorXd s = sol.s.cwiseMax(lo);
  std::vector<bool> active(nc, false);
  const int max_iter = 50 * static_cast<int>(nc) + 50;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < nc; ++i) {
      if (!active[i]) free.push_back(i);
    }
    Eigen::VectorXd p = Eigen::VectorXd::Zero(nc);
    if (!free.empty()) {
      const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd Qf(nf, nf);
      Eigen::VectorXd gf(nf);
      const Eigen::VectorXd g = problem.Q * s + problem.b;
      for (Eigen::Index a = 0; a < nf; ++a) {
        gf[a] = g[free[a]];
        for (Eigen::Index c = 0; c < nf; ++c) Qf(a, c) = problem.Q(free[a], free[c]);
      }
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
      cod.setThreshold(1e-12);
      cod.compute(Qf);
      const Eigen::VectorXd pf = cod.solve(-gf);
      for (Eigen::Index a = 0; a < nf; ++a) p[free[a]] = pf[a];
    }
    if (p.norm() <= 1e-14 * std::max(1.0, s.norm())) {
      const Eigen::VectorXd g = problem.gradient(s);
      Eigen::Index worst = -1;
      double most_negative = -1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff());
      for (Eigen::Index i = 0; i < nc; ++i) {
        if (active[i] && g[i] < most_negative) {
          most_negative = g[i];
          worst = i;
        }
      }
      if (worst < 0) break;
      active[worst] = false;
      continue;
    }
    double step = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index i = 0; i < nc; ++i) {
      if (!active[i] && p[i] < 0.0) {
        const double lim = (lo - s[i]) / p[i];
        if (lim < step) {
          step = lim;
          blocking = i;
        }
      }
    }
    s += step * p;
    if (blocking >= 0) {
      s[blocking] = lo;
      active[blocking] = true;
    }
    s = s.cwiseMax(lo);
  }
  sol.s = s;
  sol.iterations = it;
  sol.energy = problem.energy(s);
  sol.kkt_residual = kkt_residual(problem, s);
  return sol;
}

}  // namespace bihc

#include "bihc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bihc/cage.hpp"
#include "bihc/errors.hpp"

namespace bihc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEightPi = 8.0 * std::numbers::pi;

struct Sample {
  Point2 P;     // c(t) − η
  Point2 d;     // c'(t)
  double r2;
  double lnr;
  double cross;  // (c − η)·c'^⊥
};

// Curve re-expanded about the closest-approach parameter t*, so that c(t) − η and
// (c − η)·c'^⊥ are formed from τ = t − t* without cancellation near the curve.
class CurveSampler {
 public:
  CurveSampler(const BezierCurve& curve, const Point2& eta) {
    const ClosestPoint cp = closest_point_on_curve(curve, eta);
    t0_ = cp.t;
    const std::vector<Point2> mono = monomial_coefficients(curve);
    const int m = static_cast<int>(mono.size()) - 1;
    a_.assign(m + 1, Point2::Zero());
    for (int i = 0; i <= m; ++i) {
      for (int j = i; j <= m; ++j) a_[i] += binomial(j, i) * std::pow(t0_, j - i) * mono[j];
    }
    a_[0] -= eta;
    // cross(τ) = Σ_p κ_p τ^p with a_i·a_i^⊥ = 0 dropped exactly.
    kappa_.assign(2 * m, 0.0);
    for (int i = 0; i <= m; ++i) {
      for (int j = 1; j <= m; ++j) {
        if (i == j) continue;
        kappa_[i + j - 1] += j * a_[i].dot(perp(a_[j]));
      }
    }
  }
  double t_star() const { return t0_; }
  Sample operator()(double tau) const {
    Sample s;
    s.P = Point2::Zero();
    s.d = Point2::Zero();
    const int m = static_cast<int>(a_.size()) - 1;
    for (int i = m; i >= 1; --i) {
      s.P = s.P * tau + a_[i];
      s.d = s.d * tau + i * a_[i];
    }
    s.P = s.P * tau + a_[0];
    s.r2 = s.P.squaredNorm();
    s.lnr = 0.5 * std::log(s.r2);
    s.cross = 0.0;
    for (int p = static_cast<int>(kappa_.size()) - 1; p >= 0; --p) s.cross = s.cross * tau + kappa_[p];
    return s;
  }

 private:
  double t0_ = 0.0;
  std::vector<Point2> a_;
  std::vector<double> kappa_;
};

int effective_order(Family f, int basis_order) {
  switch (f) {
    case Family::Psi:
    case Family::PsiTilde:
    case Family::PsiWeighted:
      return basis_order - 1;
    default:
      return basis_order;
  }
}

double basis_value(int order, int index, double t) {
  if (order < 0 || index < 0 || index > order) throw DomainError("quadrature: basis index out of range");
  double v = binomial(order, index);
  for (int i = 0; i < index; ++i) v *= t;
  for (int i = index; i < order; ++i) v *= 1.0 - t;
  return v;
}

double integrand(Family f, const Sample& s, double t, int index, int order) {
  switch (f) {
    case Family::F2:
      return std::pow(t, index) / s.r2;
    case Family::F4:
      return std::pow(t, index) / (s.r2 * s.r2);
    case Family::LogMoment:
      return std::pow(t, index) * s.lnr;
    default:
      break;
  }
  const double B = basis_value(order, index, t);
  const double s2 = s.d.squaredNorm();
  switch (f) {
    case Family::Phi:
    case Family::PhiK:
      return s.cross / (kTwoPi * s.r2) * B;
    case Family::Psi:
      return -s.lnr / kTwoPi * B;
    case Family::PhiTilde:
      return s.cross * (2.0 * s.lnr - 1.0) / kEightPi * B;
    case Family::PsiTilde:
      return -s.r2 * (s.lnr - 1.0) / kEightPi * s2 * B;
    case Family::PsiWeighted:
      return -s.lnr / kTwoPi * s2 * B;
    default:
      return 0.0;
  }
}

Point2 gradient_integrand(Family f, const Sample& s, double t, int index, int order) {
  const double B = basis_value(order, index, t);
  const double s2 = s.d.squaredNorm();
  const Point2 dcross(-s.d.y(), s.d.x());
  switch (f) {
    case Family::Phi:
    case Family::PhiK:
      return (dcross / s.r2 + 2.0 * s.cross * s.P / (s.r2 * s.r2)) * B / kTwoPi;
    case Family::Psi:
      return s.P / s.r2 * B / kTwoPi;
    case Family::PhiTilde:
      return (dcross * (2.0 * s.lnr - 1.0) - 2.0 * s.cross * s.P / s.r2) * B / kEightPi;
    case Family::PsiTilde:
      return s.P * (2.0 * s.lnr - 1.0) * s2 * B / kEightPi;
    case Family::PsiWeighted:
      return s.P / s.r2 * s2 * B / kTwoPi;
    default:
      throw DomainError("quadrature_gradient: family has no gradient");
  }
}

// Breakpoints in τ = t − t*, graded by powers of two away from τ = 0.
std::vector<double> breakpoints(const CurveSampler& sampler) {
  const double t0 = sampler.t_star();
  const Sample at = sampler(0.0);
  const double speed = std::max(at.d.norm(), 1e-300);
  const double rho = std::max(std::sqrt(at.r2) / speed, 1e-15);
  const double lo = -t0, hi = 1.0 - t0;
  std::vector<double> pts{lo, hi};
  if (lo < 0.0 && hi > 0.0) pts.push_back(0.0);
  for (double h = rho; h < 1.0; h *= 2.0) {
    if (-h > lo) pts.push_back(-h);
    if (h < hi) pts.push_back(h);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

double kronrod(const auto& f, double a, double b, double* l1 = nullptr) {
  double e = 0.0;
  return GK::integrate(f, a, b, 0, 0.0, &e, l1);
}

// Bisection accepted once the two halves agree with the parent value. The
// embedded Gauss estimate is far too pessimistic for these peaked kernels.
template <class F>
double adaptive(F& f, double a, double b, double whole, unsigned depth, double abs_tol, double rel_tol,
                double* err) {
  const double mid = 0.5 * (a + b);
  const double left = kronrod(f, a, mid);
  const double right = kronrod(f, mid, b);
  const double halves = left + right;
  const double diff = std::abs(halves - whole);
  if (depth == 0 || diff <= std::max(abs_tol, rel_tol * std::abs(halves))) {
    *err += diff;
    return halves;
  }
  return adaptive(f, a, mid, left, depth - 1, 0.5 * abs_tol, rel_tol, err) +
         adaptive(f, mid, b, right, depth - 1, 0.5 * abs_tol, rel_tol, err);
}

template <class F>
QuadratureResult integrate_pieces(const std::vector<double>& pts, F&& f, const QuadratureSettings& qs) {
  const std::size_t pieces = pts.size() - 1;
  std::vector<double> whole(pieces);
  double l1 = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) {
    double piece_l1 = 0.0;
    whole[i] = kronrod(f, pts[i], pts[i + 1], &piece_l1);
    l1 += piece_l1;
  }
  QuadratureResult out;
  const double abs_tol = qs.tolerance * l1 / static_cast<double>(pieces);
  for (std::size_t i = 0; i < pieces; ++i) {
    out.value += adaptive(f, pts[i], pts[i + 1], whole[i], qs.max_depth, abs_tol, qs.tolerance, &out.error_estimate);
  }
  out.converged = out.error_estimate <= 10.0 * qs.tolerance * l1 || out.error_estimate <= 1e-15;
  return out;
}

}  // namespace

QuadratureResult quadrature_oracle(Family family, const BezierCurve& curve, const Point2& eta,
                                   int index, int basis_order, const QuadratureSettings& settings) {
  if (curve.order() < 1) throw DomainError("quadrature: curve order must be ≥ 1");
  const CurveSampler sampler(curve, eta);
  const int order = effective_order(family, basis_order);
  auto f = [&](double tau) { return integrand(family, sampler(tau), sampler.t_star() + tau, index, order); };
  return integrate_pieces(breakpoints(sampler), f, settings);
}

Point2 quadrature_gradient(Family family, const BezierCurve& curve, const Point2& eta, int index,
                           int basis_order, const QuadratureSettings& settings) {
  if (curve.order() < 1) throw DomainError("quadrature: curve order must be ≥ 1");
  const CurveSampler sampler(curve, eta);
  const int order = effective_order(family, basis_order);
  const auto pts = breakpoints(sampler);
  Point2 g;
  for (int c = 0; c < 2; ++c) {
    auto f = [&](double tau) {
      return gradient_integrand(family, sampler(tau), sampler.t_star() + tau, index, order)[c];
    };
    g[c] = integrate_pieces(pts, f, settings).value;
  }
  return g;
}

BasisIntegrals quadrature_basis_integrals(const BezierCurve& curve, const Point2& eta, int n, int k,
                                          const QuadratureSettings& settings) {
  BasisIntegrals b = BasisIntegrals::zero(n, k);
  auto q = [&](Family f, int j, int order) {
    return quadrature_oracle(f, curve, eta, j, order, settings).value;
  };
  for (int j = 0; j <= n; ++j) b.phi[j] = q(Family::Phi, j, n);
  for (int j = 0; j < n; ++j) b.psi[j] = q(Family::Psi, j, n);
  for (int j = 0; j <= k; ++j) {
    b.phit[j] = q(Family::PhiTilde, j, k);
    b.phik[j] = q(Family::PhiK, j, k);
  }
  for (int j = 0; j < k; ++j) {
    b.psit[j] = q(Family::PsiTilde, j, k);
    b.psiw[j] = q(Family::PsiWeighted, j, k);
  }
  return b;
}

BasisGradients quadrature_basis_gradients(const BezierCurve& curve, const Point2& eta, int n, int k,
                                          const QuadratureSettings& settings) {
  BasisGradients g{BasisIntegrals::zero(n, k), BasisIntegrals::zero(n, k)};
  auto put = [&](Eigen::VectorXd BasisIntegrals::*field, Family f, int j, int order) {
    const Point2 v = quadrature_gradient(f, curve, eta, j, order, settings);
    (g.dx.*field)[j] = v.x();
    (g.dy.*field)[j] = v.y();
  };
  for (int j = 0; j <= n; ++j) put(&BasisIntegrals::phi, Family::Phi, j, n);
  for (int j = 0; j < n; ++j) put(&BasisIntegrals::psi, Family::Psi, j, n);
  for (int j = 0; j <= k; ++j) {
    put(&BasisIntegrals::phit, Family::PhiTilde, j, k);
    put(&BasisIntegrals::phik, Family::PhiK, j, k);
  }
  for (int j = 0; j < k; ++j) {
    put(&BasisIntegrals::psit, Family::PsiTilde, j, k);
    put(&BasisIntegrals::psiw, Family::PsiWeighted, j, k);
  }
  return g;
}

}  // namespace bihc

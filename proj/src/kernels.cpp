#include "bihc/kernels.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>

#include "bihc/errors.hpp"
#include "bihc/quadrature.hpp"

namespace bihc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEightPi = 8.0 * std::numbers::pi;

std::vector<Poly> bernstein_polys(int order) {
  std::vector<Poly> out;
  if (order < 0) return out;
  out.reserve(order + 1);
  for (int j = 0; j <= order; ++j) out.emplace_back(bernstein_monomial(order, j));
  return out;
}

using real = long double;

// Residue machinery for one (curve, η) pair: the roots of q(t) = c(t) − η
// (complexified) and the moment tables built from them, in extended precision.
class KernelContext {
 public:
  KernelContext(const BezierCurve& curve, const Point2& eta, const KernelSettings& settings)
      : settings_(settings) {
    const int m = curve.order();
    std::vector<real> cx(m + 1, 0.0L), cy(m + 1, 0.0L);
    for (int i = 0; i <= m; ++i) {
      for (int j = 0; j <= i; ++j) {
        const real w = static_cast<real>(binomial(m, i)) * static_cast<real>(binomial(i, j)) *
                       (((i - j) % 2 == 0) ? 1.0L : -1.0L);
        cx[i] += w * static_cast<real>(curve.control_point(j).x());
        cy[i] += w * static_cast<real>(curve.control_point(j).y());
      }
    }
    cx[0] -= static_cast<real>(eta.x());
    cy[0] -= static_cast<real>(eta.y());
    px = Poly(cx);
    py = Poly(cy);
    std::vector<real> dxs(std::max(m, 1), 0.0L), dys(std::max(m, 1), 0.0L);
    for (int i = 1; i <= m; ++i) {
      dxs[i - 1] = i * cx[i];
      dys[i - 1] = i * cy[i];
    }
    dx = Poly(dxs);
    dy = Poly(dys);
    cross = px * dy - py * dx;
    dot = px * dx + py * dy;
    speed2 = dx * dx + dy * dy;
    r2 = px * px + py * py;
    const real ex = static_cast<real>(curve.back().x()) - static_cast<real>(eta.x());
    const real ey = static_cast<real>(curve.back().y()) - static_cast<real>(eta.y());
    log_end_ = 0.5L * std::log(ex * ex + ey * ey);
    if (!std::isfinite(static_cast<double>(log_end_))) {
      throw ProximityError("kernel: evaluation point coincides with a curve endpoint", 0.0);
    }

    // Effective degree: geometry scale excludes the η-shifted constant term.
    real scale = 0.0L;
    for (int i = 1; i <= m; ++i) scale = std::max(scale, std::hypot(cx[i], cy[i]));
    std::vector<cplxl> q;
    for (int i = 0; i <= m; ++i) q.emplace_back(cx[i], cy[i]);
    while (q.size() > 1 && std::abs(q.back()) <= static_cast<real>(settings_.degree_trim) * scale) q.pop_back();
    if (q.size() < 2) throw DomainError("kernel: degenerate (constant) curve");
    std::vector<cplx> qd;
    for (const auto& v : q) qd.emplace_back(static_cast<double>(v.real()), static_cast<double>(v.imag()));
    const RootSet qroots = complex_roots(ComplexPoly(qd), settings_.cluster_tolerance);

    double nearest = std::numeric_limits<double>::infinity();
    std::vector<cplx> all_d;
    std::vector<cplxl> all;
    for (const auto& r : qroots.roots) {
      nearest = std::min(nearest, distance_to_unit_segment(r.value));
      cplxl z(r.value.real(), r.value.imag());
      if (r.multiplicity == 1) z = polish(q, z);
      for (int k = 0; k < r.multiplicity; ++k) {
        all.push_back(z);
        all.push_back(std::conj(z));
        all_d.push_back(r.value);
        all_d.push_back(std::conj(r.value));
      }
    }
    if (nearest < settings_.proximity_threshold) {
      throw ProximityError("kernel: evaluation point too close to the curve", nearest);
    }
    // Cluster in double, average the extended values within each cluster.
    const RootSet clusters = cluster_roots(all_d, settings_.cluster_tolerance);
    roots_.assign(clusters.roots.size(), 0.0L);
    mult2_.assign(clusters.roots.size(), 0);
    for (std::size_t i = 0; i < all.size(); ++i) {
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < clusters.roots.size(); ++c) {
        const double d = std::abs(clusters.roots[c].value - all_d[i]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      roots_[best] += all[i];
      mult2_[best] += 1;
    }
    for (std::size_t c = 0; c < roots_.size(); ++c) roots_[c] /= static_cast<real>(mult2_[c]);
    mult4_ = mult2_;
    for (auto& v : mult4_) v *= 2;
    lead2_ = std::norm(q.back());
    lead4_ = lead2_ * lead2_;
  }

  // Tables are filled once up to the requested maxima.
  void prepare(int f2_max, int f4_max, int log_max) {
    const int need_f2 = std::max(f2_max, log_max + 1 + dot.degree());
    if (need_f2 >= 0) f2_ = real_moments(rational_moments_extended(need_f2, roots_, mult2_, lead2_));
    if (f4_max >= 0) f4_ = real_moments(rational_moments_extended(f4_max, roots_, mult4_, lead4_));
    lg_.assign(std::max(log_max, -1) + 1, 0.0L);
    for (int j = 0; j <= log_max; ++j) {
      real s = 0.0L;
      for (int h = 0; h <= dot.degree(); ++h) s += dot[h] * f2_[j + 1 + h];
      lg_[j] = (log_end_ - s) / static_cast<real>(j + 1);
    }
  }

  double I2(const Poly& p) const { return dot_table(p, f2_); }
  double I4(const Poly& p) const { return dot_table(p, f4_); }
  double IL(const Poly& p) const { return dot_table(p, lg_); }
  static double I0(const Poly& p) {
    real s = 0.0L;
    for (int h = 0; h <= p.degree(); ++h) s += p[h] / static_cast<real>(h + 1);
    return static_cast<double>(s);
  }
  // 2·IL − I0 and IL − I0 without rounding the intermediate terms.
  double IL_I0(const Poly& p, real a, real b) const {
    if (p.degree() >= static_cast<int>(lg_.size())) throw DomainError("kernel: moment table too short");
    real s = 0.0L;
    for (int h = 0; h <= p.degree(); ++h) s += p[h] * (a * lg_[h] + b / static_cast<real>(h + 1));
    return static_cast<double>(s);
  }

  double f2(int h) const { return static_cast<double>(f2_.at(h)); }
  double f4(int h) const { return static_cast<double>(f4_.at(h)); }
  double lg(int h) const { return static_cast<double>(lg_.at(h)); }
  double max_imaginary() const { return max_imag_; }

  Poly px, py, dx, dy, cross, dot, speed2, r2;

 private:
  static cplxl polish(const std::vector<cplxl>& q, cplxl z) {
    for (int it = 0; it < 3; ++it) {
      cplxl p = 0.0L, dp = 0.0L;
      for (auto c = q.rbegin(); c != q.rend(); ++c) {
        dp = dp * z + p;
        p = p * z + *c;
      }
      if (std::abs(dp) == 0.0L) break;
      const cplxl next = z - p / dp;
      if (!std::isfinite(static_cast<double>(std::abs(next)))) break;
      z = next;
    }
    return z;
  }

  std::vector<real> real_moments(const std::vector<cplxl>& m) {
    std::vector<real> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      const real re = m[i].real();
      const double rel = static_cast<double>(std::abs(m[i].imag()) / std::max(std::abs(re), 1e-300L));
      max_imag_ = std::max(max_imag_, rel);
      out[i] = re;
    }
    if (max_imag_ > settings_.imaginary_tolerance) {
      throw NumericalError("kernel: residue sum has a large imaginary part", max_imag_);
    }
    return out;
  }

  static double dot_table(const Poly& p, const std::vector<real>& table) {
    if (p.degree() >= static_cast<int>(table.size())) {
      throw DomainError("kernel: moment table too short");
    }
    real s = 0.0L;
    for (int h = 0; h <= p.degree(); ++h) s += p[h] * table[h];
    return static_cast<double>(s);
  }

  KernelSettings settings_;
  std::vector<cplxl> roots_;
  std::vector<int> mult2_, mult4_;
  real lead2_ = 1.0L, lead4_ = 1.0L;
  real log_end_ = 0.0L;
  double max_imag_ = 0.0;
  std::vector<real> f2_, f4_, lg_;
};

void check_orders(const BezierCurve& curve, int n, int k) {
  if (curve.order() < 1) throw DomainError("basis integrals: curve order must be ≥ 1");
  if (n < 1 || k < 1) throw DomainError("basis integrals: orders must be ≥ 1");
}

}  // namespace

FundamentalKernels fundamental_kernels(const Point2& xi, const Point2& eta) {
  const Point2 d = xi - eta;
  const double r2 = d.squaredNorm();
  if (r2 == 0.0) throw SingularityError("fundamental_kernels: coincident points");
  const double lnr = 0.5 * std::log(r2);
  FundamentalKernels k;
  k.g1 = -lnr / kTwoPi;
  k.g2 = -r2 * (lnr - 1.0) / kEightPi;
  k.grad_g1 = d / (kTwoPi * r2);
  k.grad_g2 = d * (2.0 * lnr - 1.0) / kEightPi;
  return k;
}

MomentPair F2_F4(int h, const BezierCurve& curve, const Point2& eta, const KernelSettings& settings) {
  if (h < 0) throw DomainError("F2_F4: negative moment index");
  KernelContext ctx(curve, eta, settings);
  ctx.prepare(h, h, -1);
  return {ctx.f2(h), ctx.f4(h)};
}

double log_moment_integral(int j, const BezierCurve& curve, const Point2& eta,
                           const KernelSettings& settings) {
  if (j < 0) throw DomainError("log_moment_integral: negative index");
  KernelContext ctx(curve, eta, settings);
  ctx.prepare(-1, -1, j);
  return ctx.lg(j);
}

double moment_imaginary_residue(const BezierCurve& curve, const Point2& eta, int h_max,
                                const KernelSettings& settings) {
  KernelSettings loose = settings;
  loose.imaginary_tolerance = std::numeric_limits<double>::infinity();
  KernelContext ctx(curve, eta, loose);
  ctx.prepare(h_max, h_max, -1);
  return ctx.max_imaginary();
}

BasisIntegrals BasisIntegrals::zero(int n, int k) {
  BasisIntegrals b;
  b.phi = Eigen::VectorXd::Zero(n + 1);
  b.psi = Eigen::VectorXd::Zero(n);
  b.phit = Eigen::VectorXd::Zero(k + 1);
  b.psit = Eigen::VectorXd::Zero(k);
  b.phik = Eigen::VectorXd::Zero(k + 1);
  b.psiw = Eigen::VectorXd::Zero(k);
  return b;
}

bool BasisIntegrals::all_finite() const {
  return phi.allFinite() && psi.allFinite() && phit.allFinite() && psit.allFinite() &&
         phik.allFinite() && psiw.allFinite();
}

BasisIntegrals basis_integrals(const BezierCurve& curve, const Point2& eta, int n, int k,
                               const KernelSettings& settings) {
  check_orders(curve, n, k);
  KernelContext ctx(curve, eta, settings);
  const int m = curve.order();
  const int cross_deg = ctx.cross.degree();
  const int weight_deg = ctx.r2.degree() + ctx.speed2.degree();
  const int log_max = std::max({cross_deg + k, weight_deg + k - 1, n - 1, ctx.speed2.degree() + k - 1});
  ctx.prepare(cross_deg + std::max(n, k), -1, log_max);
  (void)m;

  const auto Bn = bernstein_polys(n);
  const auto Bn1 = bernstein_polys(n - 1);
  const auto Bk = bernstein_polys(k);
  const auto Bk1 = bernstein_polys(k - 1);
  const Poly r2s2 = ctx.r2 * ctx.speed2;

  BasisIntegrals out = BasisIntegrals::zero(n, k);
  for (int j = 0; j <= n; ++j) out.phi[j] = ctx.I2(ctx.cross * Bn[j]) / kTwoPi;
  for (int j = 0; j < n; ++j) out.psi[j] = -ctx.IL(Bn1[j]) / kTwoPi;
  for (int j = 0; j <= k; ++j) {
    const Poly p = ctx.cross * Bk[j];
    out.phik[j] = ctx.I2(p) / kTwoPi;
    out.phit[j] = ctx.IL_I0(p, 2.0L, -1.0L) / kEightPi;
  }
  for (int j = 0; j < k; ++j) {
    const Poly p = r2s2 * Bk1[j];
    out.psit[j] = -ctx.IL_I0(p, 1.0L, -1.0L) / kEightPi;
    out.psiw[j] = -ctx.IL(ctx.speed2 * Bk1[j]) / kTwoPi;
  }
  return out;
}

BasisGradients basis_integral_gradients(const BezierCurve& curve, const Point2& eta, int n, int k,
                                        const KernelSettings& settings) {
  check_orders(curve, n, k);
  KernelContext ctx(curve, eta, settings);
  const int m = curve.order();
  const int nk = std::max(n, k);
  // Highest numerators: cross·P·B (F4 and F2), P·‖c'‖²·B (log and F2).
  const int f4_max = ctx.cross.degree() + m + nk;
  const int log_max = std::max(ctx.cross.degree() + k, m + ctx.speed2.degree() + k - 1);
  const int f2_max = std::max({f4_max, m + n - 1, m + ctx.speed2.degree() + k - 1});
  ctx.prepare(f2_max, f4_max, log_max);

  const auto Bn = bernstein_polys(n);
  const auto Bn1 = bernstein_polys(n - 1);
  const auto Bk = bernstein_polys(k);
  const auto Bk1 = bernstein_polys(k - 1);

  BasisGradients g{BasisIntegrals::zero(n, k), BasisIntegrals::zero(n, k)};
  for (int comp = 0; comp < 2; ++comp) {
    BasisIntegrals& out = comp == 0 ? g.dx : g.dy;
    const Poly& P = comp == 0 ? ctx.px : ctx.py;
    // ∂(c−η)·c'^⊥ / ∂η = −c'^⊥ = (−c'_y, c'_x)
    const Poly dcross = comp == 0 ? -ctx.dy : ctx.dx;
    const Poly crossP = ctx.cross * P;
    const Poly Ps2 = P * ctx.speed2;
    for (int j = 0; j <= n; ++j) {
      out.phi[j] = (ctx.I2(dcross * Bn[j]) + 2.0 * ctx.I4(crossP * Bn[j])) / kTwoPi;
    }
    for (int j = 0; j < n; ++j) out.psi[j] = ctx.I2(P * Bn1[j]) / kTwoPi;
    for (int j = 0; j <= k; ++j) {
      const Poly a = dcross * Bk[j];
      const Poly b = crossP * Bk[j];
      out.phik[j] = (ctx.I2(a) + 2.0 * ctx.I4(b)) / kTwoPi;
      out.phit[j] = (ctx.IL_I0(a, 2.0L, -1.0L) - 2.0 * ctx.I2(b)) / kEightPi;
    }
    for (int j = 0; j < k; ++j) {
      const Poly p = Ps2 * Bk1[j];
      out.psit[j] = ctx.IL_I0(p, 2.0L, -1.0L) / kEightPi;
      out.psiw[j] = ctx.I2(p) / kTwoPi;
    }
  }
  return g;
}

BasisIntegrals basis_integrals_robust(const BezierCurve& curve, const Point2& eta, int n, int k,
                                      const KernelSettings& settings, bool* used_fallback) {
  try {
    BasisIntegrals b = basis_integrals(curve, eta, n, k, settings);
    if (used_fallback) *used_fallback = false;
    return b;
  } catch (const ProximityError&) {
  } catch (const NumericalError&) {
  }
  if (used_fallback) *used_fallback = true;
  return quadrature_basis_integrals(curve, eta, n, k);
}

BasisGradients basis_integral_gradients_robust(const BezierCurve& curve, const Point2& eta, int n,
                                               int k, const KernelSettings& settings,
                                               bool* used_fallback) {
  try {
    BasisGradients g = basis_integral_gradients(curve, eta, n, k, settings);
    if (used_fallback) *used_fallback = false;
    return g;
  } catch (const ProximityError&) {
  } catch (const NumericalError&) {
  }
  if (used_fallback) *used_fallback = true;
  return quadrature_basis_gradients(curve, eta, n, k);
}

}  // namespace bihc

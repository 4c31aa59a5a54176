#include <cmath>

#include "bihc/bezier.hpp"
#include "bihc/errors.hpp"
#include "bihc/polynomial.hpp"

namespace bihc {

namespace {

using real = long double;

// Below this modulus the forward recursion g_h = w g_{h-1} + 1/h is used;
// above it the recursion is run backwards from a convergent series.
constexpr real kForwardRadius = 1.2L;
constexpr int kMaxSeriesTerms = 20000;

// Taylor coefficients T[h][n] = g_h^{(n)}(z) / n! for
// g_h(w) = w^h (log(1 − 1/w) + Σ_{k=1}^h 1/(k w^k)), h = 0..h_max, n = 0..order-1.
std::vector<std::vector<cplxl>> taylor_g(cplxl z, int h_max, int order) {
  std::vector<std::vector<cplxl>> T(h_max + 1, std::vector<cplxl>(order));
  if (std::abs(z) < kForwardRadius) {
    T[0][0] = std::log(1.0L - 1.0L / z);
    for (int n = 1; n < order; ++n) {
      const real sign = (n % 2 == 1) ? 1.0L : -1.0L;
      T[0][n] = sign / n * (std::pow(z - 1.0L, -n) - std::pow(z, -n));
    }
    for (int h = 1; h <= h_max; ++h) {
      T[h][0] = z * T[h - 1][0] + 1.0L / static_cast<real>(h);
      for (int n = 1; n < order; ++n) T[h][n] = z * T[h - 1][n] + T[h - 1][n - 1];
    }
    return T;
  }

  // g_H(w) = −Σ_{j≥1} w^{−j} / (H + j), valid for |w| > 1.
  const cplxl u = 1.0L / z;
  for (int n = 0; n < order; ++n) {
    cplxl sum = 0.0L;
    cplxl upow = std::pow(u, n + 1);  // u^{j+n} at j = 1
    real binom = 1.0L;                // C(j+n−1, n) at j = 1
    for (int j = 1; j <= kMaxSeriesTerms; ++j) {
      const cplxl term = binom * upow / static_cast<real>(h_max + j);
      sum += term;
      if (j > n + 4 && std::abs(term) <= 1e-21L * std::abs(sum)) break;
      upow *= u;
      binom = binom * (j + n) / j;
    }
    const real sign = (n % 2 == 0) ? -1.0L : 1.0L;
    T[h_max][n] = sign * sum;
  }
  for (int h = h_max; h >= 1; --h) {
    T[h - 1][0] = (T[h][0] - 1.0L / static_cast<real>(h)) / z;
    for (int n = 1; n < order; ++n) T[h - 1][n] = (T[h][n] - T[h - 1][n - 1]) / z;
  }
  return T;
}

// Taylor coefficients of Π_{j≠i} (z − z_j + ε)^{−q_j} around ε = 0.
std::vector<cplxl> taylor_others(const std::vector<cplxl>& roots, const std::vector<int>& mult,
                                 std::size_t i, int order) {
  std::vector<cplxl> acc(order, 0.0L);
  acc[0] = 1.0L;
  const cplxl z = roots[i];
  std::vector<cplxl> factor(order);
  std::vector<cplxl> next(order);
  for (std::size_t j = 0; j < roots.size(); ++j) {
    if (j == i) continue;
    const cplxl inv = 1.0L / (z - roots[j]);
    const int q = mult[j];
    cplxl base = std::pow(inv, q);
    for (int n = 0; n < order; ++n) {
      const real sign = (n % 2 == 0) ? 1.0L : -1.0L;
      factor[n] = sign * static_cast<real>(binomial(q + n - 1, n)) * base;
      base *= inv;
    }
    for (int n = 0; n < order; ++n) {
      cplxl s = 0.0L;
      for (int a = 0; a <= n; ++a) s += acc[a] * factor[n - a];
      next[n] = s;
    }
    acc.swap(next);
  }
  return acc;
}

}  // namespace

std::vector<cplxl> rational_moments_extended(int h_max, const std::vector<cplxl>& roots,
                                             const std::vector<int>& multiplicity, cplxl leading) {
  if (h_max < 0) throw DomainError("rational_moments: negative moment index");
  if (roots.size() != multiplicity.size()) throw ContractError("rational_moments: size mismatch");
  std::vector<cplxl> out(h_max + 1, 0.0L);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const cplx zd(static_cast<double>(roots[i].real()), static_cast<double>(roots[i].imag()));
    const double dist = distance_to_unit_segment(zd);
    if (dist < 1e-12) throw ProximityError("rational_moments: pole on the integration segment", dist);
    const int q = multiplicity[i];
    const auto T = taylor_g(roots[i], h_max, q);
    const auto O = taylor_others(roots, multiplicity, i, q);
    for (int h = 0; h <= h_max; ++h) {
      cplxl res = 0.0L;
      for (int a = 0; a < q; ++a) res += T[h][a] * O[q - 1 - a];
      out[h] += res;
    }
  }
  for (auto& v : out) v /= leading;
  return out;
}

std::vector<cplx> rational_moments(int h_max, const RootSet& roots, cplx leading) {
  std::vector<cplxl> values;
  std::vector<int> mult;
  for (const auto& r : roots.roots) {
    values.emplace_back(r.value.real(), r.value.imag());
    mult.push_back(r.multiplicity);
  }
  const auto ext = rational_moments_extended(h_max, values, mult, cplxl(leading.real(), leading.imag()));
  std::vector<cplx> out;
  out.reserve(ext.size());
  for (const auto& v : ext) out.emplace_back(static_cast<double>(v.real()), static_cast<double>(v.imag()));
  return out;
}

cplx rational_moment_integral(int h, const RootSet& roots, cplx leading) {
  return rational_moments(h, roots, leading)[h];
}

}  // namespace bihc

#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace bihc {

using cplx = std::complex<double>;
using cplxl = std::complex<long double>;

/// Real polynomial in monomial form, ascending degree, with extended-precision
/// coefficients (products of Bernstein and curve polynomials cancel heavily).
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<long double> coefficients) : c_(std::move(coefficients)) {}
  explicit Poly(const std::vector<double>& coefficients) : c_(coefficients.begin(), coefficients.end()) {}
  Poly(std::initializer_list<double> coefficients) : c_(coefficients.begin(), coefficients.end()) {}

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool empty() const { return c_.empty(); }
  const std::vector<long double>& coefficients() const { return c_; }
  long double operator[](int i) const { return i < static_cast<int>(c_.size()) ? c_[i] : 0.0L; }
  double operator()(double t) const;

  Poly operator*(const Poly& o) const;
  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(long double s) const;
  Poly operator-() const { return *this * -1.0L; }

 private:
  std::vector<long double> c_;
};

/// Complex polynomial in monomial form, ascending degree.
class ComplexPoly {
 public:
  ComplexPoly() = default;
  /// Throws DomainError when the leading coefficient vanishes (|a_n| ≤ 1e-300).
  explicit ComplexPoly(std::vector<cplx> coefficients);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<cplx>& coefficients() const { return c_; }
  cplx leading() const { return c_.back(); }
  cplx operator()(cplx z) const;
  /// p(z) and p'(z) in one Horner pass.
  void eval_with_derivative(cplx z, cplx& p, cplx& dp) const;
  double max_coefficient_magnitude() const;

  /// Drops leading coefficients below rel_tol × max magnitude.
  static ComplexPoly trimmed(std::vector<cplx> coefficients, double rel_tol);

 private:
  std::vector<cplx> c_;
};

struct Root {
  cplx value;
  int multiplicity = 1;
};

struct RootSet {
  std::vector<Root> roots;
  int degree() const;
};

/// Aberth–Ehrlich simultaneous iteration with Newton polishing; roots closer
/// than cluster_tol are merged (mean value, summed multiplicity).
RootSet complex_roots(const ComplexPoly& p, double cluster_tol);

/// Merge roots closer than cluster_tol (single linkage).
RootSet cluster_roots(const std::vector<cplx>& values, double cluster_tol);

/// Distance from z to the real segment [0, 1].
double distance_to_unit_segment(cplx z);

/// ∫₀¹ t^h / p(t) dt for p(t) = leading · Π (t − ω_i)^{q_i}, by residues of
/// w^h (log(1 − 1/w) + Σ_{k=1}^h 1/(k w^k)) / p(w).
cplx rational_moment_integral(int h, const RootSet& roots, cplx leading);

/// All moments h = 0..h_max in one pass (shares the per-root Taylor data).
std::vector<cplx> rational_moments(int h_max, const RootSet& roots, cplx leading);

/// Extended-precision variant: roots[i] has multiplicity[i].
std::vector<cplxl> rational_moments_extended(int h_max, const std::vector<cplxl>& roots,
                                             const std::vector<int>& multiplicity, cplxl leading);

}  // namespace bihc

#include "bihc/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "bihc/errors.hpp"

namespace bihc {

double Poly::operator()(double t) const {
  long double v = 0.0L;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * t + *it;
  return static_cast<double>(v);
}

Poly Poly::operator*(const Poly& o) const {
  if (c_.empty() || o.c_.empty()) return Poly();
  std::vector<long double> r(c_.size() + o.c_.size() - 1, 0.0L);
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (c_[i] == 0.0L) continue;
    for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  }
  return Poly(std::move(r));
}

Poly Poly::operator+(const Poly& o) const {
  std::vector<long double> r(std::max(c_.size(), o.c_.size()), 0.0L);
  for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return Poly(std::move(r));
}

Poly Poly::operator-(const Poly& o) const { return *this + o * -1.0L; }

Poly Poly::operator*(long double s) const {
  std::vector<long double> r = c_;
  for (auto& v : r) v *= s;
  return Poly(std::move(r));
}

ComplexPoly::ComplexPoly(std::vector<cplx> coefficients) : c_(std::move(coefficients)) {
  if (c_.empty() || std::abs(c_.back()) <= 1e-300) {
    throw DomainError("ComplexPoly: vanishing leading coefficient");
  }
}

cplx ComplexPoly::operator()(cplx z) const {
  cplx v = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * z + *it;
  return v;
}

void ComplexPoly::eval_with_derivative(cplx z, cplx& p, cplx& dp) const {
  p = 0.0;
  dp = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
    dp = dp * z + p;
    p = p * z + *it;
  }
}

double ComplexPoly::max_coefficient_magnitude() const {
  double m = 0.0;
  for (const auto& v : c_) m = std::max(m, std::abs(v));
  return m;
}

ComplexPoly ComplexPoly::trimmed(std::vector<cplx> coefficients, double rel_tol) {
  double scale = 0.0;
  for (const auto& v : coefficients) scale = std::max(scale, std::abs(v));
  while (coefficients.size() > 1 && std::abs(coefficients.back()) <= rel_tol * scale) {
    coefficients.pop_back();
  }
  return ComplexPoly(std::move(coefficients));
}

int RootSet::degree() const {
  int d = 0;
  for (const auto& r : roots) d += r.multiplicity;
  return d;
}

double distance_to_unit_segment(cplx z) {
  const double x = std::clamp(z.real(), 0.0, 1.0);
  return std::abs(z - cplx(x, 0.0));
}

}  // namespace bihc

#ifndef DELAYSTEER_EXP_MATH_HPP
#define DELAYSTEER_EXP_MATH_HPP

#include <cmath>
#include <complex>
#include <vector>

namespace delaysteer {

using cd = std::complex<double>;

// ∫_l^r e^{mu s} ds, stable for mu -> 0.
inline cd exp_integral(cd mu, double l, double r) {
  const cd x = mu * (r - l);
  if (std::abs(x) < 1e-4) {
    // e^{mu l} (r-l) (1 + x/2 + x^2/6 + x^3/24 + x^4/120)
    const cd series = 1.0 + x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)));
    return std::exp(mu * l) * (r - l) * series;
  }
  return (std::exp(mu * r) - std::exp(mu * l)) / mu;
}

// Monomial moments E_m = ∫_l^r s^m e^{lambda s} ds for m = 0..deg.
// Small |lambda|: Taylor series; otherwise the upward recurrence
// E_m = (r^m e^{lr} - l^m e^{ll} - m E_{m-1}) / lambda.
inline std::vector<cd> exp_monomial_integrals(cd lambda, double l, double r, int deg) {
  std::vector<cd> out(static_cast<size_t>(deg) + 1);
  const double scale = std::max(std::abs(l), std::abs(r));
  if (std::abs(lambda) * std::max(1.0, scale) < 0.25) {
    for (int m = 0; m <= deg; ++m) {
      cd acc = 0.0;
      cd pow_lam = 1.0;
      double fact = 1.0;
      double rp = std::pow(r, m + 1), lp = std::pow(l, m + 1);
      for (int p = 0; p < 60; ++p) {
        const cd term = pow_lam / fact * (rp - lp) / static_cast<double>(m + p + 1);
        acc += term;
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(acc))) break;
        pow_lam *= lambda;
        fact *= static_cast<double>(p + 1);
        rp *= r;
        lp *= l;
      }
      out[static_cast<size_t>(m)] = acc;
    }
    return out;
  }
  const cd er = std::exp(lambda * r), el = std::exp(lambda * l);
  out[0] = (er - el) / lambda;
  double rp = 1.0, lp = 1.0;
  for (int m = 1; m <= deg; ++m) {
    rp *= r;
    lp *= l;
    out[static_cast<size_t>(m)] = (rp * er - lp * el - static_cast<double>(m) * out[static_cast<size_t>(m - 1)]) / lambda;
  }
  return out;
}

// ∫_l^r e^{lambda s} p(s) ds with p given by its coefficients (ascending).
inline cd exp_poly_integral(cd lambda, const std::vector<double>& coeffs, double l, double r) {
  if (coeffs.empty()) return 0.0;
  const auto mom = exp_monomial_integrals(lambda, l, r, static_cast<int>(coeffs.size()) - 1);
  cd acc = 0.0;
  for (size_t m = 0; m < coeffs.size(); ++m) acc += coeffs[m] * mom[m];
  return acc;
}

struct ExpTerm {
  cd exponent;
  cd coeff;
};

// Finite sum of complex exponentials c e^{mu t} with closed-form calculus.
struct ExpSum {
  std::vector<ExpTerm> terms;

  bool empty() const { return terms.empty(); }

  cd eval(double t) const {
    cd acc = 0.0;
    for (const auto& tm : terms) acc += tm.coeff * std::exp(tm.exponent * t);
    return acc;
  }

  // ∫_l^r e^{lambda t} u(t) dt
  cd moment(cd lambda, double l, double r) const {
    cd acc = 0.0;
    for (const auto& tm : terms) acc += tm.coeff * exp_integral(lambda + tm.exponent, l, r);
    return acc;
  }

  cd integral(double l, double r) const { return moment(0.0, l, r); }

  // L2 norm of u over [l, r]: sqrt(Σ_ij c_i conj(c_j) ∫ e^{(mu_i + conj(mu_j)) t}).
  double l2_norm(double l, double r) const {
    cd acc = 0.0;
    for (const auto& a : terms)
      for (const auto& b : terms)
        acc += a.coeff * std::conj(b.coeff) * exp_integral(a.exponent + std::conj(b.exponent), l, r);
    return std::sqrt(std::max(0.0, acc.real()));
  }

  // u(t) -> scale * u(T - t)
  ExpSum time_reversed(double T, cd scale = 1.0) const {
    ExpSum out;
    out.terms.reserve(terms.size());
    for (const auto& tm : terms)
      out.terms.push_back({-tm.exponent, scale * tm.coeff * std::exp(tm.exponent * T)});
    return out;
  }

  ExpSum operator-(const ExpSum& other) const {
    ExpSum out = *this;
    out.terms.reserve(terms.size() + other.terms.size());
    for (const auto& tm : other.terms) out.terms.push_back({tm.exponent, -tm.coeff});
    return out;
  }
};

}  // namespace delaysteer

#endif  // DELAYSTEER_EXP_MATH_HPP

#ifndef DELAYSTEER_LAMBERT_HPP
#define DELAYSTEER_LAMBERT_HPP

#include <cmath>
#include <complex>

#include "delaysteer/errors.hpp"

namespace delaysteer {

// k-th zero of g(λ) = -λ + a e^{-λ} (equivalently λ e^λ = a), a > 0.
// k = 0 is the unique real zero; zeros are ordered by imaginary part and
// come in conjugate pairs, lambert_branch(a, -k) = conj(lambert_branch(a, k)).
// Halley iteration from the asymptotic seed ln a + 2πik - ln(ln a + 2πik).
inline std::complex<double> lambert_branch(double a, int k, double tol = 1e-12, int max_iter = 80) {
  using cd = std::complex<double>;
  if (!(a > 0.0)) throw std::invalid_argument("lambert_branch requires a > 0");

  cd lam;
  if (k == 0) {
    // real seed; W0(a) <= log1p(a) for a > 0 and Newton is monotone from it
    lam = std::log1p(a);
  } else {
    const cd L = std::log(a) + cd(0.0, 2.0 * M_PI * static_cast<double>(k));
    lam = L - std::log(L);
  }

  for (int it = 0; it < max_iter; ++it) {
    const cd e = std::exp(lam);
    const cd f = lam * e - a;
    if (std::abs(f) <= tol * (1.0 + std::abs(a))) {
      if (k == 0) lam = cd(lam.real(), 0.0);
      return lam;
    }
    const cd fp = (lam + 1.0) * e;
    const cd fpp = (lam + 2.0) * e;
    const cd denom = 2.0 * fp * fp - f * fpp;
    cd step;
    if (std::abs(denom) > 0.0)
      step = 2.0 * f * fp / denom;  // Halley
    else
      step = f / fp;  // Newton fallback
    lam -= step;
  }
  throw NonConvergence("lambert_branch: Halley iteration did not converge");
}

}  // namespace delaysteer

#endif  // DELAYSTEER_LAMBERT_HPP

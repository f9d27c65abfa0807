#ifndef DELAYSTEER_BIORTHO_HPP
#define DELAYSTEER_BIORTHO_HPP

#include <cmath>
#include <complex>
#include <vector>

#include "delaysteer/errors.hpp"
#include "delaysteer/exp_math.hpp"

namespace delaysteer {

// Exponential sum restricted to disjoint-or-overlapping intervals, zero
// elsewhere.  Everything (moments, norms) stays in closed form.
struct ExpPiece {
  double l = 0.0, r = 0.0;
  ExpSum sum;
};

struct PiecewiseExp {
  std::vector<ExpPiece> pieces;

  cd eval(double t) const {
    cd acc = 0.0;
    for (const auto& p : pieces)
      if (t >= p.l && t <= p.r) acc += p.sum.eval(t);
    return acc;
  }

  // ∫ e^{lambda t} f(t) dt over the whole line (pieces carry the support)
  cd moment(cd lambda) const {
    cd acc = 0.0;
    for (const auto& p : pieces) acc += p.sum.moment(lambda, p.l, p.r);
    return acc;
  }

  // ∫ e^{lambda t} conj(f(t)) dt
  cd moment_conj(cd lambda) const {
    cd acc = 0.0;
    for (const auto& p : pieces)
      for (const auto& tm : p.sum.terms)
        acc += std::conj(tm.coeff) * exp_integral(lambda + std::conj(tm.exponent), p.l, p.r);
    return acc;
  }

  double l2_norm() const {
    cd acc = 0.0;
    for (const auto& a : pieces)
      for (const auto& b : pieces) {
        const double l = std::max(a.l, b.l), r = std::min(a.r, b.r);
        if (l >= r) continue;
        for (const auto& ta : a.sum.terms)
          for (const auto& tb : b.sum.terms)
            acc += ta.coeff * std::conj(tb.coeff) * exp_integral(ta.exponent + std::conj(tb.exponent), l, r);
      }
    return std::sqrt(std::max(0.0, acc.real()));
  }

  PiecewiseExp conjugated_scaled(cd scale) const {
    PiecewiseExp out;
    out.pieces.reserve(pieces.size());
    for (const auto& p : pieces) {
      ExpPiece q{p.l, p.r, {}};
      q.sum.terms.reserve(p.sum.terms.size());
      for (const auto& tm : p.sum.terms)
        q.sum.terms.push_back({std::conj(tm.exponent), scale * std::conj(tm.coeff)});
      out.pieces.push_back(std::move(q));
    }
    return out;
  }

  void add(const PiecewiseExp& other) {
    for (const auto& p : other.pieces) {
      bool merged = false;
      for (auto& q : pieces) {
        if (q.l == p.l && q.r == p.r) {
          q.sum.terms.insert(q.sum.terms.end(), p.sum.terms.begin(), p.sum.terms.end());
          merged = true;
          break;
        }
      }
      if (!merged) pieces.push_back(p);
    }
  }
};

// One member of the explicit biorthogonal family: supported on
// [0,1] ∪ [T-1,T], built from the difference of two branch exponentials.
struct BiorthoFn {
  cd lambda_s, lambda_s1;
  double T = 0.0;
  PiecewiseExp f;

  cd eval(double t) const { return f.eval(t); }
  // <e^{mu t}, f> = ∫_0^T e^{mu t} conj(f(t)) dt
  cd inner_exp(cd mu) const { return f.moment_conj(mu); }
  double l2_norm() const { return f.l2_norm(); }
};

// Explicit biorthogonal family for consecutive zeros of one branch
// lambda e^lambda = a.  `lambdas` holds m+1 consecutive zeros; the result has
// m members, member i biorthogonal to exp(lambdas[i] t) and annihilating all
// other branch exponentials.  Each member is beta1 ftilde on [0,1] plus
// beta2 ftilde(t-T+1) on [T-1,T], the betas solved from the two defining
// conditions at lambdas[i] and lambdas[i+1].
inline std::vector<BiorthoFn> biortho_explicit(const std::vector<cd>& lambdas, double T) {
  if (T <= 1.0) throw std::invalid_argument("biortho_explicit requires T > 1");
  if (lambdas.size() < 2) throw std::invalid_argument("biortho_explicit needs at least 2 eigenvalues");
  std::vector<BiorthoFn> out;
  out.reserve(lambdas.size() - 1);
  for (size_t s = 0; s + 1 < lambdas.size(); ++s) {
    const cd ls = lambdas[s], ls1 = lambdas[s + 1];
    // gamma_i = conj(beta_i) from  gamma1 A_k + gamma2 B_k = delta_{ks},  k = s, s+1
    auto A = [&](cd lk) { return exp_integral(lk - ls, 0.0, 1.0) - exp_integral(lk - ls1, 0.0, 1.0); };
    auto B = [&](cd lk) {
      // ∫_{T-1}^{T} e^{lk t} (e^{-ls (t-T+1)} - e^{-ls1 (t-T+1)}) dt
      return std::exp(ls * (T - 1.0)) * exp_integral(lk - ls, T - 1.0, T) -
             std::exp(ls1 * (T - 1.0)) * exp_integral(lk - ls1, T - 1.0, T);
    };
    const cd a11 = A(ls), a12 = B(ls), a21 = A(ls1), a22 = B(ls1);
    const cd det = a11 * a22 - a12 * a21;
    const double scale = std::max({std::abs(a11) * std::abs(a22), std::abs(a12) * std::abs(a21), 1e-300});
    if (std::abs(det) < 1e-14 * scale)
      throw SingularPairSystem("biortho_explicit: defining 2x2 system is singular (coincident eigenvalues?)");
    const cd gamma1 = a22 / det;
    const cd gamma2 = -a21 / det;
    const cd beta1 = std::conj(gamma1), beta2 = std::conj(gamma2);

    BiorthoFn fn;
    fn.lambda_s = ls;
    fn.lambda_s1 = ls1;
    fn.T = T;
    ExpPiece head{0.0, 1.0, {}};
    head.sum.terms = {{-std::conj(ls), beta1}, {-std::conj(ls1), -beta1}};
    // ftilde(t-T+1) = e^{conj(ls)(T-1)} e^{-conj(ls) t} - ...
    ExpPiece tail{T - 1.0, T, {}};
    tail.sum.terms = {{-std::conj(ls), beta2 * std::exp(std::conj(ls) * (T - 1.0))},
                      {-std::conj(ls1), -beta2 * std::exp(std::conj(ls1) * (T - 1.0))}};
    fn.f.pieces = {head, tail};
    out.push_back(std::move(fn));
  }
  return out;
}

}  // namespace delaysteer

#endif  // DELAYSTEER_BIORTHO_HPP

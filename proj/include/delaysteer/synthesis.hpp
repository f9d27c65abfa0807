#ifndef DELAYSTEER_SYNTHESIS_HPP
#define DELAYSTEER_SYNTHESIS_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <complex>
#include <vector>

#include "delaysteer/analysis.hpp"
#include "delaysteer/biortho.hpp"
#include "delaysteer/control_signal.hpp"
#include "delaysteer/model.hpp"
#include "delaysteer/spectral.hpp"

namespace delaysteer {

constexpr double kGramCutoff = 1e-12;
constexpr int kDefaultTruncation = 21;

// Feedback + basis change bringing a retarded completable system to
// A1 = diag(a_i), b = (1,...,1)^T.
struct CanonicalForm {
  Eigen::RowVectorXd gain_p1;   // u = v + p1 z(t-1)
  Eigen::MatrixXd basis_T;
  Eigen::VectorXd a_values;
};

inline CanonicalForm canonicalize(const DelaySystem& sys, const Eigen::VectorXd* desired = nullptr) {
  sys.validate();
  if (!sys.is_retarded()) throw std::invalid_argument("canonicalize requires a retarded system (A_minus1 = 0)");
  const int n = sys.n;
  if (!pbh_pair_controllable(sys.A1, sys.b).controllable)
    throw NotControllablePair("canonicalize: pair (A1, b) is not controllable");

  Eigen::VectorXd a(n);
  if (desired) {
    if (desired->size() != n) throw DimensionMismatch("canonicalize: desired spectrum size mismatch");
    a = *desired;
  } else {
    for (int i = 0; i < n; ++i) a(i) = static_cast<double>(i + 1);
  }

  // Ackermann single-input placement
  Eigen::MatrixXd ctrb(n, n);
  Eigen::VectorXd col = sys.b;
  for (int i = 0; i < n; ++i) {
    ctrb.col(i) = col;
    col = sys.A1 * col;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ctrb, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(n - 1) <= 0.0 || sv(0) / sv(n - 1) > 1e12)
    throw PlacementIllConditioned("canonicalize: controllability matrix condition number above 1e12");
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) q = q * (sys.A1 - a(i) * Eigen::MatrixXd::Identity(n, n));
  const Eigen::RowVectorXd last = Eigen::RowVectorXd::Unit(n, n - 1);
  const Eigen::RowVectorXd p1 = -(last * svd.solve(q));

  const Eigen::MatrixXd acl = sys.A1 + sys.b * p1;
  Eigen::EigenSolver<Eigen::MatrixXd> es(acl);
  // match each desired a_i to a computed eigenpair; a is real and distinct
  Eigen::MatrixXd V(n, n);
  std::vector<bool> used(n, false);
  for (int i = 0; i < n; ++i) {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(es.eigenvalues()(j) - cd(a(i), 0.0));
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    if (best < 0 || bd > 1e-6 * (1.0 + std::abs(a(i))))
      throw PlacementIllConditioned("canonicalize: placed spectrum does not match the requested values");
    used[best] = true;
    V.col(i) = es.eigenvectors().col(best).real();
    if (V.col(i).norm() < 1e-12) throw PlacementIllConditioned("canonicalize: degenerate eigenvector");
  }
  const Eigen::VectorXd w = V.fullPivLu().solve(sys.b);
  for (int i = 0; i < n; ++i)
    if (std::abs(w(i)) < 1e-12)
      throw PlacementIllConditioned("canonicalize: b has a zero component in the eigenbasis");
  const Eigen::MatrixXd T = V * w.asDiagonal();
  return {p1, T, a};
}

// Moment problem s_k = ∫_0^T e^{λ_k τ} v(τ) dτ over a conjugate-closed
// simple eigenvalue set.
struct MomentProblem {
  std::vector<cd> eigs;
  std::vector<cd> targets;
  double horizon_T = 0.0;
  int state_dim = 0;

  void validate() const {
    if (eigs.size() != targets.size()) throw DimensionMismatch("moment problem: eigs/targets size mismatch");
    for (size_t i = 0; i < eigs.size(); ++i)
      for (size_t j = i + 1; j < eigs.size(); ++j)
        if (std::abs(eigs[i] - eigs[j]) < 1e-8)
          throw MultipleEigenvalue(eigs[i]);
  }
};

// Targets s_λ = e^{λT} <x0, ψ_λ> with ψ_λ normalized to <b, y_λ> = 1.
inline MomentProblem moment_targets(const DelaySystem& sys, const M2State& x0, double T,
                                    const std::vector<EigenPoint>& eigs) {
  sys.validate();
  x0.validate();
  MomentProblem mp;
  mp.horizon_T = T;
  mp.state_dim = sys.n;
  for (const auto& e : eigs) {
    if (e.multiplicity > 1) throw MultipleEigenvalue(e.lambda);
    const AdjointEigenvector psi = psi_eigenvector(sys, e.lambda, /*normalize=*/true);
    const cd s = std::exp(e.lambda * T) * psi_inner_state(sys, x0, psi);
    mp.eigs.push_back(e.lambda);
    mp.targets.push_back(s);
  }
  // conjugate closure: pair entries, symmetrize targets, append missing partners
  const size_t m0 = mp.eigs.size();
  for (size_t i = 0; i < m0; ++i) {
    if (mp.eigs[i].imag() <= 1e-12) {
      mp.targets[i] = cd(mp.targets[i].real(), 0.0);
      mp.eigs[i] = cd(mp.eigs[i].real(), mp.eigs[i].imag());
      continue;
    }
    bool paired = false;
    for (size_t j = 0; j < mp.eigs.size(); ++j) {
      if (i == j) continue;
      if (std::abs(std::conj(mp.eigs[i]) - mp.eigs[j]) < 1e-9 * (1.0 + std::abs(mp.eigs[i]))) {
        const cd s = 0.5 * (mp.targets[i] + std::conj(mp.targets[j]));
        mp.targets[i] = s;
        mp.targets[j] = std::conj(s);
        mp.eigs[j] = std::conj(mp.eigs[i]);
        paired = true;
        break;
      }
    }
    if (!paired) {
      mp.eigs.push_back(std::conj(mp.eigs[i]));
      mp.targets.push_back(std::conj(mp.targets[i]));
    }
  }
  mp.validate();
  return mp;
}

// Minimum-norm solution in span{e^{conj(λ_m) t}}: Gram solve
// G_{km} = ∫_0^T e^{(λ_k + conj(λ_m)) τ} dτ, truncated SVD below 1e-12 σ_max.
inline ControlSignal min_norm_control(const MomentProblem& mp) {
  mp.validate();
  if (mp.horizon_T <= static_cast<double>(mp.state_dim))
    throw HorizonTooShort("min_norm_control: horizon T must exceed the state dimension");
  const int m = static_cast<int>(mp.eigs.size());
  Eigen::MatrixXcd G(m, m);
  Eigen::VectorXcd s(m);
  for (int k = 0; k < m; ++k) {
    s(k) = mp.targets[static_cast<size_t>(k)];
    for (int j = 0; j < m; ++j)
      G(k, j) = exp_integral(mp.eigs[static_cast<size_t>(k)] + std::conj(mp.eigs[static_cast<size_t>(j)]), 0.0,
                             mp.horizon_T);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cut = kGramCutoff * sv(0);
  int rank = 0;
  Eigen::VectorXcd z = svd.matrixU().adjoint() * s;
  for (int i = 0; i < m; ++i) {
    if (sv(i) > cut) {
      z(i) /= sv(i);
      ++rank;
    } else {
      z(i) = 0.0;
    }
  }
  if (rank == 0) throw IllConditioned("min_norm_control: Gram matrix numerically zero (effective rank 0)");
  const Eigen::VectorXcd c = svd.matrixV() * z;

  ControlSignal sig;
  sig.T = mp.horizon_T;
  sig.has_exps = true;
  sig.effective_rank = rank;
  sig.eigenvalues_used = mp.eigs;
  for (int j = 0; j < m; ++j) sig.exps.terms.push_back({std::conj(mp.eigs[static_cast<size_t>(j)]), c(j)});
  double res = 0.0;
  for (int k = 0; k < m; ++k)
    res = std::max(res, std::abs(sig.exps.moment(mp.eigs[static_cast<size_t>(k)], 0.0, mp.horizon_T) - s(k)));
  sig.residual = res;
  fill_samples(sig);
  return sig;
}

// Truncated series u(t) = Σ_k s_k conj(f_k(t)) with f_k biorthogonal to the
// exponentials (validated to 1e-8 before use).
inline ControlSignal series_control(const MomentProblem& mp, const std::vector<BiorthoFn>& family) {
  mp.validate();
  if (family.size() != mp.eigs.size())
    throw DimensionMismatch("series_control: family size must match the eigenvalue set");
  const size_t m = mp.eigs.size();
  for (size_t s = 0; s < m; ++s)
    for (size_t k = 0; k < m; ++k) {
      const cd v = family[s].inner_exp(mp.eigs[k]);
      const cd want = (k == s) ? 1.0 : 0.0;
      if (std::abs(v - want) > 1e-8)
        throw std::invalid_argument("series_control: family is not biorthogonal to the eigenvalue set");
    }

  // accumulate by increasing |Im λ| and watch the partial-sum norms
  std::vector<size_t> order(m);
  for (size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::abs(mp.eigs[a].imag()) < std::abs(mp.eigs[b].imag());
  });
  ControlSignal sig;
  sig.T = mp.horizon_T;
  sig.has_piecewise = true;
  sig.eigenvalues_used = mp.eigs;
  std::vector<double> norms;
  for (size_t idx : order) {
    sig.piecewise.add(family[idx].f.conjugated_scaled(mp.targets[idx]));
    norms.push_back(sig.piecewise.l2_norm());
  }
  if (norms.size() >= 6) {
    bool diverging = true;
    for (size_t i = norms.size() - 5; i < norms.size(); ++i)
      if (!(norms[i] > 10.0 * norms[i - 1])) diverging = false;
    if (diverging) throw TruncationDiverging("series_control: partial-sum norms grow by factor > 10");
  }
  double res = 0.0;
  for (size_t k = 0; k < m; ++k)
    res = std::max(res, std::abs(sig.piecewise.moment(mp.eigs[k]) - mp.targets[k]));
  sig.residual = res;
  fill_samples(sig);
  return sig;
}

namespace detail {

inline std::optional<std::vector<double>> branch_values(const DelaySystem& sys) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A1);
  std::vector<double> a;
  for (int i = 0; i < sys.n; ++i) {
    const cd mu = es.eigenvalues()(i);
    if (std::abs(mu.imag()) > 1e-10 || mu.real() <= 1e-10) return std::nullopt;
    a.push_back(mu.real());
  }
  std::sort(a.begin(), a.end());
  for (size_t i = 0; i + 1 < a.size(); ++i)
    if (a[i + 1] - a[i] < 1e-8) return std::nullopt;
  return a;
}

}  // namespace detail

// Picks the truncation_K smallest-|Im| eigenvalues per branch (conjugate
// closed), growing the window adaptively until enough are found.
inline std::vector<EigenPoint> select_modal_eigenvalues(const DelaySystem& sys, int truncation_K,
                                                        SeedGrid* seeds_out = nullptr) {
  if (truncation_K < 1) throw std::invalid_argument("truncation must be positive");
  const auto branches = detail::branch_values(sys);
  const int kmax = truncation_K / 2;  // K = 2 kmax + 1 per branch
  int target = truncation_K;
  Window w{};
  std::optional<SeedGrid> seeds;
  if (branches) {
    target = truncation_K * static_cast<int>(branches->size());
    seeds = build_seeds(*branches, -kmax - 1, kmax + 1);
    double re_lo = 1e300, re_hi = -1e300, im_top = 0.0, im_next = 1e300;
    for (const auto& s : seeds->seeds) {
      if (std::abs(s.k) <= kmax) {
        re_lo = std::min(re_lo, s.lambda.real());
        re_hi = std::max(re_hi, s.lambda.real());
        im_top = std::max(im_top, s.lambda.imag());
      } else if (s.k == kmax + 1) {
        im_next = std::min(im_next, s.lambda.imag());
      }
    }
    const double im_cut = 0.5 * (im_top + im_next);
    w = {re_lo - 1.5, re_hi + 1.5, -im_cut, im_cut};
  } else {
    const double h = M_PI * (truncation_K + 2);
    w = {-std::log(4.0 * h) - 3.0, 2.0 + sys.A1.norm() + sys.A0.norm(), -h, h};
  }

  for (int attempt = 0; attempt < 5; ++attempt) {
    std::vector<EigenPoint> eigs;
    try {
      eigs = find_eigenvalues(sys, w, seeds ? &*seeds : nullptr);
    } catch (const BoundaryZero&) {
      w.re_min -= 0.13;
      w.re_max += 0.07;
      w.im_min -= 0.11;
      w.im_max += 0.11;
      continue;
    }
    if (static_cast<int>(eigs.size()) >= target) {
      std::sort(eigs.begin(), eigs.end(), [](const EigenPoint& a, const EigenPoint& b) {
        if (std::abs(a.lambda.imag()) != std::abs(b.lambda.imag()))
          return std::abs(a.lambda.imag()) < std::abs(b.lambda.imag());
        return a.lambda.imag() < b.lambda.imag();
      });
      std::vector<EigenPoint> pick(eigs.begin(), eigs.begin() + target);
      // close under conjugation if the cut split a pair
      while (!pick.empty()) {
        const cd last = pick.back().lambda;
        if (std::abs(last.imag()) < 1e-12) break;
        bool has_partner = false;
        for (const auto& p : pick)
          if (std::abs(std::conj(last) - p.lambda) < 1e-9 * (1.0 + std::abs(last))) has_partner = true;
        if (has_partner) break;
        pick.pop_back();
      }
      if (seeds_out && seeds) *seeds_out = *seeds;
      return pick;
    }
    w.re_min -= 1.5;
    w.im_min *= 1.6;
    w.im_max *= 1.6;
  }
  throw NonConvergence("select_modal_eigenvalues: could not collect the requested eigenvalue count");
}

// Full pipeline: locate eigenvalues, build targets, solve the moment problem
// minimum-norm, and return the steering control u(t) = -v(T - t).
inline ControlSignal synthesize(const DelaySystem& sys, const M2State& x0, double T, int truncation_K) {
  sys.validate();
  x0.validate();
  if (!sys.is_retarded()) throw std::invalid_argument("synthesize requires a retarded system (A_minus1 = 0)");
  if (!(sys.A2.support_left > -1.0) || !(sys.A3.support_left > -1.0))
    throw std::invalid_argument("synthesize: kernel support condition violated");
  if (T <= static_cast<double>(sys.n))
    throw HorizonTooShort("synthesize: horizon T must exceed the state dimension n");
  if (!pbh_pair_controllable(sys.A1, sys.b).controllable)
    throw NotControllablePair("synthesize: pair (A1, b) is not controllable");

  std::vector<EigenPoint> eigs = select_modal_eigenvalues(sys, truncation_K);
  std::vector<cd> clustered;
  for (const auto& e : eigs)
    if (e.multiplicity > 1) clustered.push_back(e.lambda);
  if (!clustered.empty()) {
    std::string msg = "synthesize: spectrum is not simple at";
    for (const auto& c : clustered)
      msg += " (" + std::to_string(c.real()) + "," + std::to_string(c.imag()) + ")";
    msg += "; a random feedback perturbation of magnitude 1e-3 may split the cluster (opt-in)";
    throw SimpleSpectrumViolated(msg);
  }

  const MomentProblem mp = moment_targets(sys, x0, T, eigs);
  const ControlSignal v = min_norm_control(mp);

  ControlSignal u;
  u.T = T;
  u.has_exps = true;
  u.exps = v.exps.time_reversed(T, -1.0);
  u.residual = v.residual;
  u.effective_rank = v.effective_rank;
  u.eigenvalues_used = v.eigenvalues_used;
  fill_samples(u);
  return u;
}

}  // namespace delaysteer

#endif  // DELAYSTEER_SYNTHESIS_HPP

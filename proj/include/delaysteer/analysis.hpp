#ifndef DELAYSTEER_ANALYSIS_HPP
#define DELAYSTEER_ANALYSIS_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <optional>
#include <random>
#include <vector>

#include "delaysteer/model.hpp"
#include "delaysteer/spectral.hpp"

namespace delaysteer {

constexpr double kRankTol = 1e-10;

inline int numeric_rank(const Eigen::MatrixXcd& m, double rel_tol = kRankTol) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cut = rel_tol * sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

struct PbhResult {
  bool controllable = true;
  std::optional<cd> witness;  // eigenvalue where the rank drops
};

// Hautus test: rank(-μI + M ; b) = n at every eigenvalue μ of M.
// With exclude_zero the eigenvalue μ = 0 is skipped (condition on C \ {0}).
inline PbhResult pbh_pair_controllable(const Eigen::MatrixXd& M, const Eigen::VectorXd& b,
                                       bool exclude_zero = false) {
  const int n = static_cast<int>(M.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  for (int i = 0; i < n; ++i) {
    const cd mu = es.eigenvalues()(i);
    if (exclude_zero && std::abs(mu) < 1e-10) continue;
    Eigen::MatrixXcd aug(n, n + 1);
    aug.leftCols(n) = -mu * Eigen::MatrixXcd::Identity(n, n) + M.cast<cd>();
    aug.col(n) = b.cast<cd>();
    if (numeric_rank(aug) < n) return {false, mu};
  }
  return {true, std::nullopt};
}

// det(A1 + λ A_{-1}) not identically zero: a degree-<=n polynomial vanishing
// at n+1 distinct sample points is the zero polynomial.
inline bool pencil_nonsingular(const Eigen::MatrixXd& A1, const Eigen::MatrixXd& A_minus1,
                               uint64_t seed = 0x5eed) {
  if (A1.rows() != A1.cols() || A_minus1.rows() != A_minus1.cols() || A1.rows() != A_minus1.rows())
    throw DimensionMismatch("pencil_nonsingular: square matrices of equal size required");
  const int n = static_cast<int>(A1.rows());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  std::vector<double> pts;
  while (static_cast<int>(pts.size()) < n + 1) {
    const double x = dist(rng);
    bool fresh = true;
    for (double p : pts)
      if (std::abs(p - x) < 1e-6) fresh = false;
    if (fresh) pts.push_back(x);
  }
  for (double lam : pts) {
    const Eigen::MatrixXd m = A1 + lam * A_minus1;
    const double scale = std::max(1.0, std::pow(m.norm(), n));
    if (std::abs(m.determinant()) > 1e-10 * scale) return true;
  }
  return false;
}

enum class CompletableStatus { ProvablyFalse, Found, NotFound };

struct CompletableResult {
  CompletableStatus status = CompletableStatus::NotFound;
  Eigen::RowVectorXd p1;
  Eigen::RowVectorXd p_minus1;
  bool provably_false() const { return status == CompletableStatus::ProvablyFalse; }
  bool found() const { return status == CompletableStatus::Found; }
};

// Searches feedback rows p1, p_{-1} making the pencil
// (A1 + b p1) + λ (A_{-1} + b p_{-1}) nonsingular.  For A_{-1} = 0 the
// necessary condition rank[A1, b] = n short-circuits to a provable no.
inline CompletableResult completable(const DelaySystem& sys, uint64_t seed = 0x5eed) {
  const int n = sys.n;
  CompletableResult res;
  res.p1 = Eigen::RowVectorXd::Zero(n);
  res.p_minus1 = Eigen::RowVectorXd::Zero(n);

  if (sys.A_minus1.isZero(0.0)) {
    Eigen::MatrixXcd aug(n, n + 1);
    aug.leftCols(n) = sys.A1.cast<cd>();
    aug.col(n) = sys.b.cast<cd>();
    if (numeric_rank(aug) < n) {
      res.status = CompletableStatus::ProvablyFalse;
      return res;
    }
  }

  auto try_gains = [&](const Eigen::RowVectorXd& p1, const Eigen::RowVectorXd& pm1) {
    if (pencil_nonsingular(sys.A1 + sys.b * p1, sys.A_minus1 + sys.b * pm1, seed)) {
      res.status = CompletableStatus::Found;
      res.p1 = p1;
      res.p_minus1 = pm1;
      return true;
    }
    return false;
  };

  std::vector<Eigen::RowVectorXd> candidates{Eigen::RowVectorXd::Zero(n)};
  for (int i = 0; i < n; ++i) candidates.push_back(Eigen::RowVectorXd::Unit(n, i));
  for (const auto& p1 : candidates)
    for (const auto& pm1 : candidates)
      if (try_gains(p1, pm1)) return res;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::RowVectorXd p1(n), pm1(n);
    for (int i = 0; i < n; ++i) {
      p1(i) = dist(rng);
      pm1(i) = dist(rng);
    }
    if (try_gains(p1, pm1)) return res;
  }
  res.status = CompletableStatus::NotFound;
  return res;
}

struct SpectralControllabilityResult {
  bool controllable_in_window = true;
  std::optional<cd> witness;
};

// Condition rank(Δ(λ); b) = n at each supplied eigenvalue (in-window only).
inline SpectralControllabilityResult spectral_controllability(const DelaySystem& sys,
                                                              const std::vector<EigenPoint>& eigs) {
  const int n = sys.n;
  for (const auto& e : eigs) {
    Eigen::MatrixXcd aug(n, n + 1);
    aug.leftCols(n) = eval_delta(sys, e.lambda);
    aug.col(n) = sys.b.cast<cd>();
    if (numeric_rank(aug) < n) return {false, e.lambda};
  }
  return {true, std::nullopt};
}

enum class TriState { Yes, No, Undetermined };

inline const char* to_string(TriState t) {
  switch (t) {
    case TriState::Yes: return "yes";
    case TriState::No: return "no";
    default: return "undetermined";
  }
}

struct ClassificationReport {
  Window window{};
  bool spectrally_controllable_in_window = false;
  std::optional<cd> spectral_witness;
  bool cond_A1_all_mu = false;      // rank(-μI + A_{-1}; b) = n for all μ
  bool cond_A1_nonzero_mu = false;  // same for μ != 0
  bool complete = false;            // pencil A1 + λ A_{-1} nonsingular
  TriState completable = TriState::Undetermined;
  Eigen::RowVectorXd completable_p1, completable_p_minus1;
  bool pair_A1_b_controllable = false;
  bool retarded = false;
  bool support_condition = false;
  TriState exactly_null_controllable = TriState::Undetermined;
  TriState completely_stabilizable = TriState::Undetermined;
  std::vector<EigenPoint> eigenvalues;
};

inline ClassificationReport classify(const DelaySystem& sys, const Window& w, uint64_t seed = 0x5eed) {
  sys.validate();
  ClassificationReport rep;
  rep.window = w;
  rep.eigenvalues = find_eigenvalues(sys, w);

  const auto sc = spectral_controllability(sys, rep.eigenvalues);
  rep.spectrally_controllable_in_window = sc.controllable_in_window;
  rep.spectral_witness = sc.witness;

  rep.cond_A1_all_mu = pbh_pair_controllable(sys.A_minus1, sys.b, false).controllable;
  rep.cond_A1_nonzero_mu = pbh_pair_controllable(sys.A_minus1, sys.b, true).controllable;
  rep.complete = pencil_nonsingular(sys.A1, sys.A_minus1, seed);

  const auto comp = completable(sys, seed);
  rep.completable = comp.provably_false() ? TriState::No
                    : comp.found()        ? TriState::Yes
                                          : TriState::Undetermined;
  rep.completable_p1 = comp.p1;
  rep.completable_p_minus1 = comp.p_minus1;

  rep.pair_A1_b_controllable = pbh_pair_controllable(sys.A1, sys.b, false).controllable;
  rep.retarded = sys.is_retarded();
  rep.support_condition = sys.A2.support_left > -1.0 && sys.A3.support_left > -1.0;

  // spectral controllability at an in-window eigenvalue is necessary, so a
  // witness settles both verdicts; a clean window plus the structural
  // hypotheses verifies the retarded steering theorem
  if (!rep.spectrally_controllable_in_window) {
    rep.exactly_null_controllable = TriState::No;
    rep.completely_stabilizable = TriState::No;
  } else {
    rep.completely_stabilizable = rep.cond_A1_nonzero_mu ? TriState::Yes : TriState::No;
    if (rep.retarded && rep.support_condition && rep.pair_A1_b_controllable)
      rep.exactly_null_controllable = TriState::Yes;
    else
      rep.exactly_null_controllable = TriState::Undetermined;
  }
  return rep;
}

}  // namespace delaysteer

#endif  // DELAYSTEER_ANALYSIS_HPP

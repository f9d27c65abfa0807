#ifndef DELAYSTEER_MODEL_HPP
#define DELAYSTEER_MODEL_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <vector>

#include "delaysteer/errors.hpp"
#include "delaysteer/exp_math.hpp"
#include "delaysteer/matrix_kernel.hpp"

namespace delaysteer {

constexpr int kDefaultGridPerUnit = 256;
constexpr double kKernelRankTol = 1e-8;

// Single-input linear time-delay system with unit delay,
//   ż(t) - A_{-1} ż(t-1) = A1 z(t-1) + A0 z(t)
//                        + ∫_{-1}^0 [A2(θ) ż(t+θ) + A3(θ) z(t+θ)] dθ + b u(t).
struct DelaySystem {
  int n = 0;
  Eigen::MatrixXd A_minus1;
  Eigen::MatrixXd A1;
  Eigen::MatrixXd A0;
  MatrixKernel A2;
  MatrixKernel A3;
  Eigen::VectorXd b;

  void validate() const {
    if (n < 1) throw std::invalid_argument("state dimension must be positive");
    auto check = [&](const Eigen::MatrixXd& m, const char* name) {
      if (m.rows() != n || m.cols() != n) throw DimensionMismatch(std::string(name) + " is not n x n");
      if (!m.allFinite()) throw std::invalid_argument(std::string(name) + " has non-finite entries");
    };
    check(A_minus1, "A_minus1");
    check(A1, "A1");
    check(A0, "A0");
    if (b.size() != n) throw DimensionMismatch("b is not an n-vector");
    if (!b.allFinite()) throw std::invalid_argument("b has non-finite entries");
    A2.validate(n);
    A3.validate(n);
  }

  bool is_retarded() const { return A_minus1.isZero(0.0); }
};

// Initial state (y, z0(.)) with z0 sampled on a uniform grid over [-1, 0],
// columns ordered from τ = -1 to τ = 0.
struct M2State {
  Eigen::VectorXd y;
  Eigen::MatrixXd z0;

  int samples() const { return static_cast<int>(z0.cols()); }
  double grid_step() const { return 1.0 / static_cast<double>(samples() - 1); }

  void validate() const {
    if (z0.cols() < 2) throw std::invalid_argument("z0 needs at least 2 samples on [-1,0]");
    if (z0.rows() != y.size()) throw DimensionMismatch("y and z0 dimension mismatch");
    if (!y.allFinite() || !z0.allFinite()) throw std::invalid_argument("state has non-finite entries");
  }

  static M2State constant(const Eigen::VectorXd& y, const Eigen::VectorXd& z_const,
                          int samples = kDefaultGridPerUnit + 1) {
    M2State s;
    s.y = y;
    s.z0 = z_const.replicate(1, samples);
    return s;
  }

  static M2State zero(int n, int samples = kDefaultGridPerUnit + 1) {
    return constant(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), samples);
  }
};

// Complex-valued element of M2 on a sampled grid; both eigenvectors and
// plain states are inner-producted through this shape.
struct M2Cx {
  Eigen::VectorXcd y;
  Eigen::MatrixXcd f;  // columns from τ = -1 to τ = 0
};

inline M2Cx to_cx(const M2State& s) { return {s.y.cast<cd>(), s.z0.cast<cd>()}; }

namespace detail {

inline Eigen::MatrixXcd resample_columns(const Eigen::MatrixXcd& f, int target_cols) {
  if (f.cols() == target_cols) return f;
  Eigen::MatrixXcd out(f.rows(), target_cols);
  const double src_h = 1.0 / static_cast<double>(f.cols() - 1);
  for (int i = 0; i < target_cols; ++i) {
    const double tau = static_cast<double>(i) / static_cast<double>(target_cols - 1);
    const double pos = tau / src_h;
    const int j = std::min(static_cast<int>(pos), static_cast<int>(f.cols()) - 2);
    const double w = pos - j;
    out.col(i) = (1.0 - w) * f.col(j) + w * f.col(j + 1);
  }
  return out;
}

}  // namespace detail

// <x1, x2>_{M2} = y1 . conj(y2) + ∫_{-1}^0 f1(τ) . conj(f2(τ)) dτ, trapezoid on the
// grid; mismatched grids are resampled finer -> coarser by linear interpolation.
inline cd m2_inner(const M2Cx& x1, const M2Cx& x2) {
  if (x1.y.size() != x2.y.size()) throw DimensionMismatch("m2_inner: dimension mismatch");
  Eigen::MatrixXcd f1 = x1.f, f2 = x2.f;
  if (f1.cols() != f2.cols()) {
    const int m = static_cast<int>(std::min(f1.cols(), f2.cols()));
    f1 = detail::resample_columns(f1, m);
    f2 = detail::resample_columns(f2, m);
  }
  cd acc = x2.y.dot(x1.y);  // Σ y1_i conj(y2_i)
  const int m = static_cast<int>(f1.cols());
  const double h = 1.0 / static_cast<double>(m - 1);
  cd quad = 0.0;
  for (int i = 0; i < m; ++i) {
    const double w = (i == 0 || i == m - 1) ? 0.5 : 1.0;
    quad += w * f2.col(i).dot(f1.col(i));
  }
  return acc + h * quad;
}

inline cd m2_inner(const M2State& x1, const M2State& x2) { return m2_inner(to_cx(x1), to_cx(x2)); }

// Characteristic matrix
//   Δ(λ) = -λI + λ e^{-λ} A_{-1} + e^{-λ} A1 + A0 + ∫_{-1}^0 (λ e^{λs} A2(s) + e^{λs} A3(s)) ds.
inline Eigen::MatrixXcd eval_delta(const DelaySystem& sys, cd lambda) {
  const int n = sys.n;
  const cd eml = std::exp(-lambda);
  Eigen::MatrixXcd d = -lambda * Eigen::MatrixXcd::Identity(n, n);
  d += lambda * eml * sys.A_minus1.cast<cd>();
  d += eml * sys.A1.cast<cd>();
  d += sys.A0.cast<cd>();
  if (!sys.A2.is_zero()) d += lambda * sys.A2.exp_moment(lambda, n);
  if (!sys.A3.is_zero()) d += sys.A3.exp_moment(lambda, n);
  return d;
}

inline cd char_det(const DelaySystem& sys, cd lambda) { return eval_delta(sys, lambda).determinant(); }

// Adjoint eigenvector ψ_λ = (y_λ, tail(τ)) with
//   tail(τ) = [conj(λ) e^{-conj(λ)τ} I - A2*(τ)
//              + ∫_0^τ e^{conj(λ)(s-τ)} (A3*(s) + conj(λ) A2*(s)) ds] y_λ.
struct AdjointEigenvector {
  cd lambda;
  Eigen::VectorXcd y;
  Eigen::MatrixXcd tail;  // columns from τ = -1 to τ = 0
  double kernel_residual = 0.0;

  M2Cx as_m2() const { return {y, tail}; }
};

namespace detail {

// Smallest right singular vector and the relative smallest singular value.
inline std::pair<Eigen::VectorXcd, double> kernel_vector(const Eigen::MatrixXcd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  const double rel = (smax > 0.0) ? smin / smax : 0.0;
  return {svd.matrixV().col(sv.size() - 1), rel};
}

}  // namespace detail

// Evaluates the ψ_λ tail at an arbitrary τ in [-1, 0] (kernel integrals in
// closed form per piece).
inline Eigen::VectorXcd psi_tail_at(const DelaySystem& sys, cd lambda, const Eigen::VectorXcd& y, double tau) {
  const cd lb = std::conj(lambda);
  const int n = sys.n;
  Eigen::MatrixXcd m = lb * std::exp(-lb * tau) * Eigen::MatrixXcd::Identity(n, n);
  if (!sys.A2.is_zero() || !sys.A3.is_zero()) {
    const MatrixKernel a2t = sys.A2.transpose();
    const MatrixKernel a3t = sys.A3.transpose();
    m -= a2t.eval(tau, n).cast<cd>();
    // ∫_0^τ e^{lb (s-τ)} M(s) ds = -e^{-lb τ} ∫_τ^0 e^{lb s} M(s) ds
    Eigen::MatrixXcd integ = a3t.exp_moment(lb, tau, 0.0, n) + lb * a2t.exp_moment(lb, tau, 0.0, n);
    m -= std::exp(-lb * tau) * integ;
  }
  return m * y;
}

inline AdjointEigenvector psi_eigenvector(const DelaySystem& sys, cd lambda, bool normalize = true,
                                          int grid_per_unit = kDefaultGridPerUnit) {
  const Eigen::MatrixXcd delta = eval_delta(sys, lambda);
  auto [y, rel] = detail::kernel_vector(delta.adjoint());
  if (rel > kKernelRankTol) throw KernelEmpty("Delta(lambda)* has no numerical kernel at the given lambda");
  if (normalize) {
    const cd c = y.dot(sys.b.cast<cd>());  // <b, y>
    if (std::abs(c) < 1e-10) throw NotSpectrallyControllableAt(lambda);
    y /= std::conj(c);
  }
  AdjointEigenvector psi;
  psi.lambda = lambda;
  psi.y = y;
  psi.kernel_residual = rel;
  const int m = grid_per_unit + 1;
  psi.tail.resize(sys.n, m);
  for (int i = 0; i < m; ++i) {
    const double tau = -1.0 + static_cast<double>(i) / static_cast<double>(grid_per_unit);
    psi.tail.col(i) = psi_tail_at(sys, lambda, y, tau);
  }
  return psi;
}

// Right eigenvector φ_λ = ((I - e^λ A_{-1}) x_λ, e^{λτ} x_λ), x_λ in Ker Δ(λ).
inline M2Cx right_eigenvector(const DelaySystem& sys, cd lambda, int grid_per_unit = kDefaultGridPerUnit) {
  const Eigen::MatrixXcd delta = eval_delta(sys, lambda);
  auto [x, rel] = detail::kernel_vector(delta);
  if (rel > kKernelRankTol) throw KernelEmpty("Delta(lambda) has no numerical kernel at the given lambda");
  M2Cx phi;
  phi.y = (Eigen::MatrixXcd::Identity(sys.n, sys.n) - std::exp(lambda) * sys.A_minus1.cast<cd>()) * x;
  const int m = grid_per_unit + 1;
  phi.f.resize(sys.n, m);
  for (int i = 0; i < m; ++i) {
    const double tau = -1.0 + static_cast<double>(i) / static_cast<double>(grid_per_unit);
    phi.f.col(i) = std::exp(lambda * tau) * x;
  }
  return phi;
}

// <x0, ψ_λ> with the history integrated segment-by-segment by 4-point
// Gauss-Legendre against the analytic tail (z0 treated as piecewise linear).
// Tighter than the grid trapezoid; used where moment targets need it.
inline cd psi_inner_state(const DelaySystem& sys, const M2State& x0, const AdjointEigenvector& psi) {
  cd acc = psi.y.dot(x0.y.cast<cd>());
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                               0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                               0.3478548451374538};
  const int m = x0.samples();
  const double h = x0.grid_step();
  for (int i = 0; i + 1 < m; ++i) {
    const double l = -1.0 + i * h;
    for (int q = 0; q < 4; ++q) {
      const double tau = l + (gx[q] + 1.0) * 0.5 * h;
      const double w = (tau - l) / h;
      const Eigen::VectorXcd z = ((1.0 - w) * x0.z0.col(i) + w * x0.z0.col(i + 1)).cast<cd>();
      const Eigen::VectorXcd tail = psi_tail_at(sys, psi.lambda, psi.y, tau);
      acc += 0.5 * h * gw[q] * tail.dot(z);
    }
  }
  return acc;
}

}  // namespace delaysteer

#endif  // DELAYSTEER_MODEL_HPP

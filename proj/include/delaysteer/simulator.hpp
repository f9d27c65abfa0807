#ifndef DELAYSTEER_SIMULATOR_HPP
#define DELAYSTEER_SIMULATOR_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "delaysteer/control_signal.hpp"
#include "delaysteer/errors.hpp"
#include "delaysteer/model.hpp"

namespace delaysteer {

struct Grid {
  double dt = 1.0 / 512.0;
  double horizon = 1.0;

  int steps_per_unit() const {
    const double n = 1.0 / dt;
    const int ni = static_cast<int>(std::lround(n));
    if (ni < 1 || std::abs(n - ni) > 1e-9)
      throw IncompatibleGrid("grid: 1/dt must be a positive integer so t-1 lands on grid points");
    return ni;
  }
  int horizon_steps() const {
    const double m = horizon / dt;
    const int mi = static_cast<int>(std::lround(m));
    if (mi < 1 || std::abs(m - mi) > 1e-6)
      throw IncompatibleGrid("grid: horizon must be a positive multiple of dt");
    return mi;
  }
};

// Sampled solution on [-1, horizon]; column i holds z(-1 + i dt), the first
// steps_per_unit()+1 columns are the supplied history with z(0) = y.
struct Trajectory {
  Grid grid;
  Eigen::MatrixXd z;
  Eigen::VectorXd u;  // control samples on [0, horizon]
  int history_cols = 0;

  double time_at(int col) const { return -1.0 + col * grid.dt; }
  int col_at(double t) const { return static_cast<int>(std::lround((t + 1.0) / grid.dt)); }
};

// Method of steps with the trapezoidal rule.  The instantaneous A0 term is
// implicit (one small linear solve per step); delayed and distributed terms
// come from the stored path, with two corrector sweeps covering a kernel
// that touches θ = 0.  Neutral systems need a differentiable history and the
// allow_neutral flag.
inline Trajectory simulate(const DelaySystem& sys, const M2State& x0, const ControlSignal* u,
                           const Grid& grid, bool allow_neutral = false) {
  sys.validate();
  x0.validate();
  const bool neutral = !sys.is_retarded();
  if (neutral && !allow_neutral)
    throw NonSmoothHistory("simulate: neutral system requires a differentiable history (pass allow_neutral)");

  const int N = grid.steps_per_unit();
  const int M = grid.horizon_steps();
  const int n = sys.n;
  const double dt = grid.dt;

  Trajectory traj;
  traj.grid = grid;
  traj.history_cols = N + 1;
  traj.z.setZero(n, N + M + 1);
  traj.u.setZero(M + 1);

  // history on [-1, 0]: resample z0, overwrite the τ=0 column with y
  const Eigen::MatrixXcd hist = detail::resample_columns(x0.z0.cast<cd>(), N + 1);
  for (int i = 0; i <= N; ++i) traj.z.col(i) = hist.col(i).real();
  traj.z.col(N) = x0.y;

  // derivative path: history by finite differences (one-sided at the segment
  // boundaries, using the history value at τ=0 rather than y), then the ODE
  // right-hand side once stepping starts
  Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(n, N + M + 1);
  {
    Eigen::MatrixXd h(n, N + 1);
    for (int i = 0; i <= N; ++i) h.col(i) = hist.col(i).real();
    dz.col(0) = (h.col(1) - h.col(0)) / dt;
    for (int i = 1; i < N; ++i) dz.col(i) = (h.col(i + 1) - h.col(i - 1)) / (2.0 * dt);
    dz.col(N) = (h.col(N) - h.col(N - 1)) / dt;
  }

  const bool has_kernels = !sys.A2.is_zero() || !sys.A3.is_zero();
  std::vector<Eigen::MatrixXd> a2g, a3g;
  if (has_kernels) {
    a2g.reserve(N + 1);
    a3g.reserve(N + 1);
    for (int m = 0; m <= N; ++m) {
      const double theta = -1.0 + m * dt;
      a2g.push_back(sys.A2.eval(theta, n));
      a3g.push_back(sys.A3.eval(theta, n));
    }
  }

  auto control_at = [&](double t) { return u ? u->eval(t) : 0.0; };

  // distributed integral ∫ A2 ż(t+θ) + A3 z(t+θ) dθ at path column p
  auto kernel_term = [&](int p) -> Eigen::VectorXd {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    if (!has_kernels) return acc;
    for (int m = 0; m <= N; ++m) {
      const double w = (m == 0 || m == N) ? 0.5 : 1.0;
      acc += w * (a2g[m] * dz.col(p - N + m) + a3g[m] * traj.z.col(p - N + m));
    }
    return acc * dt;
  };

  // non-instantaneous part of ż at column p (everything but A0 z)
  auto rhs_tail = [&](int p) -> Eigen::VectorXd {
    Eigen::VectorXd r = sys.A1 * traj.z.col(p - N) + sys.b * control_at(traj.time_at(p));
    if (neutral) r += sys.A_minus1 * dz.col(p - N);
    r += kernel_term(p);
    return r;
  };

  // ż(0+) from the equation itself; one refresh covers a kernel at θ = 0
  dz.col(N) = sys.A0 * traj.z.col(N) + rhs_tail(N);
  if (has_kernels) dz.col(N) = sys.A0 * traj.z.col(N) + rhs_tail(N);
  traj.u(0) = control_at(0.0);

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(
      Eigen::MatrixXd::Identity(n, n) - 0.5 * dt * sys.A0);

  for (int p = N; p < N + M; ++p) {
    const Eigen::VectorXd f_here = dz.col(p);
    // predictor
    traj.z.col(p + 1) = traj.z.col(p) + dt * f_here;
    dz.col(p + 1) = f_here;
    for (int sweep = 0; sweep < 2; ++sweep) {
      const Eigen::VectorXd tail = rhs_tail(p + 1);
      traj.z.col(p + 1) = lu.solve(traj.z.col(p) + 0.5 * dt * (f_here + tail));
      dz.col(p + 1) = sys.A0 * traj.z.col(p + 1) + tail;
    }
    traj.u(p + 1 - N) = control_at(traj.time_at(p + 1));
    if (!traj.z.col(p + 1).allFinite()) throw NonConvergence("simulate: trajectory diverged");
  }
  return traj;
}

struct NullCheck {
  bool is_null = false;
  double residual = 0.0;
};

// max over grid points in [T-1, T] of ||z(t)||_inf against tol.
inline NullCheck verify_null(const Trajectory& traj, double T, double tol) {
  if (traj.grid.horizon + 1e-12 < T) throw HorizonShort("verify_null: trajectory horizon shorter than T");
  const int lo = traj.col_at(T - 1.0);
  const int hi = std::min(traj.col_at(T), static_cast<int>(traj.z.cols()) - 1);
  double res = 0.0;
  for (int i = lo; i <= hi; ++i) res = std::max(res, traj.z.col(i).lpNorm<Eigen::Infinity>());
  return {res <= tol, res};
}

}  // namespace delaysteer

#endif  // DELAYSTEER_SIMULATOR_HPP

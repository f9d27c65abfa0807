#include <doctest.h>

#include <random>

#include "delaysteer/lambert.hpp"
#include "delaysteer/model.hpp"
#include "helpers.hpp"

using namespace delaysteer;
using delaysteer::testing::kOmega;
namespace th = delaysteer::testing;

TEST_CASE("eval_delta: zero system is -lambda I") {
  const auto sys = th::zero_system(1);
  CHECK(std::abs(eval_delta(sys, cd(2.0, 0.0))(0, 0) - cd(-2.0, 0.0)) < 1e-15);
}

TEST_CASE("eval_delta: lambda = 0 kills all lambda terms") {
  DelaySystem sys = th::zero_system(2);
  sys.A1 = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXcd d = eval_delta(sys, 0.0);
  CHECK((d - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("eval_delta: vanishes at the branch root of lambda e^lambda = 1") {
  const auto sys = th::scalar_system(1.0);
  CHECK(std::abs(eval_delta(sys, cd(kOmega, 0.0))(0, 0)) <= 1e-6);
}

TEST_CASE("eval_delta: distributed kernel integral in closed form") {
  // A3 = const c on [-1/2, 0]: Δ(λ) = -λ + c (1 - e^{-λ/2})/λ
  DelaySystem sys = th::zero_system(1);
  const double c = 0.7;
  KernelPiece p;
  p.left = -0.5;
  p.right = 0.0;
  p.coeffs = {Eigen::MatrixXd::Constant(1, 1, c)};
  sys.A3.support_left = -0.5;
  sys.A3.pieces = {p};
  const cd lam(0.3, 0.8);
  const cd expect = -lam + c * (1.0 - std::exp(-lam * 0.5)) / lam;
  CHECK(std::abs(eval_delta(sys, lam)(0, 0) - expect) < 1e-13);
}

TEST_CASE("char_det examples") {
  // scalar: determinant equals the single entry
  const auto s1 = th::scalar_system(1.0);
  CHECK(std::abs(char_det(s1, cd(0.2, 0.3)) - eval_delta(s1, cd(0.2, 0.3))(0, 0)) < 1e-15);
  // diag(1,2) at 0: product of branch factors
  const auto s2 = th::diag_system({1.0, 2.0}, {1.0, 1.0});
  CHECK(std::abs(char_det(s2, 0.0) - cd(2.0, 0.0)) < 1e-14);
  // a=1 at λ=i: -i + e^{-i} = cos 1 - i(1 + sin 1)
  const cd expect(std::cos(1.0), -(1.0 + std::sin(1.0)));
  CHECK(std::abs(char_det(s1, cd(0.0, 1.0)) - expect) < 1e-14);
}

TEST_CASE("exp_integral closed forms") {
  CHECK(std::abs(exp_integral(cd(0.0, 0.0), 0.0, 2.0) - cd(2.0, 0.0)) < 1e-15);
  CHECK(std::abs(exp_integral(cd(1.0, 0.0), 0.0, 1.0) - cd(std::exp(1.0) - 1.0, 0.0)) < 1e-14);
  // series regime vs direct formula just above the switch
  const cd mu(1e-4, 2e-4);
  const cd direct = (std::exp(mu * 0.5) - std::exp(mu * 0.2)) / mu;
  CHECK(std::abs(exp_integral(mu, 0.2, 0.5) - direct) < 1e-14);
}

TEST_CASE("ExpSum moments and time reversal") {
  ExpSum s;
  s.terms = {{cd(0.5, 1.0), cd(2.0, 0.0)}};
  const cd lam(0.1, -0.3);
  CHECK(std::abs(s.moment(lam, 0.0, 3.0) - 2.0 * exp_integral(lam + cd(0.5, 1.0), 0.0, 3.0)) < 1e-13);
  const ExpSum r = s.time_reversed(3.0, -1.0);
  for (double t : {0.0, 0.7, 1.9, 3.0}) CHECK(std::abs(r.eval(t) + s.eval(3.0 - t)) < 1e-12);
}

TEST_CASE("m2_inner basics") {
  M2State e1 = M2State::constant(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1));
  M2State f1 = M2State::constant(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  CHECK(std::abs(m2_inner(e1, e1) - cd(1.0, 0.0)) < 1e-14);
  CHECK(std::abs(m2_inner(e1, f1)) < 1e-14);
  CHECK(std::abs(m2_inner(f1, f1) - cd(1.0, 0.0)) < 1e-14);
}

TEST_CASE("m2_inner resamples mismatched grids") {
  M2State a = M2State::constant(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), 33);
  M2State b = M2State::constant(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), 257);
  CHECK(std::abs(m2_inner(a, b) - cd(1.0, 0.0)) < 1e-12);
}

TEST_CASE("psi_eigenvector: scalar tail formula and normalization") {
  const auto sys = th::scalar_system(1.0);
  const cd lam(kOmega, 0.0);
  const auto psi = psi_eigenvector(sys, lam);
  CHECK(std::abs(psi.y(0) - cd(1.0, 0.0)) < 1e-9);  // <b, y> = y for b = 1
  // tail(τ) = conj(λ) e^{-conj(λ) τ} y
  for (int i : {0, 64, 128, 256}) {
    const double tau = -1.0 + i / 256.0;
    const cd expect = std::conj(lam) * std::exp(-std::conj(lam) * tau) * psi.y(0);
    CHECK(std::abs(psi.tail(0, i) - expect) < 1e-9);
  }
}

TEST_CASE("psi_eigenvector: cross-orthogonality of phi and psi at distinct roots") {
  const auto sys = th::scalar_system(1.0);
  const cd lam0 = lambert_branch(1.0, 0);
  const cd lam1 = lambert_branch(1.0, 1);
  const auto phi0 = right_eigenvector(sys, lam0);
  const auto psi1 = psi_eigenvector(sys, lam1, false);
  // trapezoid quadrature on the default grid limits the achievable zero
  CHECK(std::abs(m2_inner(phi0, psi1.as_m2())) <= 5e-3);
  // and non-degenerate pairing at the same root
  const auto psi0 = psi_eigenvector(sys, lam0, false);
  CHECK(std::abs(m2_inner(phi0, psi0.as_m2())) > 1e-2);
}

TEST_CASE("psi_eigenvector: KernelEmpty away from the spectrum") {
  const auto sys = th::scalar_system(1.0);
  CHECK_THROWS_AS(psi_eigenvector(sys, cd(3.0, 3.0)), KernelEmpty);
}

TEST_CASE("psi_eigenvector: normalization fails when b misses the kernel direction") {
  // diag(1,2), b = (0,1): at the branch-1 root the kernel of Δ* is e1 ⟂ b
  const auto sys = th::diag_system({1.0, 2.0}, {0.0, 1.0});
  CHECK_THROWS_AS(psi_eigenvector(sys, cd(kOmega, 0.0), true), NotSpectrallyControllableAt);
}

TEST_CASE("invariant: conjugate symmetry of eval_delta for real systems") {
  DelaySystem sys = th::zero_system(2);
  sys.A1 << 0.3, -1.2, 0.7, 0.1;
  sys.A0 << -0.5, 0.2, 0.0, 0.9;
  sys.A_minus1 << 0.1, 0.0, 0.2, -0.3;
  KernelPiece p;
  p.left = -0.5;
  p.right = -0.1;
  p.coeffs = {Eigen::MatrixXd::Random(2, 2), Eigen::MatrixXd::Random(2, 2)};
  sys.A2.support_left = -0.5;
  sys.A2.pieces = {p};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const cd lam(d(rng), d(rng));
    const Eigen::MatrixXcd a = eval_delta(sys, std::conj(lam));
    const Eigen::MatrixXcd b = eval_delta(sys, lam).conjugate();
    CHECK((a - b).norm() <= 1e-12 * std::max(1.0, b.norm()));
  }
}

TEST_CASE("invariant: Delta(0) = A1 + A0 + integral of A3") {
  DelaySystem sys = th::zero_system(2);
  sys.A1 << 1, 2, 3, 4;
  sys.A0 << 0, 1, -1, 0;
  KernelPiece p;
  p.left = -0.75;
  p.right = 0.0;
  p.coeffs = {(Eigen::MatrixXd(2, 2) << 1, 0, 0, 2).finished(),
              (Eigen::MatrixXd(2, 2) << 0, 3, 1, 0).finished()};
  sys.A3.support_left = -0.75;
  sys.A3.pieces = {p};
  const Eigen::MatrixXd expect = sys.A1 + sys.A0 + sys.A3.integral(2);
  CHECK((eval_delta(sys, 0.0) - expect.cast<cd>()).norm() < 1e-14);
}

TEST_CASE("invariant: adjoint kernel residual at accepted eigenvalues") {
  const auto sys = th::diag_system({1.0, 2.0}, {1.0, 1.0});
  for (int k : {0, 1, 2}) {
    for (double a : {1.0, 2.0}) {
      const cd lam = lambert_branch(a, k);
      const auto psi = psi_eigenvector(sys, lam, false);
      const Eigen::MatrixXcd dstar = eval_delta(sys, lam).adjoint();
      CHECK((dstar * psi.y).norm() <= 1e-8 * eval_delta(sys, lam).norm());
    }
  }
}

#include <doctest.h>

#include <random>

#include "delaysteer/analysis.hpp"
#include "helpers.hpp"

using namespace delaysteer;
namespace th = delaysteer::testing;

namespace {

int kalman_rank(const Eigen::MatrixXd& M, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(M.rows());
  Eigen::MatrixXd C(n, n);
  Eigen::VectorXd v = b;
  for (int i = 0; i < n; ++i) {
    C.col(i) = v;
    v = M * v;
  }
  return numeric_rank(C.cast<cd>());
}

}  // namespace

TEST_CASE("numeric_rank examples") {
  CHECK(numeric_rank(Eigen::MatrixXcd::Identity(3, 3)) == 3);
  CHECK(numeric_rank(Eigen::MatrixXcd::Zero(2, 4)) == 0);
  Eigen::MatrixXcd m(2, 2);
  m << 1.0, 2.0, 2.0, 4.0;
  CHECK(numeric_rank(m) == 1);
}

TEST_CASE("pbh: canonical controllable and uncontrollable pairs") {
  Eigen::MatrixXd A(2, 2);
  A << 0, 1, 0, 0;
  Eigen::VectorXd b(2);
  b << 0, 1;
  CHECK(pbh_pair_controllable(A, b).controllable);

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 1.0;  // repeated eigenvalue with a single input: uncontrollable
  const auto r = pbh_pair_controllable(D, b);
  CHECK_FALSE(r.controllable);
  REQUIRE(r.witness.has_value());
  CHECK(std::abs(*r.witness - cd(1.0, 0.0)) < 1e-9);
}

TEST_CASE("pbh: exclude_zero skips only the zero eigenvalue") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);  // A v = 0, b misses e1
  Eigen::VectorXd b(2);
  b << 0, 1;
  CHECK_FALSE(pbh_pair_controllable(A, b, false).controllable);
  CHECK(pbh_pair_controllable(A, b, true).controllable);
}

TEST_CASE("pbh agrees with Kalman rank on random pairs") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(rng);
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      b(i) = dist(rng);
      for (int j = 0; j < n; ++j) M(i, j) = dist(rng);
    }
    if (trial % 3 == 0 && n >= 2) {
      // force an uncontrollable mode now and then
      M.row(0).setZero();
      M.col(0).setZero();
      b(0) = 0.0;
    }
    const bool pbh = pbh_pair_controllable(M, b).controllable;
    const bool kal = kalman_rank(M, b) == n;
    CHECK(pbh == kal);
  }
}

TEST_CASE("pencil_nonsingular") {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(2, 2);
  CHECK(pencil_nonsingular(I, Z));
  CHECK_FALSE(pencil_nonsingular(Z, Z));
  Eigen::MatrixXd N(2, 2);
  N << 0, 1, 0, 0;  // det(N + λ N) = 0 identically
  CHECK_FALSE(pencil_nonsingular(N, N));
  CHECK(pencil_nonsingular(N, I));  // det = λ² - λ·0 ... nonzero polynomial
}

TEST_CASE("completable: provable no when A_{-1}=0 and rank[A1,b] < n") {
  auto sys = th::diag_system({1.0, 0.0}, {1.0, 0.0});
  sys.A1(1, 1) = 0.0;  // A1 = diag(1,0), b = (1,0): row 2 of [A1,b] is zero
  const auto r = completable(sys);
  CHECK(r.provably_false());
}

TEST_CASE("completable: nonsingular A1 found immediately with zero gains") {
  const auto sys = th::diag_system({1.0, 2.0}, {1.0, 1.0});
  const auto r = completable(sys);
  CHECK(r.found());
  CHECK(r.p1.isZero(0.0));
}

TEST_CASE("completable: singular A1 repaired by feedback") {
  // A1 = [[0,0],[0,1]], b = (1,0): rank[A1,b] = 2, gain p1 can fill the pencil
  DelaySystem sys = th::zero_system(2);
  sys.A1 << 0, 0, 0, 1;
  sys.b << 1, 0;
  const auto r = completable(sys);
  CHECK(r.found());
  CHECK(pencil_nonsingular(sys.A1 + sys.b * r.p1, sys.A_minus1 + sys.b * r.p_minus1));
}

TEST_CASE("spectral_controllability on eigen lists") {
  const auto sys1 = th::scalar_system(1.0);
  const auto eigs1 = find_eigenvalues(sys1, {-5.0, 1.5, -16.0, 16.0});
  CHECK(spectral_controllability(sys1, eigs1).controllable_in_window);

  const auto sys2 = th::remark2_system();  // double eigenvalues, single input
  const auto eigs2 = find_eigenvalues(sys2, {-1.0, 1.0, -1.0, 1.0});
  const auto r = spectral_controllability(sys2, eigs2);
  CHECK_FALSE(r.controllable_in_window);
  REQUIRE(r.witness.has_value());
  CHECK(std::abs(*r.witness - cd(th::kOmega, 0.0)) < 1e-4);
}

TEST_CASE("classify: scalar a=1 is fully controllable and stabilizable") {
  const auto rep = classify(th::scalar_system(1.0), {-5.0, 1.5, -16.0, 16.0});
  CHECK(rep.spectrally_controllable_in_window);
  CHECK(rep.exactly_null_controllable == TriState::Yes);
  CHECK(rep.completely_stabilizable == TriState::Yes);
  CHECK(rep.retarded);
  CHECK(rep.support_condition);
}

TEST_CASE("classify: remark 1 fixture is undetermined for exact null controllability") {
  const auto rep = classify(th::remark1_system(), {-5.0, 1.5, -16.0, 16.0});
  CHECK(rep.spectrally_controllable_in_window);
  CHECK_FALSE(rep.pair_A1_b_controllable);
  CHECK(rep.exactly_null_controllable == TriState::Undetermined);
  CHECK(rep.completely_stabilizable == TriState::Yes);
}

TEST_CASE("classify: remark 2 fixture fails spectral controllability") {
  const auto rep = classify(th::remark2_system(), {-1.0, 1.0, -1.0, 1.0});
  CHECK_FALSE(rep.spectrally_controllable_in_window);
  CHECK(rep.exactly_null_controllable == TriState::No);
  CHECK(rep.completely_stabilizable == TriState::No);
}

#ifndef DELAYSTEER_TEST_HELPERS_HPP
#define DELAYSTEER_TEST_HELPERS_HPP

#include "delaysteer/model.hpp"

namespace delaysteer::testing {

inline DelaySystem scalar_system(double a, double b = 1.0) {
  DelaySystem sys;
  sys.n = 1;
  sys.A_minus1 = Eigen::MatrixXd::Zero(1, 1);
  sys.A1 = Eigen::MatrixXd::Constant(1, 1, a);
  sys.A0 = Eigen::MatrixXd::Zero(1, 1);
  sys.b = Eigen::VectorXd::Constant(1, b);
  return sys;
}

inline DelaySystem zero_system(int n) {
  DelaySystem sys;
  sys.n = n;
  sys.A_minus1 = Eigen::MatrixXd::Zero(n, n);
  sys.A1 = Eigen::MatrixXd::Zero(n, n);
  sys.A0 = Eigen::MatrixXd::Zero(n, n);
  sys.b = Eigen::VectorXd::Zero(n);
  return sys;
}

inline DelaySystem diag_system(std::initializer_list<double> diag, std::initializer_list<double> b) {
  const int n = static_cast<int>(diag.size());
  DelaySystem sys = zero_system(n);
  int i = 0;
  for (double d : diag) sys.A1(i, i) = d, ++i;
  i = 0;
  for (double v : b) sys.b(i++) = v;
  return sys;
}

// ż = diag(0,1) z(t-1) + [[0,1],[0,0]] z + (0,1) u : null controllable but not completable
inline DelaySystem remark1_system() {
  DelaySystem sys = zero_system(2);
  sys.A1 << 0, 0, 0, 1;
  sys.A0 << 0, 1, 0, 0;
  sys.b << 0, 1;
  return sys;
}

// ż = I z(t-1) + (0,1) u : complete but not spectrally controllable
inline DelaySystem remark2_system() {
  DelaySystem sys = zero_system(2);
  sys.A1 = Eigen::MatrixXd::Identity(2, 2);
  sys.b << 0, 1;
  return sys;
}

// zero of λ e^λ = 1 (Omega constant), frozen from the Halley oracle
inline constexpr double kOmega = 0.5671432904097838;

}  // namespace delaysteer::testing

#endif

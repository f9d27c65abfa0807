#ifndef DELAYSTEER_MATRIX_KERNEL_HPP
#define DELAYSTEER_MATRIX_KERNEL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "delaysteer/errors.hpp"
#include "delaysteer/exp_math.hpp"

namespace delaysteer {

// One polynomial piece of a matrix-valued kernel: on [left, right] the kernel
// equals Σ_d coeffs[d] θ^d.
struct KernelPiece {
  double left = 0.0;
  double right = 0.0;
  std::vector<Eigen::MatrixXd> coeffs;  // coeffs[d] is the n x n matrix of the θ^d term
};

// Piecewise-polynomial n x n kernel supported in [support_left, 0], with
// support_left > -1.  Evaluation outside the pieces is the zero matrix.
struct MatrixKernel {
  double support_left = 0.0;
  std::vector<KernelPiece> pieces;

  bool is_zero() const { return pieces.empty(); }

  void validate(int n) const {
    if (!(support_left > -1.0) || support_left > 0.0)
      throw std::invalid_argument("kernel support_left must lie in (-1, 0]");
    for (const auto& p : pieces) {
      if (p.left < support_left - 1e-15 || p.right > 1e-15 || p.left >= p.right)
        throw std::invalid_argument("kernel piece outside [support_left, 0]");
      if (p.coeffs.empty()) throw std::invalid_argument("kernel piece has no coefficients");
      for (const auto& c : p.coeffs)
        if (c.rows() != n || c.cols() != n)
          throw DimensionMismatch("kernel coefficient matrix is not n x n");
    }
  }

  Eigen::MatrixXd eval(double theta, int n) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : pieces) {
      if (theta < p.left || theta > p.right) continue;
      double tp = 1.0;
      for (const auto& c : p.coeffs) {
        out += tp * c;
        tp *= theta;
      }
      break;  // pieces do not overlap
    }
    return out;
  }

  // ∫_a^b e^{lambda s} K(s) ds, each entry by closed-form poly x exp quadrature.
  Eigen::MatrixXcd exp_moment(cd lambda, double a, double b, int n) const {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& p : pieces) {
      const double l = std::max(a, p.left);
      const double r = std::min(b, p.right);
      if (l >= r) continue;
      const auto mom = exp_monomial_integrals(lambda, l, r, static_cast<int>(p.coeffs.size()) - 1);
      for (size_t d = 0; d < p.coeffs.size(); ++d) out += mom[d] * p.coeffs[d].cast<cd>();
    }
    return out;
  }

  Eigen::MatrixXcd exp_moment(cd lambda, int n) const { return exp_moment(lambda, -1.0, 0.0, n); }

  // ∫_{-1}^0 K(s) ds exactly.
  Eigen::MatrixXd integral(int n) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : pieces) {
      for (size_t d = 0; d < p.coeffs.size(); ++d) {
        const double w = (std::pow(p.right, d + 1) - std::pow(p.left, d + 1)) / static_cast<double>(d + 1);
        out += w * p.coeffs[d];
      }
    }
    return out;
  }

  MatrixKernel transpose() const {
    MatrixKernel out = *this;
    for (auto& p : out.pieces)
      for (auto& c : p.coeffs) c.transposeInPlace();
    return out;
  }
};

// Piecewise-linear fit of a sampled kernel on a uniform grid over [support_left, 0].
inline MatrixKernel kernel_from_samples(double support_left, const std::vector<Eigen::MatrixXd>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("sampled kernel needs at least 2 samples");
  MatrixKernel k;
  k.support_left = support_left;
  const double h = (0.0 - support_left) / static_cast<double>(samples.size() - 1);
  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    const double l = support_left + static_cast<double>(i) * h;
    const double r = l + h;
    // linear interpolation K(θ) = A + B θ on [l, r]
    const Eigen::MatrixXd slope = (samples[i + 1] - samples[i]) / h;
    KernelPiece p;
    p.left = l;
    p.right = r;
    p.coeffs = {samples[i] - slope * l, slope};
    k.pieces.push_back(std::move(p));
  }
  return k;
}

}  // namespace delaysteer

#endif  // DELAYSTEER_MATRIX_KERNEL_HPP

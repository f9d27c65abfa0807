#ifndef DELAYSTEER_CONTROL_SIGNAL_HPP
#define DELAYSTEER_CONTROL_SIGNAL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "delaysteer/biortho.hpp"
#include "delaysteer/exp_math.hpp"

namespace delaysteer {

// A real control on [0, T].  Carries an analytic representation (an
// exponential sum, or a piecewise-exponential sum for series controls) next
// to the real-valued samples so downstream quadrature can stay exact.
struct ControlSignal {
  double T = 0.0;
  ExpSum exps;
  PiecewiseExp piecewise;
  bool has_exps = false;
  bool has_piecewise = false;
  Eigen::VectorXd samples;  // uniform grid over [0, T], including both ends
  double residual = 0.0;    // max moment-equation defect
  double imag_defect = 0.0; // max |Im| before the real part was taken
  std::vector<cd> eigenvalues_used;
  int effective_rank = 0;

  double sample_step() const { return T / static_cast<double>(samples.size() - 1); }

  double eval(double t) const {
    if (t < 0.0 || t > T) return 0.0;
    if (has_exps) return exps.eval(t).real();
    if (has_piecewise) return piecewise.eval(t).real();
    if (samples.size() < 2) return 0.0;
    const double h = sample_step();
    const double pos = t / h;
    const int i = std::min(static_cast<int>(pos), static_cast<int>(samples.size()) - 2);
    const double w = pos - i;
    return (1.0 - w) * samples(i) + w * samples(i + 1);
  }

  double l2_norm() const {
    if (has_exps) return exps.l2_norm(0.0, T);
    if (has_piecewise) return piecewise.l2_norm();
    // trapezoid fallback
    double acc = 0.0;
    const double h = sample_step();
    for (int i = 0; i < samples.size(); ++i) {
      const double w = (i == 0 || i + 1 == samples.size()) ? 0.5 : 1.0;
      acc += w * samples(i) * samples(i);
    }
    return std::sqrt(acc * h);
  }
};

inline void fill_samples(ControlSignal& sig, int per_unit = 512) {
  const int m = static_cast<int>(std::lround(sig.T * per_unit)) + 1;
  sig.samples.resize(m);
  double max_re = 0.0, max_im = 0.0;
  for (int i = 0; i < m; ++i) {
    const double t = sig.T * static_cast<double>(i) / static_cast<double>(m - 1);
    cd v = 0.0;
    if (sig.has_exps)
      v = sig.exps.eval(t);
    else if (sig.has_piecewise)
      v = sig.piecewise.eval(t);
    sig.samples(i) = v.real();
    max_re = std::max(max_re, std::abs(v.real()));
    max_im = std::max(max_im, std::abs(v.imag()));
  }
  sig.imag_defect = max_im / (1.0 + max_re);
}

}  // namespace delaysteer

#endif  // DELAYSTEER_CONTROL_SIGNAL_HPP

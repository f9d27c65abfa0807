#ifndef DELAYSTEER_SPECTRAL_HPP
#define DELAYSTEER_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "delaysteer/lambert.hpp"
#include "delaysteer/model.hpp"

namespace delaysteer {

struct Window {
  double re_min, re_max, im_min, im_max;

  void validate() const {
    if (!(re_min < re_max) || !(im_min < im_max))
      throw std::invalid_argument("window bounds must satisfy re_min < re_max, im_min < im_max");
  }
  double width() const { return re_max - re_min; }
  double height() const { return im_max - im_min; }
  cd center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
  bool contains(cd z, double slack = 0.0) const {
    return z.real() >= re_min - slack && z.real() <= re_max + slack && z.imag() >= im_min - slack &&
           z.imag() <= im_max + slack;
  }
};

struct EigenPoint {
  cd lambda;
  int multiplicity = 1;
  std::optional<int> branch_j;
  std::optional<int> index_k;
  double residual = 0.0;  // |det Δ(λ)| / max(1, |det Δ| on the cell boundary)
};

struct Seed {
  cd lambda;
  int j = 0;
  int k = 0;
};

struct SeedGrid {
  std::vector<Seed> seeds;
  double r0 = 0.0;
};

// Lambert seeds for the diagonal comparison system, one branch per a_j
// (j is 1-based), k in [k_min, k_max]; r0 = (1/3) min pairwise distance.
inline SeedGrid build_seeds(const std::vector<double>& a_list, int k_min, int k_max) {
  SeedGrid g;
  for (size_t j = 0; j < a_list.size(); ++j)
    for (int k = k_min; k <= k_max; ++k)
      g.seeds.push_back({lambert_branch(a_list[j], k), static_cast<int>(j) + 1, k});
  if (g.seeds.size() < 2) throw Error("build_seeds: r0 undefined, at least 2 seeds required");
  double dmin = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < g.seeds.size(); ++i)
    for (size_t l = i + 1; l < g.seeds.size(); ++l)
      dmin = std::min(dmin, std::abs(g.seeds[i].lambda - g.seeds[l].lambda));
  if (dmin < 1e-10) throw CollidingSeeds("build_seeds: two seeds coincide");
  g.r0 = dmin / 3.0;
  return g;
}

namespace detail {

struct ContourData {
  int winding = 0;
  cd zero_sum;     // (1/2πi) ∮ λ f'/f dλ  (= sum of enclosed zeros)
  double max_abs = 0.0;
};

// Winding number of f along a closed polyline through `nodes` (last edge
// closes back to the first node).  Adaptive phase continuation: the phase
// step between consecutive samples is kept below π/2 by bisection.
inline ContourData winding_along(const std::function<cd(cd)>& f, const std::vector<cd>& nodes,
                                 double min_seg_rel = 1e-12) {
  ContourData out;
  double total_arg = 0.0;
  double min_abs = std::numeric_limits<double>::infinity();
  double perim = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i) perim += std::abs(nodes[(i + 1) % nodes.size()] - nodes[i]);
  const double min_seg = min_seg_rel * perim;

  std::vector<cd> fv(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) {
    fv[i] = f(nodes[i]);
    min_abs = std::min(min_abs, std::abs(fv[i]));
    out.max_abs = std::max(out.max_abs, std::abs(fv[i]));
  }

  const std::function<void(cd, cd, cd, cd, int)> segment = [&](cd z0, cd f0, cd z1, cd f1, int depth) {
    const cd ratio = f1 / f0;
    const double dphi = std::arg(ratio);
    if (std::abs(dphi) <= M_PI / 2.0 && depth > 0) {
      total_arg += dphi;
      out.zero_sum += 0.5 * (z0 + z1) * (std::log(std::abs(ratio)) + cd(0.0, dphi));
      return;
    }
    if (std::abs(z1 - z0) < min_seg)
      throw BoundaryZero("winding_along: phase step irreducible, zero on or near the contour");
    const cd zm = 0.5 * (z0 + z1);
    const cd fm = f(zm);
    const double am = std::abs(fm);
    min_abs = std::min(min_abs, am);
    out.max_abs = std::max(out.max_abs, am);
    segment(z0, f0, zm, fm, depth + 1);
    segment(zm, fm, z1, f1, depth + 1);
  };

  for (size_t i = 0; i < nodes.size(); ++i) {
    const size_t j = (i + 1) % nodes.size();
    segment(nodes[i], fv[i], nodes[j], fv[j], 0);
  }
  if (min_abs < 1e-13 * out.max_abs)
    throw BoundaryZero("winding_along: |f| vanishes on the contour");

  const double w = total_arg / (2.0 * M_PI);
  const int wi = static_cast<int>(std::lround(w));
  if (std::abs(w - wi) > 0.25) throw NonConvergence("winding_along: winding number not near an integer");
  out.winding = wi;
  out.zero_sum /= cd(0.0, 2.0 * M_PI);
  return out;
}

inline std::vector<cd> rect_nodes(const Window& w, int per_edge = 8) {
  std::vector<cd> nodes;
  const cd c[4] = {{w.re_min, w.im_min}, {w.re_max, w.im_min}, {w.re_max, w.im_max}, {w.re_min, w.im_max}};
  for (int e = 0; e < 4; ++e)
    for (int i = 0; i < per_edge; ++i) {
      const double t = static_cast<double>(i) / per_edge;
      nodes.push_back(c[e] + t * (c[(e + 1) % 4] - c[e]));
    }
  return nodes;
}

inline std::vector<cd> circle_nodes(cd center, double radius, int count = 24) {
  std::vector<cd> nodes;
  for (int i = 0; i < count; ++i) {
    const double th = 2.0 * M_PI * i / count;
    nodes.push_back(center + radius * cd(std::cos(th), std::sin(th)));
  }
  return nodes;
}

inline ContourData contour(const DelaySystem& sys, const Window& w) {
  return winding_along([&](cd z) { return char_det(sys, z); }, rect_nodes(w));
}

}  // namespace detail

// Number of zeros of det Δ inside the window, with multiplicity, by the
// argument principle.  Throws BoundaryZero if a zero sits on the contour.
inline int count_zeros(const DelaySystem& sys, const Window& w) {
  w.validate();
  return detail::contour(sys, w).winding;
}

namespace detail {

struct RootSolver {
  const DelaySystem& sys;
  const SeedGrid* seeds;
  std::vector<Window>* flagged;
  std::vector<EigenPoint> roots;

  cd det(cd z) const { return char_det(sys, z); }

  cd det_derivative(cd z) const {
    const double h = 1e-7 * (1.0 + std::abs(z));
    return (det(z + h) - det(z - h)) / (2.0 * h);
  }

  void flag(const Window& w, const char* why) const {
    if (flagged)
      flagged->push_back(w);
    else
      throw NonConvergence(std::string("find_eigenvalues: ") + why);
  }

  int multiplicity_at(cd lambda, const Window& cell) const {
    double r = 1e-4 * (1.0 + std::abs(lambda));
    const double edge = std::min({lambda.real() - cell.re_min, cell.re_max - lambda.real(),
                                  lambda.imag() - cell.im_min, cell.im_max - lambda.imag()});
    if (edge > 1e-9) r = std::min(r, 0.8 * edge);
    for (int attempt = 0; attempt < 6; ++attempt) {
      try {
        return winding_along([&](cd z) { return det(z); }, circle_nodes(lambda, r)).winding;
      } catch (const BoundaryZero&) {
        r *= 0.618;
      }
    }
    return 1;  // circle kept hitting structure; treat as simple and let residual checks decide
  }

  void emit(cd lambda, int mult, double residual, const Window& cell) {
    if (mult > 3) {
      flag(cell, "multiplicity above 3, refinement aborted for this cell");
      return;
    }
    roots.push_back({lambda, std::max(1, mult), std::nullopt, std::nullopt, residual});
  }

  void leaf(const Window& cell, const ContourData& data) {
    const double scale = std::max(1.0, data.max_abs);
    cd guess = data.zero_sum / static_cast<double>(data.winding);
    if (!cell.contains(guess, 0.1 * (cell.width() + cell.height()))) guess = cell.center();

    if (data.winding > 1) {
      // irreducible cluster at minimal cell size: report centroid with its count
      emit(guess, data.winding, std::abs(det(guess)) / scale, cell);
      return;
    }

    cd lam = guess;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      const cd f = det(lam);
      if (std::abs(f) <= 1e-14 * scale) {
        converged = true;
        break;
      }
      const cd fp = det_derivative(lam);
      if (std::abs(fp) == 0.0) break;
      const cd step = f / fp;
      lam -= step;
      if (std::abs(step) < 1e-13 * (1.0 + std::abs(lam))) {
        converged = true;
        break;
      }
    }
    const double residual = std::abs(det(lam)) / scale;
    if (!converged && residual > 1e-10) {
      flag(cell, "Newton refinement did not converge in a cell");
      return;
    }
    if (!cell.contains(lam, 0.5 * (cell.width() + cell.height()))) {
      flag(cell, "Newton refinement left the cell");
      return;
    }
    emit(lam, multiplicity_at(lam, cell), residual, cell);
  }

  void solve(const Window& cell, const ContourData& data, int depth) {
    if (data.winding == 0) return;
    const double size = std::max(cell.width(), cell.height());
    const bool tiny = size < 1e-6 * (1.0 + std::abs(cell.center()));
    if (data.winding == 1 || tiny || depth > 80) {
      leaf(cell, data);
      return;
    }
    static const double fractions[] = {0.5, 0.53, 0.46, 0.59, 0.41, 0.55};
    const bool split_re = cell.width() >= cell.height();
    for (double frac : fractions) {
      Window a = cell, b = cell;
      if (split_re) {
        const double mid = cell.re_min + frac * cell.width();
        a.re_max = mid;
        b.re_min = mid;
      } else {
        const double mid = cell.im_min + frac * cell.height();
        a.im_max = mid;
        b.im_min = mid;
      }
      try {
        const ContourData da = contour(sys, a);
        const ContourData db = contour(sys, b);
        if (da.winding + db.winding != data.winding) continue;  // zero straddling the cut
        const size_t checkpoint = roots.size();
        try {
          solve(a, da, depth + 1);
          solve(b, db, depth + 1);
          return;
        } catch (const BoundaryZero&) {
          roots.resize(checkpoint);
          continue;
        }
      } catch (const BoundaryZero&) {
        continue;
      }
    }
    throw BoundaryZero("find_eigenvalues: could not split a cell without hitting a zero");
  }
};

}  // namespace detail

// All zeros of det Δ in the window: recursive subdivision by the argument
// principle, Newton refinement, multiplicity by small-circle winding.
// Branch/index tags are assigned when a root lies within r0 of a seed.
// Cells where refinement fails are appended to `flagged` when given,
// otherwise reported via NonConvergence.
inline std::vector<EigenPoint> find_eigenvalues(const DelaySystem& sys, const Window& w,
                                                const SeedGrid* seeds = nullptr,
                                                std::vector<Window>* flagged = nullptr) {
  w.validate();
  sys.validate();
  detail::RootSolver solver{sys, seeds, flagged, {}};
  const detail::ContourData top = detail::contour(sys, w);
  solver.solve(w, top, 0);
  auto& roots = solver.roots;

  // conjugate closure for the (real-coefficient) system
  for (size_t i = 0; i < roots.size(); ++i) {
    if (roots[i].lambda.imag() <= 1e-10) continue;
    for (size_t j = 0; j < roots.size(); ++j) {
      if (roots[j].lambda.imag() >= -1e-10) continue;
      if (std::abs(std::conj(roots[i].lambda) - roots[j].lambda) <
          1e-9 * (1.0 + std::abs(roots[i].lambda))) {
        const cd sym = 0.5 * (roots[i].lambda + std::conj(roots[j].lambda));
        roots[i].lambda = sym;
        roots[j].lambda = std::conj(sym);
        break;
      }
    }
  }
  // roots indistinguishable at the pairing tolerance collapse to one entry
  std::vector<EigenPoint> dedup;
  for (const auto& r : roots) {
    bool merged = false;
    for (auto& d : dedup) {
      if (std::abs(d.lambda - r.lambda) < 1e-9 * (1.0 + std::abs(d.lambda))) {
        d.multiplicity += r.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) dedup.push_back(r);
  }
  if (seeds) {
    for (auto& r : dedup) {
      double best = std::numeric_limits<double>::infinity();
      const Seed* hit = nullptr;
      for (const auto& s : seeds->seeds) {
        const double d = std::abs(r.lambda - s.lambda);
        if (d < best) {
          best = d;
          hit = &s;
        }
      }
      if (hit && best < seeds->r0) {
        r.branch_j = hit->j;
        r.index_k = hit->k;
      }
    }
  }
  std::sort(dedup.begin(), dedup.end(), [](const EigenPoint& a, const EigenPoint& b) {
    if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() < b.lambda.imag();
    return a.lambda.real() < b.lambda.real();
  });
  return dedup;
}

}  // namespace delaysteer

#endif  // DELAYSTEER_SPECTRAL_HPP

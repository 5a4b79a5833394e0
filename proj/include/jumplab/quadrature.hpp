#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "jumplab/common.hpp"

namespace jumplab {

/// Settings for the singular-kernel quadrature stack: radial-angular product
/// rule centered at the evaluation point, geometric radial grading toward the
/// singularity, inner cutoff sequence 1/n with n in {2^j}.
struct QuadratureConfig {
  double r_min = 0x1p-20;     // finest inner cutoff radius (smallest 1/n)
  double r_max = 64.0;        // outer integration radius
  int radial_per_octave = 4;  // Gauss cells per radial octave
  int angular = 32;           // directions per ring (d = 2)
  int cutoff_levels = 8;      // number of cutoff levels, radii r_min * 2^k
  double tolerance = 1e-3;    // relative stability tolerance across cutoffs
  bool tail_extrapolation = true;
};

namespace detail {
// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr double kGaussX[8] = {
    -0.9602898564975362, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975362};
inline constexpr double kGaussW[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};
}  // namespace detail

template <class F>
double integrate_gauss(const F& f, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 8; ++i) s += detail::kGaussW[i] * f(mid + half * detail::kGaussX[i]);
  return s * half;
}

/// Geometric cell edges from lo to hi (lo > 0), `per_octave` cells per octave,
/// with the given breakpoints forced onto the edge set.
inline std::vector<double> geometric_edges(double lo, double hi, int per_octave,
                                           const std::vector<double>& breakpoints = {}) {
  std::vector<double> edges;
  if (!(hi > lo) || lo <= 0.0) return edges;
  double ratio = std::pow(2.0, 1.0 / std::max(per_octave, 1));
  edges.push_back(lo);
  for (double e = lo * ratio; e < hi * (1.0 - 1e-12); e *= ratio) edges.push_back(e);
  edges.push_back(hi);
  for (double b : breakpoints)
    if (b > lo * (1.0 + 1e-12) && b < hi * (1.0 - 1e-12)) edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-12 * (std::abs(a) + std::abs(b)); }),
              edges.end());
  return edges;
}

/// Integral of f over [lo, hi] on geometrically graded cells (singularity,
/// if any, assumed at or below lo).
template <class F>
double integrate_graded(const F& f, double lo, double hi, int per_octave = 4,
                        const std::vector<double>& breakpoints = {}) {
  double s = 0.0;
  auto edges = geometric_edges(lo, hi, per_octave, breakpoints);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) s += integrate_gauss(f, edges[i], edges[i + 1]);
  return s;
}

/// Result of evaluating a radial integral over the cutoff sequence.
struct CutoffRefinement {
  std::vector<double> cutoffs;  // decreasing cutoff radii
  std::vector<double> values;   // integral over (cutoff, r_max) + tail
  double value = 0.0;           // reported value (Richardson-extrapolated)
  double est_error = 0.0;
  double tail = 0.0;  // estimated contribution beyond r_max
  bool stable = false;

  double raw_finest() const { return values.empty() ? 0.0 : values.back(); }
};

/// Integrates the ring profile g(r) (angular factors already folded in) over
/// (cutoff_k, r_max) for every cutoff level, checks stability across the two
/// finest levels and Richardson-extrapolates the cutoff -> 0 remainder.
template <class G>
CutoffRefinement refine_radial(const G& g, const QuadratureConfig& cfg,
                               const std::vector<double>& breakpoints = {1.0}) {
  CutoffRefinement out;
  int levels = std::max(cfg.cutoff_levels, 2);
  for (int k = levels - 1; k >= 0; --k) out.cutoffs.push_back(cfg.r_min * std::pow(2.0, k));
  // cutoffs: decreasing, last = r_min

  std::vector<double> bps = breakpoints;
  for (double c : out.cutoffs) bps.push_back(c);
  auto edges = geometric_edges(cfg.r_min, cfg.r_max, cfg.radial_per_octave, bps);

  std::vector<double> cell(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) cell[i] = integrate_gauss(g, edges[i], edges[i + 1]);

  // Power-law tail estimate beyond r_max from the last two octaves.
  if (cfg.tail_extrapolation) {
    int po = std::max(cfg.radial_per_octave, 1);
    if (static_cast<int>(cell.size()) >= 2 * po) {
      double last = 0.0, prev = 0.0;
      for (int i = 0; i < po; ++i) {
        last += cell[cell.size() - 1 - i];
        prev += cell[cell.size() - 1 - po - i];
      }
      if (prev != 0.0) {
        double rho = last / prev;
        if (rho > 0.0 && rho < 0.95) out.tail = last * rho / (1.0 - rho);
      }
    }
  }

  // Suffix sums from each cutoff.
  for (double c : out.cutoffs) {
    double s = out.tail;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
      if (edges[i] >= c * (1.0 - 1e-12)) s += cell[i];
    out.values.push_back(s);
  }

  // Convergence is judged on successive Richardson extrapolants: a clean
  // power-law remainder I(c) = I - A c^p contracts geometrically, while a
  // divergent integral has non-shrinking increments and never stabilizes.
  std::size_t L = out.values.size();
  double vfin = out.values[L - 1], vprev = out.values[L - 2];
  auto extrapolate = [&](std::size_t j) {  // uses levels j-2, j-1, j
    double d1 = out.values[j - 1] - out.values[j - 2];
    double d2 = out.values[j] - out.values[j - 1];
    if (d1 != 0.0) {
      double rho = d2 / d1;
      if (rho > 0.0 && rho < 0.97) return out.values[j] + d2 * rho / (1.0 - rho);
    }
    return out.values[j];
  };
  out.value = vfin;
  out.est_error = std::abs(vfin - vprev);
  double scale = std::abs(out.value) + 1e-300;
  out.stable = out.est_error <= cfg.tolerance * scale;
  if (L >= 3) {
    double d1 = out.values[L - 2] - out.values[L - 3];
    double d2 = vfin - vprev;
    double rho = d1 != 0.0 ? d2 / d1 : 0.0;
    out.value = extrapolate(L - 1);
    scale = std::abs(out.value) + 1e-300;
    if (L >= 4) {
      out.est_error = std::abs(out.value - extrapolate(L - 2));
      out.stable = (std::abs(d2) <= cfg.tolerance * scale) ||
                   (rho > 0.0 && rho < 0.97 && out.est_error <= cfg.tolerance * scale);
    } else {
      out.stable = std::abs(d2) <= cfg.tolerance * scale || (rho > 0.0 && rho < 0.9);
    }
  }
  return out;
}

/// Integral over (lo, hi) on geometric cells plus a power-law estimate of the
/// tail beyond hi (from the decay ratio of the last two octaves).
template <class G>
double integrate_with_tail(const G& g, double lo, double hi, int per_octave = 4,
                           bool tail_on = true, const std::vector<double>& breakpoints = {}) {
  auto edges = geometric_edges(lo, hi, per_octave, breakpoints);
  std::vector<double> cell(edges.empty() ? 0 : edges.size() - 1);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    cell[i] = integrate_gauss(g, edges[i], edges[i + 1]);
    s += cell[i];
  }
  if (tail_on && static_cast<int>(cell.size()) >= 2 * per_octave) {
    double last = 0.0, prev = 0.0;
    for (int i = 0; i < per_octave; ++i) {
      last += cell[cell.size() - 1 - i];
      prev += cell[cell.size() - 1 - per_octave - i];
    }
    if (prev != 0.0) {
      double rho = last / prev;
      if (rho > 0.0 && rho < 0.95) s += last * rho / (1.0 - rho);
    }
  }
  return s;
}

/// Ring profile of a point integrand around x: in d = 1 the two-point sum at
/// x +- r, in d = 2 the angular trapezoid sum times the Jacobian r.
template <class F>
std::function<double(double)> make_ring(int dim, const Vec& x, F point_fn, int angular = 32) {
  if (dim == 1) {
    return [x, point_fn](double r) {
      Vec ym = x, yp = x;
      ym[0] -= r;
      yp[0] += r;
      return point_fn(ym) + point_fn(yp);
    };
  }
  if (dim == 2) {
    return [x, point_fn, angular](double r) {
      double s = 0.0;
      for (int a = 0; a < angular; ++a) {
        double th = 2.0 * M_PI * (a + 0.5) / angular;
        Vec y = x;
        y[0] += r * std::cos(th);
        y[1] += r * std::sin(th);
        s += point_fn(y);
      }
      return s * (2.0 * M_PI / angular) * r;
    };
  }
  throw std::invalid_argument("ring quadrature supports d = 1 and d = 2 only");
}

}  // namespace jumplab

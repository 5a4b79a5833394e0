#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "jumplab/grid.hpp"
#include "jumplab/kernel.hpp"
#include "jumplab/open_set.hpp"
#include "jumplab/quadrature.hpp"
#include "jumplab/rng.hpp"

namespace jumplab {

enum class RowSumMode { conservative_restricted, truncated_killing };

/// Finite-state jump generator over grid nodes: off-diagonal rates are
/// k(x_i, x_j) * cell_measure outside the band |x_i - x_j| <= 1/n.
/// conservative_restricted zeroes every row sum (kernel restricted to the
/// node set); truncated_killing subtracts the quadrature mass jumping from
/// x_i into environment \ node-cells, so row sums are exactly -outside_mass.
struct GeneratorMatrix {
  Mat L;
  int n = 1;
  std::string kernel_label;
  RowSumMode mode = RowSumMode::conservative_restricted;
  std::vector<Vec> nodes;
  double measure = 0.0;  // per-node cell measure
};

namespace detail {

// Mass jumping from x into (env \ cell-hull of the nodes), d = 1: exact
// segment quadrature graded toward the hull edges; tails extrapolated.
inline double outside_mass_1d(const JumpKernel& k, double x, double hull_lo, double hull_hi,
                              const OpenSetSpec& env, double band, const QuadratureConfig& quad) {
  double env_lo = -std::numeric_limits<double>::infinity();
  double env_hi = std::numeric_limits<double>::infinity();
  if (env.shape == OpenSetSpec::Shape::interval || env.shape == OpenSetSpec::Shape::box) {
    env_lo = env.bounds[0][0];
    env_hi = env.bounds[0][1];
  }
  double total = 0.0;
  Vec xv = point1(x);
  auto f_right = [&](double r) { return k.eval_fn(xv, point1(x + r)); };
  auto f_left = [&](double r) { return k.eval_fn(xv, point1(x - r)); };
  // right segment (hull_hi, env_hi), integrated in r = y - x
  {
    double lo = std::max(hull_hi - x, band);
    double hi = env_hi - x;
    if (std::isinf(hi))
      total += integrate_with_tail(f_right, lo, quad.r_max, quad.radial_per_octave,
                                   quad.tail_extrapolation);
    else if (hi > lo)
      total += integrate_graded(f_right, lo, hi, quad.radial_per_octave);
  }
  // left segment (env_lo, hull_lo), integrated in r = x - y
  {
    double lo = std::max(x - hull_lo, band);
    double hi = x - env_lo;
    if (std::isinf(hi))
      total += integrate_with_tail(f_left, lo, quad.r_max, quad.radial_per_octave,
                                   quad.tail_extrapolation);
    else if (hi > lo)
      total += integrate_graded(f_left, lo, hi, quad.radial_per_octave);
  }
  return total;
}

}  // namespace detail

/// Builds the generator over an explicit node list with per-node cell measure.
/// In truncated_killing mode `env` names the environment whose mass counts as
/// killing: R^d for a plain truncation, or an enclosing open set D for the
/// part-on-G process of a D-censored kernel; the represented cell hull
/// [hull_lo, hull_hi] (d = 1) marks where the Riemann sum already accounts
/// for the mass.
inline GeneratorMatrix generator_from_nodes(const JumpKernel& k, std::vector<Vec> nodes,
                                            double measure, int n, RowSumMode mode,
                                            const QuadratureConfig& quad = {},
                                            const OpenSetSpec* env = nullptr,
                                            double hull_lo = 0.0, double hull_hi = 0.0) {
  GeneratorMatrix g;
  g.n = n;
  g.mode = mode;
  g.kernel_label = k.label;
  g.measure = measure;
  g.nodes = std::move(nodes);
  const int m = static_cast<int>(g.nodes.size());
  if (m > 2000)
    throw std::invalid_argument("generator has " + std::to_string(m) +
                                " nodes; dense resolvent path is limited to 2000");
  const int dim = static_cast<int>(g.nodes[0].size());
  const double band = 1.0 / n;
  g.L = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      double r = (g.nodes[i] - g.nodes[j]).norm();
      if (r <= band) continue;
      double v = k.eval_fn(g.nodes[i], g.nodes[j]) * g.measure;
      if (v < 0.0) throw std::logic_error("negative off-diagonal rate from kernel " + k.label);
      g.L(i, j) = v;
      rowsum += v;
    }
    if (mode == RowSumMode::conservative_restricted) {
      g.L(i, i) = -rowsum;
    } else {
      OpenSetSpec world = OpenSetSpec::whole_space(dim);
      const OpenSetSpec& e = env ? *env : world;
      if (dim != 1) throw std::invalid_argument("truncated_killing generator implemented for d = 1");
      double outside =
          detail::outside_mass_1d(k, g.nodes[i][0], hull_lo, hull_hi, e, band, quad);
      g.L(i, i) = -(rowsum + outside);
    }
  }
  return g;
}

inline GeneratorMatrix discrete_generator(const JumpKernel& k, const Grid& grid, int n,
                                          RowSumMode mode, const QuadratureConfig& quad = {},
                                          const OpenSetSpec* env = nullptr) {
  return generator_from_nodes(k, grid.nodes(), grid.cell_measure(), n, mode, quad, env,
                              grid.box[0][0] - grid.h / 2, grid.box[0][1] + grid.h / 2);
}

/// G_alpha = (alpha I - L)^(-1), dense LU.
inline Mat resolvent(const GeneratorMatrix& g, double alpha) {
  const int m = static_cast<int>(g.L.rows());
  Mat A = alpha * Mat::Identity(m, m) - g.L;
  Eigen::PartialPivLU<Mat> lu(A);
  Mat G = lu.solve(Mat::Identity(m, m));
  if (!G.allFinite()) throw std::runtime_error("singular resolvent system at alpha=" + std::to_string(alpha));
  return G;
}

inline double resolvent_equation_residual(const GeneratorMatrix& g, double alpha, double beta) {
  Mat Ga = resolvent(g, alpha);
  Mat Gb = resolvent(g, beta);
  Mat R = Ga - Gb + (alpha - beta) * Ga * Gb;
  return R.norm() / std::max(Ga.norm(), 1e-300);
}

struct MarkovCheck {
  bool pass = true;
  double min_entry = 0.0;   // min over (alpha G f)_i for all tested f in [0,1]
  double max_entry = 0.0;   // max, must stay <= 1 + slack
  double max_row_applied_to_one = 0.0;
  int witness = -1;         // index of the offending test vector, -1 if none
};

/// alpha G_alpha must map [0,1]-valued vectors into [-slack, 1 + slack].
/// Tests all coordinate vectors, the constant 1, and `n_random` uniform draws.
inline MarkovCheck check_markov(const Mat& G_alpha, double alpha, double slack = 1e-10,
                                std::uint64_t seed = 7, int n_random = 100) {
  MarkovCheck c;
  Mat P = alpha * G_alpha;
  c.min_entry = P.minCoeff();  // covers every coordinate vector at once
  c.max_entry = P.maxCoeff();
  Vec ones = Vec::Ones(P.cols());
  Vec r1 = P * ones;
  c.max_row_applied_to_one = r1.maxCoeff();
  double lo = std::min(0.0, c.min_entry), hi = std::max(r1.maxCoeff(), c.max_entry);
  int witness = -1;
  Rng rng(seed);
  for (int t = 0; t < n_random; ++t) {
    Vec f(P.cols());
    for (int i = 0; i < f.size(); ++i) f[i] = rng.uniform();
    Vec y = P * f;
    if (y.minCoeff() < lo) lo = y.minCoeff();
    if (y.maxCoeff() > hi) {
      hi = y.maxCoeff();
      witness = t;
    }
  }
  c.min_entry = std::min(c.min_entry, lo);
  c.max_entry = std::max(c.max_entry, hi);
  c.pass = (c.min_entry >= -slack) && (c.max_entry <= 1.0 + slack);
  if (!c.pass) c.witness = witness;
  return c;
}

/// Resolvent of the beta-shifted dual generator (transpose construction on a
/// uniform grid) pushed through the Markov check.
inline MarkovCheck check_dual_markov(const GeneratorMatrix& g, double beta, double alpha,
                                     double slack = 1e-10, std::uint64_t seed = 7) {
  const int m = static_cast<int>(g.L.rows());
  Mat A = (alpha + beta) * Mat::Identity(m, m) - g.L.transpose();
  Eigen::PartialPivLU<Mat> lu(A);
  Mat Ghat = lu.solve(Mat::Identity(m, m));
  return check_markov(Ghat, alpha, slack, seed);
}

/// exp(tL) by scaling and squaring.
inline Mat semigroup(const GeneratorMatrix& g, double t) { return (t * g.L).exp(); }

}  // namespace jumplab

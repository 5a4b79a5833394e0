#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "jumplab/common.hpp"
#include "jumplab/rng.hpp"

namespace jumplab {

/// Variable stability exponent alpha(x) with its certified bounds and Hoelder
/// data. Valid fields satisfy
///   0 < alpha_lo <= alpha(x) <= alpha_hi < 2,
///   alpha_hi < 1 + alpha_lo / 2,
///   |alpha(x) - alpha(y)| <= hoelder_M * |x-y|^hoelder_delta,
///   (2 * alpha_hi - alpha_lo) / 2 < hoelder_delta <= 1.
struct ExponentField {
  int dim = 1;
  std::function<double(const Vec&)> alpha;
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;
  double hoelder_M = 0.0;
  double hoelder_delta = 1.0;
  bool is_constant = false;
  std::string label;

  double operator()(const Vec& x) const {
    double a = alpha(x);
    if (!(a > 0.0 && a < 2.0))
      throw std::domain_error("exponent field value outside (0,2) at evaluation point");
    return a;
  }

  /// Checks the declared bounds on randomized points/pairs inside `box_radius`
  /// around the origin. Returns an empty string if everything holds.
  std::string validate(std::uint64_t seed = 1234, double box_radius = 8.0, int n_pairs = 4096) const {
    if (!(alpha_lo > 0.0 && alpha_lo <= alpha_hi && alpha_hi < 2.0)) return "alpha bounds outside (0,2)";
    if (!(alpha_hi < 1.0 + 0.5 * alpha_lo)) return "alpha_hi >= 1 + alpha_lo/2";
    if (!(hoelder_delta > 0.5 * (2.0 * alpha_hi - alpha_lo) && hoelder_delta <= 1.0))
      return "hoelder exponent outside (((2*alpha_hi - alpha_lo)/2, 1]";
    Rng rng(seed);
    for (int i = 0; i < n_pairs; ++i) {
      Vec x(dim), y(dim);
      for (int k = 0; k < dim; ++k) {
        x[k] = rng.uniform(-box_radius, box_radius);
        y[k] = rng.uniform(-box_radius, box_radius);
      }
      double ax = alpha(x), ay = alpha(y);
      if (!(ax >= alpha_lo - 1e-12 && ax <= alpha_hi + 1e-12)) return "alpha(x) outside declared bounds";
      double gap = std::abs(ax - ay);
      double bound = hoelder_M * std::pow((x - y).norm(), hoelder_delta);
      if (gap > bound * (1.0 + 1e-9) + 1e-12) return "Hoelder modulus violated on sampled pair";
    }
    return {};
  }
};

inline ExponentField constant_exponent(double a, int dim = 1) {
  ExponentField ef;
  ef.dim = dim;
  ef.alpha = [a](const Vec&) { return a; };
  ef.alpha_lo = ef.alpha_hi = a;
  ef.hoelder_M = 0.0;
  ef.hoelder_delta = 1.0;
  ef.is_constant = true;
  ef.label = "alpha=" + std::to_string(a);
  return ef;
}

/// alpha(x) = base + amplitude * (1 + tanh(x_1)) / 2, so the bounds are
/// [base, base + amplitude] and the Lipschitz constant is amplitude / 2.
inline ExponentField tanh_exponent(double base, double amplitude, int dim = 1) {
  ExponentField ef;
  ef.dim = dim;
  ef.alpha = [base, amplitude](const Vec& x) { return base + amplitude * 0.5 * (1.0 + std::tanh(x[0])); };
  ef.alpha_lo = base;
  ef.alpha_hi = base + amplitude;
  ef.hoelder_M = 0.5 * amplitude;
  ef.hoelder_delta = 1.0;
  ef.is_constant = (amplitude == 0.0);
  ef.label = "alpha=tanh(" + std::to_string(base) + "," + std::to_string(amplitude) + ")";
  return ef;
}

/// Admissible range of the small-jump integrability exponent gamma: the open
/// interval
///   ( (d + 2*alpha_hi - 2*delta - alpha_lo) / (d + alpha_hi - delta) ,
///      d / (d + alpha_hi - delta) )
/// intersected with (0, 1].
struct GammaInterval {
  double lo = 0.0;      // open lower end (after clamping at 0)
  double hi = 1.0;      // upper end
  bool hi_inclusive = false;
  bool empty = true;

  /// Default selection: midpoint of the admissible interval.
  double pick() const {
    if (empty) throw std::runtime_error("empty admissible gamma interval");
    return 0.5 * (lo + hi);
  }
};

inline GammaInterval admissible_gamma(const ExponentField& ef) {
  double d = ef.dim, ah = ef.alpha_hi, al = ef.alpha_lo, del = ef.hoelder_delta;
  double denom = d + ah - del;
  GammaInterval g;
  double lo_raw = (d + 2.0 * ah - 2.0 * del - al) / denom;
  double hi_raw = d / denom;
  g.lo = std::max(lo_raw, 0.0);
  if (hi_raw > 1.0) {
    g.hi = 1.0;
    g.hi_inclusive = true;
    g.empty = !(g.lo < 1.0);
  } else {
    g.hi = hi_raw;
    g.hi_inclusive = false;
    g.empty = !(g.lo < g.hi);
  }
  return g;
}

}  // namespace jumplab

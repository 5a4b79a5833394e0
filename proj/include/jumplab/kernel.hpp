#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "jumplab/common.hpp"
#include "jumplab/exponent_field.hpp"
#include "jumplab/rng.hpp"

namespace jumplab {

/// Dense tabulation of a bounded kernel on a uniform 1-d lattice.
/// values(i, j) = k(x_i, x_j). Evaluation between nodes is bilinear;
/// integrals against tabulated kernels use the native lattice sums so that
/// matrix-level constructions and condition constants stay consistent.
struct KernelTable {
  double lo = 0.0, hi = 0.0;
  int n = 0;
  Mat values;
  bool transposed = false;

  double h() const { return (hi - lo) / (n - 1); }
  double node(int i) const { return lo + i * h(); }

  double at(int i, int j) const { return transposed ? values(j, i) : values(i, j); }

  double eval(double x, double y) const {
    if (x < lo || x > hi || y < lo || y > hi) return 0.0;
    double hh = h();
    double fx = (x - lo) / hh, fy = (y - lo) / hh;
    int i = std::min(static_cast<int>(fx), n - 2);
    int j = std::min(static_cast<int>(fy), n - 2);
    double tx = fx - i, ty = fy - j;
    return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) +
           (1 - tx) * ty * at(i, j + 1) + tx * ty * at(i + 1, j + 1);
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    out.precision(17);
    out << "# kernel table d=1 n=" << n << " lo=" << lo << " hi=" << hi << "\n";
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out << at(i, j) << (j + 1 == n ? '\n' : ' ');
    }
  }

  /// Every stride-th node; keeps lattice sums consistent with generator
  /// matrices that cannot exceed the dense-solver size cap.
  KernelTable downsample(int stride) const {
    KernelTable t;
    t.n = (n - 1) / stride + 1;
    t.lo = lo;
    t.hi = lo + (t.n - 1) * stride * h();
    t.values.resize(t.n, t.n);
    for (int i = 0; i < t.n; ++i)
      for (int j = 0; j < t.n; ++j) t.values(i, j) = at(i * stride, j * stride);
    return t;
  }

  static KernelTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open kernel table: " + path);
    std::string header;
    std::getline(in, header);
    KernelTable t;
    auto grab = [&header](const std::string& key) {
      auto pos = header.find(key + "=");
      if (pos == std::string::npos) throw std::runtime_error("kernel table header missing " + key);
      return std::stod(header.substr(pos + key.size() + 1));
    };
    t.n = static_cast<int>(grab("n"));
    t.lo = grab("lo");
    t.hi = grab("hi");
    t.values.resize(t.n, t.n);
    for (int i = 0; i < t.n; ++i)
      for (int j = 0; j < t.n; ++j)
        if (!(in >> t.values(i, j))) throw std::runtime_error("kernel table truncated: " + path);
    return t;
  }
};

/// A nonnegative jump kernel k(x, y), evaluable off the diagonal.
struct JumpKernel {
  int dim = 1;
  std::function<double(const Vec&, const Vec&)> eval_fn;
  std::string label;
  std::optional<bool> symmetric_hint;            // set by constructors that know
  std::shared_ptr<const KernelTable> table;      // non-null for tabulated kernels

  double operator()(const Vec& x, const Vec& y) const {
    if ((x - y).norm() == 0.0) throw std::domain_error("jump kernel evaluated on the diagonal");
    return eval_fn(x, y);
  }
};

/// Splits k into its symmetric and antisymmetric parts,
///   k_s = (k(x,y) + k(y,x)) / 2,   k_a = (k(x,y) - k(y,x)) / 2.
struct KernelDecomposition {
  int dim = 1;
  std::function<double(const Vec&, const Vec&)> ks;
  std::function<double(const Vec&, const Vec&)> ka;
  bool symmetric = false;  // k_a identically zero; integrals short-circuit to 0
};

/// Probes whether k(x,y) - k(y,x) vanishes exactly on randomized pairs.
inline bool probe_symmetric(const JumpKernel& k, std::uint64_t seed = 99, int pairs = 64,
                            double box_radius = 4.0) {
  Rng rng(seed);
  for (int i = 0; i < pairs; ++i) {
    Vec x(k.dim), y(k.dim);
    for (int c = 0; c < k.dim; ++c) {
      x[c] = rng.uniform(-box_radius, box_radius);
      y[c] = rng.uniform(-box_radius, box_radius);
    }
    if ((x - y).norm() == 0.0) continue;
    if (k.eval_fn(x, y) != k.eval_fn(y, x)) return false;
  }
  return true;
}

inline KernelDecomposition decompose(const JumpKernel& k) {
  KernelDecomposition d;
  d.dim = k.dim;
  d.symmetric = k.symmetric_hint.value_or(false) || probe_symmetric(k);
  auto f = k.eval_fn;
  int dim = k.dim;
  auto guard = [dim](const Vec& x, const Vec& y) {
    if ((x - y).norm() == 0.0) throw std::domain_error("kernel decomposition evaluated on the diagonal");
  };
  d.ks = [f, guard](const Vec& x, const Vec& y) {
    guard(x, y);
    return 0.5 * (f(x, y) + f(y, x));
  };
  if (d.symmetric) {
    d.ka = [guard](const Vec& x, const Vec& y) {
      guard(x, y);
      return 0.0;
    };
  } else {
    d.ka = [f, guard](const Vec& x, const Vec& y) {
      guard(x, y);
      return 0.5 * (f(x, y) - f(y, x));
    };
  }
  return d;
}

/// k*(x, y) = k(y, x). Shares k_s with k and negates k_a; an involution.
inline JumpKernel dual_kernel(const JumpKernel& k) {
  JumpKernel d;
  d.dim = k.dim;
  auto f = k.eval_fn;
  d.eval_fn = [f](const Vec& x, const Vec& y) { return f(y, x); };
  d.label = k.label.size() >= 1 && k.label.back() == '*' ? k.label.substr(0, k.label.size() - 1)
                                                         : k.label + "*";
  d.symmetric_hint = k.symmetric_hint;
  if (k.table) {
    auto t = std::make_shared<KernelTable>(*k.table);
    t->transposed = !t->transposed;
    d.table = t;
  }
  return d;
}

enum class Normalization { paper_weight, levy_constant };

inline const char* to_string(Normalization n) {
  return n == Normalization::paper_weight ? "paper_weight" : "levy_constant";
}

/// Weight in front of |x-y|^(-d-alpha).
///
/// levy_constant is the constant of the rotationally symmetric alpha-stable
/// Levy measure, alpha 2^(alpha-1) Gamma((alpha+d)/2) / (pi^(d/2) Gamma(1-alpha/2)).
/// With it the generator symbol is exactly -|u|^alpha (verified by the
/// characteristic-function tests), so it is the simulation default.
/// paper_weight is Gamma((1+alpha)/2) Gamma((alpha+d)/2) sin(pi alpha/2)
/// / (2^(1-alpha) pi^(d/2+1)); the two differ by 2 Gamma(alpha/2+1) / Gamma((alpha+1)/2).
inline double stable_weight(double alpha, int d, Normalization norm) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::domain_error("stable weight needs alpha in (0,2)");
  if (norm == Normalization::levy_constant) {
    return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma(0.5 * (alpha + d)) /
           (std::pow(M_PI, 0.5 * d) * std::tgamma(1.0 - 0.5 * alpha));
  }
  return std::tgamma(0.5 * (1.0 + alpha)) * std::tgamma(0.5 * (alpha + d)) *
         std::sin(0.5 * M_PI * alpha) / (std::pow(2.0, 1.0 - alpha) * std::pow(M_PI, 0.5 * d + 1.0));
}

/// k(x, y) = w(alpha(x)) |x - y|^(-d - alpha(x)).
inline JumpKernel stable_like_kernel(const ExponentField& ef, Normalization norm) {
  JumpKernel k;
  k.dim = ef.dim;
  int d = ef.dim;
  ExponentField field = ef;
  k.eval_fn = [field, d, norm](const Vec& x, const Vec& y) {
    double a = field(x);
    return stable_weight(a, d, norm) * std::pow((x - y).norm(), -(d + a));
  };
  k.label = "stable_like(" + ef.label + "," + to_string(norm) + ")";
  k.symmetric_hint = ef.is_constant;
  return k;
}

/// k(x, y) = c |x - y|^(-p), symmetric by construction.
inline JumpKernel symmetric_power_kernel(int dim, double p, double c = 1.0) {
  JumpKernel k;
  k.dim = dim;
  k.eval_fn = [p, c](const Vec& x, const Vec& y) { return c * std::pow((x - y).norm(), -p); };
  k.label = "symmetric_power(p=" + std::to_string(p) + ")";
  k.symmetric_hint = true;
  return k;
}

inline JumpKernel tabulated_kernel(std::shared_ptr<const KernelTable> table, std::string label) {
  JumpKernel k;
  k.dim = 1;
  k.table = table;
  k.eval_fn = [table](const Vec& x, const Vec& y) { return table->eval(x[0], y[0]); };
  k.label = std::move(label);
  return k;
}

}  // namespace jumplab

#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "jumplab/kernel.hpp"
#include "jumplab/quadrature.hpp"

namespace jumplab {

/// One-dimensional diffusion with generator (1/2) u'' + lambda b(x) u'.
/// Its transition density q_t(x, y), tabulated at t = t0, is a probability
/// kernel whose antisymmetric part grows with lambda; the associated jump
/// form loses nonnegative definiteness once the drift is strong enough.
struct DriftedBMConfig {
  double lambda = 1.0;
  // t0 must be small enough that the small-time expansion of the form energy
  // is still visible against the O(t0^2) advection terms; around 2e-4 the
  // default bump/drift scan has a clear sign change, 0.05 does not.
  double t0 = 2e-4;
  double domain_lo = -3.0, domain_hi = 3.0;
  int nodes = 2049;
  int time_steps = 96;
  int rannacher_half_steps = 4;  // backward-Euler half steps before Crank-Nicolson
  double mass_tol = 1e-3;

  // default drift x(1-x^2)^2 on [-1,1]; b' = (1-x^2)(1-5x^2) is strictly
  // negative on (1/sqrt(5), 1)
  std::function<double(double)> b = [](double x) {
    if (std::abs(x) >= 1.0) return 0.0;
    double g = 1.0 - x * x;
    return x * g * g;
  };
  std::function<double(double)> b_prime = [](double x) {
    if (std::abs(x) >= 1.0) return 0.0;
    return (1.0 - x * x) * (1.0 - 5.0 * x * x);
  };
  std::function<double(double)> b_antiderivative = [](double x) {  // int_0^x b
    double a = std::min(std::abs(x), 1.0);
    double a2 = a * a;
    return a2 / 2.0 - a2 * a2 / 2.0 + a2 * a2 * a2 / 6.0;
  };

  double speed_weight(double x) const { return 2.0 * std::exp(2.0 * lambda * b_antiderivative(x)); }
};

namespace detail {

// Thomas solver with the elimination coefficients factored once; solves are
// then independent per right-hand side and safe to run in parallel.
struct Tridiag {
  std::vector<double> lower, cp, minv;
  int n = 0;

  void factor(const std::vector<double>& lo, const std::vector<double>& di,
              const std::vector<double>& up) {
    n = static_cast<int>(di.size());
    lower = lo;
    cp.resize(n);
    minv.resize(n);
    minv[0] = 1.0 / di[0];
    cp[0] = up[0] * minv[0];
    for (int i = 1; i < n; ++i) {
      minv[i] = 1.0 / (di[i] - lo[i] * cp[i - 1]);
      cp[i] = up[i] * minv[i];
    }
  }

  void solve_inplace(double* d) const {
    d[0] *= minv[0];
    for (int i = 1; i < n; ++i) d[i] = (d[i] - lower[i] * d[i - 1]) * minv[i];
    for (int i = n - 2; i >= 0; --i) d[i] -= cp[i] * d[i + 1];
  }
};

}  // namespace detail

/// Result of the transition-density build: the tabulated kernel plus the
/// conservation and duality diagnostics.
struct DriftedBMKernel {
  JumpKernel kernel;
  std::shared_ptr<const KernelTable> table;
  std::vector<double> m_weight;  // speed density at the nodes
  double max_mass_defect = 0.0;
  double duality_residual = 0.0;  // max |q(y,x) - m(x) q(x,y) / m(y)|
};

/// Solves the forward equation in flux form with no-flux ends,
///   d/dt q = d/dy [ (m/2) d/dy (q / m) ],   m(x) = 2 exp(2 lambda int_0^x b),
/// for every source node at once (Rannacher-smoothed Crank-Nicolson), and
/// tabulates k(x, y) = q_{t0}(x, y). Mass is conserved by construction and the
/// scheme commutes with the m-weighting, so the duality identity holds to
/// rounding.
inline DriftedBMKernel build_drifted_bm_kernel(const DriftedBMConfig& cfg) {
  const int n = cfg.nodes;
  const double h = (cfg.domain_hi - cfg.domain_lo) / (n - 1);
  std::vector<double> m(n), a_half(n - 1);
  for (int i = 0; i < n; ++i) m[i] = cfg.speed_weight(cfg.domain_lo + i * h);
  for (int i = 0; i + 1 < n; ++i) a_half[i] = 0.5 * cfg.speed_weight(cfg.domain_lo + (i + 0.5) * h);

  // T rho|_i = [a_{i+1/2} ((rho/m)_{i+1} - (rho/m)_i) - a_{i-1/2} ((rho/m)_i - (rho/m)_{i-1})] / h^2
  std::vector<double> tl(n, 0.0), td(n, 0.0), tu(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double ap = (i + 1 < n) ? a_half[i] : 0.0;
    double am = (i > 0) ? a_half[i - 1] : 0.0;
    td[i] = -(ap + am) / (h * h * m[i]);
    if (i + 1 < n) tu[i] = ap / (h * h * m[i + 1]);
    if (i > 0) tl[i] = am / (h * h * m[i - 1]);
  }
  auto make_solver = [&](double c) {
    detail::Tridiag t;
    std::vector<double> lo(n), di(n), up(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = -c * tl[i];
      di[i] = 1.0 - c * td[i];
      up[i] = -c * tu[i];
    }
    t.factor(lo, di, up);
    return t;
  };

  const double tau = cfg.t0 / cfg.time_steps;
  const int n_be = cfg.rannacher_half_steps;        // backward Euler, step tau/2
  const int n_cn = cfg.time_steps - n_be / 2;       // Crank-Nicolson, step tau
  if (n_cn < 0) throw std::invalid_argument("rannacher_half_steps too large for time_steps");

  Mat Q = Mat::Identity(n, n) / h;
  auto solver = make_solver(tau / 2.0);  // same left operator for BE and CN
#pragma omp parallel for schedule(static)
  for (int c = 0; c < n; ++c) {
    double* col = Q.col(c).data();
    std::vector<double> rhs(n);
    for (int s = 0; s < n_be; ++s) solver.solve_inplace(col);
    for (int s = 0; s < n_cn; ++s) {
      for (int i = 0; i < n; ++i) {
        double v = td[i] * col[i];
        if (i > 0) v += tl[i] * col[i - 1];
        if (i + 1 < n) v += tu[i] * col[i + 1];
        rhs[i] = col[i] + (tau / 2.0) * v;
      }
      for (int i = 0; i < n; ++i) col[i] = rhs[i];
      solver.solve_inplace(col);
    }
  }

  DriftedBMKernel out;
  out.m_weight = m;
  for (int c = 0; c < n; ++c) {
    double mass = Q.col(c).sum() * h;
    out.max_mass_defect = std::max(out.max_mass_defect, std::abs(mass - 1.0));
  }
  if (out.max_mass_defect > cfg.mass_tol)
    throw std::runtime_error("transition-density mass defect " + std::to_string(out.max_mass_defect) +
                             " exceeds tolerance " + std::to_string(cfg.mass_tol));

  auto table = std::make_shared<KernelTable>();
  table->lo = cfg.domain_lo;
  table->hi = cfg.domain_hi;
  table->n = n;
  table->values.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) table->values(i, j) = Q(j, i);  // k(x_i, y_j)

  double res = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double lhs = table->values(j, i);
      double rhs = m[i] * table->values(i, j) / m[j];
      res = std::max(res, std::abs(lhs - rhs));
    }
  out.duality_residual = res;

  out.table = table;
  out.kernel = tabulated_kernel(table, "drifted_bm(lambda=" + std::to_string(cfg.lambda) + ")");
  return out;
}

/// Discrete jump form of a tabulated kernel:
///   eta(u, u) = - sum_{i,j} (u_j - u_i) k(x_i, x_j) u_i h^2.
inline double table_form_energy(const KernelTable& t, const std::function<double(double)>& u) {
  const double h = t.h();
  std::vector<double> uv(t.n);
  for (int i = 0; i < t.n; ++i) uv[i] = u(t.node(i));
  double acc = 0.0;
  for (int i = 0; i < t.n; ++i) {
    if (uv[i] == 0.0) continue;  // integrand carries u(x) as a factor
    double inner = 0.0;
    for (int j = 0; j < t.n; ++j) inner += (uv[j] - uv[i]) * t.at(i, j);
    acc += inner * uv[i];
  }
  return -acc * h * h;
}

struct NegativityResult {
  bool found = false;
  double lambda_star = 0.0;
  double eta_value = 0.0;  // eta(u0, u0) at lambda_star
  double predictor = 0.0;  // (1/2)(int u0'^2 + lambda* int b' u0^2)
  std::vector<std::pair<double, double>> scan;  // (lambda, eta(u0,u0))
};

/// Scans lambda upward, rebuilding the transition-density kernel each time,
/// until the jump form goes strictly negative on u0. Also evaluates the
/// small-t predictor (1/2)(int u0'^2 dx + lambda int b' u0^2 dx).
inline NegativityResult negativity_witness(DriftedBMConfig cfg, const BumpFunction& u0,
                                           const std::vector<double>& lambda_scan) {
  NegativityResult res;
  auto u = [&](double x) { return u0(x); };
  for (double lam : lambda_scan) {
    cfg.lambda = lam;
    auto built = build_drifted_bm_kernel(cfg);
    double eta = table_form_energy(*built.table, u);
    res.scan.emplace_back(lam, eta);
    if (!res.found && eta < 0.0) {
      res.found = true;
      res.lambda_star = lam;
      res.eta_value = eta;
      // integrate |x - center| in (0, radius), both sides of the bump
      double du2_full = 0.0, bu2 = 0.0;
      auto cells = geometric_edges(1e-9 * u0.radius, u0.radius, 8);
      for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
        du2_full += integrate_gauss(
            [&](double r) {
              double dl = u0.deriv(u0.center - r), dr = u0.deriv(u0.center + r);
              return dl * dl + dr * dr;
            },
            cells[c], cells[c + 1]);
        bu2 += integrate_gauss(
            [&](double r) {
              double ul = u0(u0.center - r), ur = u0(u0.center + r);
              return cfg.b_prime(u0.center - r) * ul * ul + cfg.b_prime(u0.center + r) * ur * ur;
            },
            cells[c], cells[c + 1]);
      }
      res.predictor = 0.5 * (du2_full + lam * bu2);
      break;
    }
  }
  return res;
}

}  // namespace jumplab

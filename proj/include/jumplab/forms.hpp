#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jumplab/basis.hpp"
#include "jumplab/conditions.hpp"
#include "jumplab/kernel.hpp"
#include "jumplab/rng.hpp"

namespace jumplab {

enum class FormKind { eta, gamma, B };

inline const char* to_string(FormKind k) {
  switch (k) {
    case FormKind::eta: return "eta";
    case FormKind::gamma: return "gamma";
    default: return "B";
  }
}

/// Galerkin matrix of a truncated bilinear form: A(i, j) ~ form(phi_j, phi_i).
struct FormMatrix {
  FormKind kind = FormKind::eta;
  int n = 1;  // diagonal band |x - y| <= 1/n excluded
  Mat A;
  double asym_residual = 0.0;
  std::uint64_t grid_hash = 0, basis_hash = 0;

  void save_triplets(const std::string& path) const {
    std::ofstream out(path);
    out.precision(17);
    out << "# form kind=" << to_string(kind) << " n=" << n << " grid=" << grid_hash
        << " basis=" << basis_hash << "\n";
    for (int i = 0; i < A.rows(); ++i)
      for (int j = 0; j < A.cols(); ++j)
        if (A(i, j) != 0.0) out << i << " " << j << " " << A(i, j) << "\n";
  }
};

struct AssemblyOptions {
  bool subdivide_band = true;  // split cell pairs straddling the band once
};

/// The three truncated-form matrices assembled with one matched quadrature
/// (midpoint rule on grid-cell pairs, diagonal band excluded by the cell-pair
/// center criterion), plus the midpoint mass matrix. Matched quadrature makes
/// the identity 2 eta = gamma + 2 B hold entrywise to rounding.
struct FormAssembly {
  FormMatrix eta, gamma, B;
  Mat mass;
  int n = 1;
};

inline FormAssembly assemble_forms(const JumpKernel& k, const Grid& grid, const BasisSet& basis,
                                   int n, AssemblyOptions opt = {}) {
  const int nb = basis.size();
  const int nc = grid.n_cells();
  const double mu = grid.cell_measure();
  const double band = 1.0 / n;
  const double diam = grid.h * std::sqrt(static_cast<double>(grid.dim));
  auto kd = decompose(k);

  FormAssembly out;
  out.n = n;
  for (FormMatrix* m : {&out.eta, &out.gamma, &out.B}) {
    m->n = n;
    m->A = Mat::Zero(nb, nb);
    m->grid_hash = grid.hash();
    m->basis_hash = basis.hash();
  }
  out.eta.kind = FormKind::eta;
  out.gamma.kind = FormKind::gamma;
  out.B.kind = FormKind::B;

  std::vector<Vec> centers(nc);
  for (int c = 0; c < nc; ++c) centers[c] = grid.cell_center(c);

  // Subcell centers for the optional one-level band refinement.
  const int nsub = 1 << grid.dim;
  auto subcenter = [&](int cell, int corner) {
    Vec x = centers[cell];
    for (int kk = 0; kk < grid.dim; ++kk) x[kk] += (((corner >> kk) & 1) ? 0.25 : -0.25) * grid.h;
    return x;
  };

  std::vector<std::vector<int>> supp(nb);
  for (int i = 0; i < nb; ++i) {
    for (int c : basis.support_cells(i))
      if (c >= 0 && c < nc) supp[i].push_back(c);
    std::sort(supp[i].begin(), supp[i].end());
  }

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < nb; ++i) {
    for (int j = 0; j < nb; ++j) {
      const auto& Si = supp[i];
      const auto& Sj = supp[j];
      std::vector<int> S;
      std::set_union(Si.begin(), Si.end(), Sj.begin(), Sj.end(), std::back_inserter(S));
      auto in = [](const std::vector<int>& v, int c) {
        return std::binary_search(v.begin(), v.end(), c);
      };

      double eta_ij = 0.0, gam_ij = 0.0, b_ij = 0.0;
      auto add_sample = [&](const Vec& xa, const Vec& xb, double w) {
        double kab = k.eval_fn(xa, xb);
        double kba = k.eval_fn(xb, xa);
        double ks = 0.5 * (kab + kba);
        double ka = kd.symmetric ? 0.0 : 0.5 * (kab - kba);
        double pja = basis.eval(j, xa), pjb = basis.eval(j, xb);
        double pia = basis.eval(i, xa), pib = basis.eval(i, xb);
        eta_ij -= (pjb - pja) * pia * kab * w;
        gam_ij += (pjb - pja) * (pib - pia) * ks * w;
        b_ij += (pja - pjb) * pib * ka * w;
      };
      auto add_pair = [&](int p, int q) {
        double r = (centers[p] - centers[q]).norm();
        if (opt.subdivide_band && std::abs(r - band) <= diam) {
          double wsub = (mu / nsub) * (mu / nsub);
          for (int sp = 0; sp < nsub; ++sp)
            for (int sq = 0; sq < nsub; ++sq) {
              Vec xa = subcenter(p, sp), xb = subcenter(q, sq);
              if ((xa - xb).norm() > band) add_sample(xa, xb, wsub);
            }
        } else if (r > band) {
          add_sample(centers[p], centers[q], mu * mu);
        }
      };
      // Ordered pairs (p, q) with p or q inside supp(i) and supp(j); cells
      // are visited in a fixed order so sums do not depend on threading.
      auto cond = [&](int p, int q) {
        return (in(Si, p) || in(Si, q)) && (in(Sj, p) || in(Sj, q));
      };
      for (int p : S)
        for (int q = 0; q < nc; ++q)
          if (q != p && cond(p, q)) add_pair(p, q);
      for (int q : S)
        for (int p = 0; p < nc; ++p)
          if (p != q && !in(S, p) && cond(p, q)) add_pair(p, q);

      if (!std::isfinite(eta_ij) || !std::isfinite(gam_ij) || !std::isfinite(b_ij))
        throw std::runtime_error("form assembly produced a non-finite entry at basis pair (" +
                                 std::to_string(i) + "," + std::to_string(j) + ")");
      out.eta.A(i, j) = eta_ij;
      out.gamma.A(i, j) = gam_ij;
      out.B.A(i, j) = b_ij;
    }
  }

  auto asym = [](const Mat& A) {
    double na = A.norm();
    return na == 0.0 ? 0.0 : (A - A.transpose()).norm() / na;
  };
  out.gamma.asym_residual = asym(out.gamma.A);
  out.gamma.A = 0.5 * (out.gamma.A + out.gamma.A.transpose()).eval();
  out.eta.asym_residual = asym(out.eta.A);
  out.B.asym_residual = asym(out.B.A);
  out.mass = basis.mass_matrix();
  return out;
}

inline FormMatrix assemble_gamma(const JumpKernel& k, const Grid& g, const BasisSet& b, int n,
                                 AssemblyOptions opt = {}) {
  return assemble_forms(k, g, b, n, opt).gamma;
}
inline FormMatrix assemble_B(const JumpKernel& k, const Grid& g, const BasisSet& b, int n,
                             AssemblyOptions opt = {}) {
  return assemble_forms(k, g, b, n, opt).B;
}
inline FormMatrix assemble_eta_n(const JumpKernel& k, const Grid& g, const BasisSet& b, int n,
                                 AssemblyOptions opt = {}) {
  return assemble_forms(k, g, b, n, opt).eta;
}

struct BoundCheck {
  std::string name;
  bool pass = true;
  double worst_margin = 0.0;  // scaled margin; negative below -slack means violation
  int witness = -1;
};

/// Quantitative form inequalities on trial coefficient vectors:
///   (a) eta_b0(u,u) >= Gamma_b0(u,u)/4
///   (b) eta_b0(u,u) <= (2+sqrt(2))/2 * Gamma_b0(u,u)
///   (c) |eta(u,v)|  <= 2 sqrt(2) sqrt(eta_b0(u,u)) sqrt(eta_b0(v,v))
///   (d) |B(u,v)|    <= C4 ||v|| sqrt(Gamma(u,u))
/// with beta0, C4 taken from the kernel's ConditionReport.
struct BoundsReport {
  std::vector<BoundCheck> checks;
  double sector_ratio_sup = 0.0;
  double beta0 = 0.0, C4 = 0.0;
  bool all_pass = true;
};

inline void to_json(nlohmann::json& j, const BoundsReport& r) {
  j["beta0"] = r.beta0;
  j["C4"] = r.C4;
  j["sector_ratio_sup"] = r.sector_ratio_sup;
  j["all_pass"] = r.all_pass;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : r.checks)
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"worst_margin", c.worst_margin}, {"witness", c.witness}});
  j["checks"] = arr;
}

inline BoundsReport verify_bounds(const FormAssembly& fa, const ConditionReport& rep,
                                  int n_random = 1000, double slack = 1e-10,
                                  std::uint64_t seed = 2024) {
  const int nb = static_cast<int>(fa.eta.A.rows());
  const Mat& E = fa.eta.A;
  const Mat& G = fa.gamma.A;
  const Mat& B = fa.B.A;
  const Mat& M = fa.mass;
  const double b0 = rep.beta0, c4 = rep.C4;

  std::vector<Vec> trials;
  for (int i = 0; i < nb; ++i) trials.push_back(Vec::Unit(nb, i));
  Rng rng(seed);
  for (int t = 0; t < n_random; ++t) {
    Vec u(nb);
    for (int i = 0; i < nb; ++i) u[i] = rng.uniform(-1.0, 1.0);
    trials.push_back(u);
  }

  BoundsReport out;
  out.beta0 = b0;
  out.C4 = c4;
  BoundCheck lower{"eta_b0 >= Gamma_b0/4"}, upper{"eta_b0 <= (2+sqrt2)/2 Gamma_b0"},
      sector{"sector |eta(u,v)| <= 2 sqrt2"}, bbound{"|B(u,v)| <= C4 ||v|| sqrt(Gamma(u,u))"};
  lower.worst_margin = upper.worst_margin = sector.worst_margin = bbound.worst_margin = 1e300;

  const double upper_c = 0.5 * (2.0 + std::sqrt(2.0));
  const double sector_c = 2.0 * std::sqrt(2.0);
  std::vector<double> eb0(trials.size()), gb0(trials.size()), g0(trials.size()), nrm(trials.size());
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const Vec& u = trials[t];
    double uMu = u.dot(M * u);
    double e = u.dot(E * u) + b0 * uMu;
    double g = u.dot(G * u) + b0 * uMu;
    eb0[t] = e;
    gb0[t] = g;
    g0[t] = u.dot(G * u);
    nrm[t] = std::sqrt(std::max(uMu, 0.0));
    double scale = std::abs(e) + std::abs(g) + 1e-300;
    if (uMu == 0.0 && g == 0.0) continue;  // skip the zero vector in ratios
    double ma = (e - 0.25 * g) / scale;
    double mb = (upper_c * g - e) / scale;
    if (ma < lower.worst_margin) {
      lower.worst_margin = ma;
      lower.witness = static_cast<int>(t);
    }
    if (mb < upper.worst_margin) {
      upper.worst_margin = mb;
      upper.witness = static_cast<int>(t);
    }
    if (ma < -slack) lower.pass = false;
    if (mb < -slack) upper.pass = false;
  }

  // Pair checks on coordinate pairs plus consecutive random pairs.
  auto pair_check = [&](std::size_t a, std::size_t b) {
    const Vec&u = trials[a];
    const Vec& v = trials[b];
    double eta_uv = v.dot(E * u);
    double bound = sector_c * std::sqrt(std::max(eb0[a], 0.0)) * std::sqrt(std::max(eb0[b], 0.0));
    double scale = std::abs(eta_uv) + bound + 1e-300;
    double margin = (bound - std::abs(eta_uv)) / scale;
    if (margin < sector.worst_margin) {
      sector.worst_margin = margin;
      sector.witness = static_cast<int>(a);
    }
    if (margin < -slack) sector.pass = false;
    if (eb0[a] > 0.0 && eb0[b] > 0.0)
      out.sector_ratio_sup = std::max(out.sector_ratio_sup,
                                      std::abs(eta_uv) / (std::sqrt(eb0[a]) * std::sqrt(eb0[b])));
    double b_uv = std::abs(v.dot(B * u));
    double b_bound = c4 * nrm[b] * std::sqrt(std::max(g0[a], 0.0));
    double bscale = b_uv + b_bound + 1e-300;
    double bmargin = (b_bound - b_uv) / bscale;
    if (b_uv == 0.0 && b_bound == 0.0) bmargin = 0.0;
    if (bmargin < bbound.worst_margin) {
      bbound.worst_margin = bmargin;
      bbound.witness = static_cast<int>(a);
    }
    if (bmargin < -slack) bbound.pass = false;
  };
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) pair_check(i, j);
  for (std::size_t t = nb; t + 1 < trials.size(); ++t) pair_check(t, t + 1);

  out.checks = {lower, upper, sector, bbound};
  for (const auto& c : out.checks) out.all_pass = out.all_pass && c.pass;
  return out;
}

/// Markovian-criterion surrogate on grid functions: evaluates
/// eta^n(Uu, u - Uu) with Uu = (0 v u) ^ 1 by direct double quadrature on the
/// interpolated function (Uu leaves the tent-function span).
struct ContractionReport {
  std::vector<double> values;  // per (sample, n), flattened sample-major
  double min_value = 0.0;
  bool pass = true;
};

inline ContractionReport check_unit_contraction(const JumpKernel& k, const Grid& grid,
                                                const std::vector<int>& n_levels,
                                                const std::vector<Vec>& u_samples,
                                                double tolerance = 1e-12) {
  const int nc = grid.n_cells();
  const double mu = grid.cell_measure();
  std::vector<Vec> centers(nc);
  for (int c = 0; c < nc; ++c) centers[c] = grid.cell_center(c);

  ContractionReport rep;
  rep.min_value = 1e300;
  for (const Vec& u : u_samples) {
    std::vector<double> uc(nc), Uc(nc);
    for (int c = 0; c < nc; ++c) {
      uc[c] = grid.interpolate(u, centers[c]);
      Uc[c] = std::min(1.0, std::max(0.0, uc[c]));
    }
    for (int n : n_levels) {
      double band = 1.0 / n;
      double acc = 0.0;
      for (int p = 0; p < nc; ++p) {
        double w = (uc[p] - Uc[p]) * mu * mu;
        if (w == 0.0) continue;
        for (int q = 0; q < nc; ++q) {
          if (q == p) continue;
          if ((centers[p] - centers[q]).norm() <= band) continue;
          acc -= (Uc[q] - Uc[p]) * w * k.eval_fn(centers[p], centers[q]);
        }
      }
      rep.values.push_back(acc);
      rep.min_value = std::min(rep.min_value, acc);
      if (acc < -tolerance) rep.pass = false;
    }
  }
  if (rep.values.empty()) rep.min_value = 0.0;
  return rep;
}

}  // namespace jumplab

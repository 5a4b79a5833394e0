#pragma once

#include <cmath>
#include <vector>

#include "jumplab/grid.hpp"

namespace jumplab {

/// Tensor-product tent functions centered at interior lattice nodes. Each is
/// Lipschitz with compact support inside the grid box, peak value 1 and
/// support radius h per axis.
struct BasisSet {
  Grid grid;
  std::vector<int> centers;  // flat node index per basis function

  static BasisSet interior_hats(const Grid& g) {
    BasisSet b;
    b.grid = g;
    int n = g.nodes_per_axis;
    for (int flat = 0; flat < g.n_nodes(); ++flat) {
      int f = flat;
      bool interior = true;
      for (int k = 0; k < g.dim; ++k) {
        int idx = f % n;
        f /= n;
        if (idx == 0 || idx == n - 1) interior = false;
      }
      if (interior) b.centers.push_back(flat);
    }
    return b;
  }

  int size() const { return static_cast<int>(centers.size()); }

  double eval(int i, const Vec& x) const {
    Vec v = grid.node(centers[i]);
    double prod = 1.0;
    for (int k = 0; k < grid.dim; ++k) {
      double t = 1.0 - std::abs(x[k] - v[k]) / grid.h;
      if (t <= 0.0) return 0.0;
      prod *= t;
    }
    return prod;
  }

  double lipschitz_const(int) const { return std::sqrt(static_cast<double>(grid.dim)) / grid.h; }

  /// Support box of basis i.
  std::vector<std::array<double, 2>> support(int i) const {
    Vec v = grid.node(centers[i]);
    std::vector<std::array<double, 2>> s(grid.dim);
    for (int k = 0; k < grid.dim; ++k) s[k] = {v[k] - grid.h, v[k] + grid.h};
    return s;
  }

  /// Cells on which basis i is nonzero at the cell center (2 per axis).
  std::vector<int> support_cells(int i) const {
    int m = grid.nodes_per_axis - 1;
    std::vector<int> axis_idx(grid.dim);
    int f = centers[i];
    for (int k = grid.dim - 1; k >= 0; --k) {
      axis_idx[k] = f % grid.nodes_per_axis;
      f /= grid.nodes_per_axis;
    }
    std::vector<int> cells;
    for (int corner = 0; corner < (1 << grid.dim); ++corner) {
      int flat = 0;
      for (int k = 0; k < grid.dim; ++k) {
        int bit = (corner >> k) & 1;
        flat = flat * m + axis_idx[k] - 1 + bit;
      }
      cells.push_back(flat);
    }
    return cells;
  }

  /// L2 mass matrix in the same midpoint quadrature used by form assembly.
  Mat mass_matrix() const {
    int nb = size(), nc = grid.n_cells();
    double mu = grid.cell_measure();
    Mat M = Mat::Zero(nb, nb);
    for (int i = 0; i < nb; ++i) {
      for (int j = i; j < nb; ++j) {
        double s = 0.0;
        for (int c : support_cells(i)) {
          if (c < 0 || c >= nc) continue;
          Vec cc = grid.cell_center(c);
          s += eval(i, cc) * eval(j, cc);
        }
        M(i, j) = M(j, i) = s * mu;
      }
    }
    return M;
  }

  std::uint64_t hash() const {
    std::uint64_t h = grid.hash();
    h = fnv1a(centers.data(), centers.size() * sizeof(int), h);
    return h;
  }

  /// Coefficient vector -> function value.
  double expand(const Vec& coeffs, const Vec& x) const {
    double s = 0.0;
    for (int i = 0; i < size(); ++i) {
      double p = eval(i, x);
      if (p != 0.0) s += coeffs[i] * p;
    }
    return s;
  }
};

}  // namespace jumplab

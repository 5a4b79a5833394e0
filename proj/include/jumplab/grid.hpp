#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "jumplab/common.hpp"

namespace jumplab {

/// Uniform lattice on an axis-aligned box, used both as Galerkin mesh and as
/// node set for generator matrices. Spacing is the same on every axis.
struct Grid {
  int dim = 1;
  std::vector<std::array<double, 2>> box;  // per-axis bounds
  int nodes_per_axis = 0;
  double h = 0.0;

  static Grid make(std::vector<std::array<double, 2>> box_in, int nodes_per_axis) {
    Grid g;
    g.dim = static_cast<int>(box_in.size());
    g.box = std::move(box_in);
    g.nodes_per_axis = nodes_per_axis;
    if (nodes_per_axis < 8) throw std::invalid_argument("grid needs at least 8 nodes per axis");
    g.h = (g.box[0][1] - g.box[0][0]) / (nodes_per_axis - 1);
    for (const auto& b : g.box) {
      double hk = (b[1] - b[0]) / (nodes_per_axis - 1);
      if (std::abs(hk - g.h) > 1e-12 * g.h) throw std::invalid_argument("grid spacing must be uniform across axes");
    }
    return g;
  }

  static Grid make1d(double lo, double hi, int nodes) { return make({{{lo, hi}}}, nodes); }

  int n_nodes() const {
    int n = 1;
    for (int k = 0; k < dim; ++k) n *= nodes_per_axis;
    return n;
  }

  int n_cells() const {
    int n = 1;
    for (int k = 0; k < dim; ++k) n *= (nodes_per_axis - 1);
    return n;
  }

  double cell_measure() const { return std::pow(h, dim); }

  Vec node(int flat) const {
    Vec x(dim);
    for (int k = dim - 1; k >= 0; --k) {
      x[k] = box[k][0] + (flat % nodes_per_axis) * h;
      flat /= nodes_per_axis;
    }
    return x;
  }

  Vec cell_center(int flat) const {
    Vec x(dim);
    int m = nodes_per_axis - 1;
    for (int k = dim - 1; k >= 0; --k) {
      x[k] = box[k][0] + ((flat % m) + 0.5) * h;
      flat /= m;
    }
    return x;
  }

  std::vector<Vec> nodes() const {
    std::vector<Vec> out(n_nodes());
    for (int i = 0; i < n_nodes(); ++i) out[i] = node(i);
    return out;
  }

  bool contains(const Vec& x) const {
    for (int k = 0; k < dim; ++k)
      if (x[k] < box[k][0] - 1e-12 || x[k] > box[k][1] + 1e-12) return false;
    return true;
  }

  /// Multilinear interpolation of nodal values.
  double interpolate(const Vec& values, const Vec& x) const {
    std::vector<int> base(dim);
    std::vector<double> t(dim);
    for (int k = 0; k < dim; ++k) {
      double f = (x[k] - box[k][0]) / h;
      int i = static_cast<int>(std::floor(f));
      i = std::max(0, std::min(i, nodes_per_axis - 2));
      base[k] = i;
      t[k] = std::min(1.0, std::max(0.0, f - i));
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << dim); ++corner) {
      double wgt = 1.0;
      int flat = 0;
      for (int k = 0; k < dim; ++k) {
        int bit = (corner >> k) & 1;
        wgt *= bit ? t[k] : (1.0 - t[k]);
        flat = flat * nodes_per_axis + base[k] + bit;
      }
      acc += wgt * values[flat];
    }
    return acc;
  }

  std::uint64_t hash() const {
    std::ostringstream os;
    os.precision(17);
    os << dim << ":" << nodes_per_axis;
    for (const auto& b : box) os << ":" << b[0] << "," << b[1];
    return fnv1a(os.str());
  }
};

}  // namespace jumplab

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "jumplab/common.hpp"

namespace jumplab {

/// Open subset D with membership test and distance-to-boundary function.
/// `s_dim` is the declared Hausdorff dimension of the boundary, feeding the
/// alpha + s <= d polarity heuristic in censored-process experiments.
struct OpenSetSpec {
  enum class Shape { interval, box, ball, complement_of_point_set };

  Shape shape = Shape::interval;
  int dim = 1;
  double s_dim = 0.0;
  std::vector<std::array<double, 2>> bounds;  // interval / box
  Vec center;                                 // ball
  double radius = 0.0;
  std::vector<Vec> points;  // complement_of_point_set

  static OpenSetSpec interval(double a, double b, double s = 0.0) {
    OpenSetSpec d;
    d.shape = Shape::interval;
    d.dim = 1;
    d.s_dim = s;
    d.bounds = {{a, b}};
    return d;
  }

  static OpenSetSpec box(std::vector<std::array<double, 2>> bounds, double s) {
    OpenSetSpec d;
    d.shape = Shape::box;
    d.dim = static_cast<int>(bounds.size());
    d.s_dim = s;
    d.bounds = std::move(bounds);
    return d;
  }

  static OpenSetSpec ball(Vec center, double radius, double s) {
    OpenSetSpec d;
    d.shape = Shape::ball;
    d.dim = static_cast<int>(center.size());
    d.s_dim = s;
    d.center = std::move(center);
    d.radius = radius;
    return d;
  }

  static OpenSetSpec complement_of_points(int dim, std::vector<Vec> pts, double s = 0.0) {
    OpenSetSpec d;
    d.shape = Shape::complement_of_point_set;
    d.dim = dim;
    d.s_dim = s;
    d.points = std::move(pts);
    return d;
  }

  /// Complement of the empty set: all of R^d, no boundary.
  static OpenSetSpec whole_space(int dim) { return complement_of_points(dim, {}); }

  bool contains(const Vec& x) const { return dist_to_boundary(x) > 0.0; }

  double dist_to_boundary(const Vec& x) const {
    switch (shape) {
      case Shape::interval:
      case Shape::box: {
        double d = std::numeric_limits<double>::infinity();
        for (int k = 0; k < dim; ++k) {
          d = std::min(d, x[k] - bounds[k][0]);
          d = std::min(d, bounds[k][1] - x[k]);
        }
        return d;  // negative outside
      }
      case Shape::ball:
        return radius - (x - center).norm();
      case Shape::complement_of_point_set: {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& p : points) d = std::min(d, (x - p).norm());
        return d;
      }
    }
    return 0.0;
  }

  bool bounded() const {
    return shape == Shape::interval || shape == Shape::box || shape == Shape::ball;
  }
};

}  // namespace jumplab

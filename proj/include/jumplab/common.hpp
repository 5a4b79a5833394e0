#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace jumplab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Vec point1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

inline Vec point2(double x, double y) {
  Vec v(2);
  v[0] = x;
  v[1] = y;
  return v;
}

/// Smooth bump exp(1 - 1/(1-s^2)) on |s| < 1, s = (x - center)/radius.
struct BumpFunction {
  double center = 0.0;
  double radius = 1.0;
  double height = 1.0;

  double operator()(double x) const {
    double s = (x - center) / radius;
    if (std::abs(s) >= 1.0) return 0.0;
    return height * std::exp(1.0 - 1.0 / (1.0 - s * s));
  }

  double deriv(double x) const {
    double s = (x - center) / radius;
    if (std::abs(s) >= 1.0) return 0.0;
    double g = 1.0 - s * s;
    return (*this)(x) * (-2.0 * s / (g * g)) / radius;
  }
};

/// FNV-1a over raw bytes, used to fingerprint grids, configs and bases.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a(s.data(), s.size(), h);
}

}  // namespace jumplab

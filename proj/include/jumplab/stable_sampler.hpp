#pragma once

#include <cmath>
#include <vector>

#include "jumplab/common.hpp"
#include "jumplab/rng.hpp"

namespace jumplab {

/// One draw from the symmetric alpha-stable law with characteristic function
/// exp(-|u|^alpha), by the polar transform; alpha = 1 is the Cauchy branch,
/// alpha = 2 the Gaussian one (variance 2).
inline double sample_scalar(double alpha, Rng& rng) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("stable exponent must lie in (0,2]");
  if (alpha == 2.0) return std::sqrt(2.0) * rng.normal();
  if (alpha == 1.0) return std::tan(M_PI * (rng.uniform() - 0.5));
  double v = M_PI * (rng.uniform() - 0.5);
  double w = rng.exponential();
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

/// Positive strictly stable draw with Laplace transform exp(-lambda^rho),
/// rho in (0,1); the scale constant of the skewed polar transform cancels
/// against cos(pi rho / 2)^(1/rho) exactly.
inline double sample_positive_stable(double rho, Rng& rng) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("positive-stable index must lie in (0,1)");
  double v = M_PI * (rng.uniform() - 0.5);
  double w = rng.exponential();
  double s = std::sin(rho * (v + M_PI / 2.0)) / std::pow(std::cos(v), 1.0 / rho) *
             std::pow(std::cos(v - rho * (v + M_PI / 2.0)) / w, (1.0 - rho) / rho);
  return s;
}

/// Rotationally invariant alpha-stable d-vector with characteristic function
/// exp(-|u|^alpha), via subordination sqrt(2 S) Z with S positive
/// (alpha/2)-stable and Z standard Gaussian.
inline Vec sample_isotropic(double alpha, int d, Rng& rng) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("stable exponent must lie in (0,2]");
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  Vec z(d);
  for (int i = 0; i < d; ++i) z[i] = rng.normal();
  if (alpha == 2.0) return std::sqrt(2.0) * z;
  double s = sample_positive_stable(alpha / 2.0, rng);
  return std::sqrt(2.0 * s) * z;
}

/// Empirical characteristic function of scalar samples against the target
/// exp(-scale |u|^alpha) on a symmetric u-grid.
struct EcfTable {
  std::vector<double> u, ecf_re, ecf_im, target;
  double max_err = 0.0;
};

inline EcfTable ecf_vs_stable(const std::vector<double>& samples, double alpha, double scale = 1.0,
                              double u_max = 5.0, int n_u = 101) {
  EcfTable t;
  t.u.resize(n_u);
  t.ecf_re.assign(n_u, 0.0);
  t.ecf_im.assign(n_u, 0.0);
  t.target.resize(n_u);
  for (int i = 0; i < n_u; ++i) t.u[i] = -u_max + 2.0 * u_max * i / (n_u - 1);

  const std::size_t n = samples.size();
  const std::size_t chunk = 65536;  // fixed-chunk partial sums keep the
                                    // reduction order thread-count independent
  std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<std::vector<double>> re(n_chunks, std::vector<double>(n_u, 0.0));
  std::vector<std::vector<double>> im(n_chunks, std::vector<double>(n_u, 0.0));
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < n_chunks; ++c) {
    std::size_t hi = std::min(n, (c + 1) * chunk);
    for (std::size_t s = c * chunk; s < hi; ++s) {
      double x = samples[s];
      for (int i = 0; i < n_u; ++i) {
        re[c][i] += std::cos(t.u[i] * x);
        im[c][i] += std::sin(t.u[i] * x);
      }
    }
  }
  for (std::size_t c = 0; c < n_chunks; ++c)
    for (int i = 0; i < n_u; ++i) {
      t.ecf_re[i] += re[c][i];
      t.ecf_im[i] += im[c][i];
    }
  for (int i = 0; i < n_u; ++i) {
    t.ecf_re[i] /= n;
    t.ecf_im[i] /= n;
    t.target[i] = std::exp(-scale * std::pow(std::abs(t.u[i]), alpha));
    double dre = t.ecf_re[i] - t.target[i];
    t.max_err = std::max(t.max_err, std::hypot(dre, t.ecf_im[i]));
  }
  return t;
}

inline std::vector<double> draw_scalar_batch(double alpha, std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  const std::size_t chunk = 65536;
  std::size_t n_chunks = (n + chunk - 1) / chunk;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < n_chunks; ++c) {
    Rng rng = Rng::stream(seed, c);
    std::size_t hi = std::min(n, (c + 1) * chunk);
    for (std::size_t s = c * chunk; s < hi; ++s) out[s] = sample_scalar(alpha, rng);
  }
  return out;
}

/// Projections of isotropic draws onto a unit direction (the projection of an
/// isotropic alpha-stable vector is again alpha-stable with the same scale).
inline std::vector<double> draw_isotropic_projections(double alpha, int d, const Vec& direction,
                                                      std::size_t n, std::uint64_t seed) {
  Vec dir = direction / direction.norm();
  std::vector<double> out(n);
  const std::size_t chunk = 65536;
  std::size_t n_chunks = (n + chunk - 1) / chunk;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < n_chunks; ++c) {
    Rng rng = Rng::stream(seed, c);
    std::size_t hi = std::min(n, (c + 1) * chunk);
    for (std::size_t s = c * chunk; s < hi; ++s) out[s] = dir.dot(sample_isotropic(alpha, d, rng));
  }
  return out;
}

}  // namespace jumplab

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jumplab/exponent_field.hpp"
#include "jumplab/generator.hpp"
#include "jumplab/kernel.hpp"
#include "jumplab/open_set.hpp"
#include "jumplab/rng.hpp"
#include "jumplab/stable_generator.hpp"
#include "jumplab/stable_sampler.hpp"

namespace jumplab {

enum class Scheme { frozen_euler, compound_poisson };

inline const char* to_string(Scheme s) {
  return s == Scheme::frozen_euler ? "frozen_euler" : "compound_poisson";
}

enum class DeathCause : std::uint8_t { none, killed_jump_out, boundary_approach, horizon };

inline const char* to_string(DeathCause c) {
  switch (c) {
    case DeathCause::none: return "none";
    case DeathCause::killed_jump_out: return "killed_jump_out";
    case DeathCause::boundary_approach: return "boundary_approach";
    default: return "horizon";
  }
}

struct SimConfig {
  double time_step = 1e-3;  // frozen_euler only
  double horizon = 1.0;
  int n_paths = 1000;
  Scheme scheme = Scheme::frozen_euler;
  double small_jump_cutoff = 1e-3;  // compound_poisson only
  std::uint64_t master_seed = 1;
  std::uint64_t path_index_offset = 0;  // chunked runs reproduce monolithic streams
  double boundary_tol = 1e-4;
  double intensity_cap = 1e6;
  double record_dt = 0.0;  // 0 records every step / accepted jump
  long max_records = 0;    // 0 = unlimited; else cap the per-path record list
  long max_events_per_path = 50000000;
  // resolution floor of the boundary-adaptive cutoff; 0 = boundary_tol / 20.
  // With the floor, the intensity cap is reachable only for exponents whose
  // proposal rate at the resolved scale exceeds it, mirroring the polarity
  // dichotomy of the boundary.
  double min_adaptive_cutoff = 0.0;
  Vec x0;
  Normalization normalization = Normalization::levy_constant;
};

struct PathRecord {
  std::vector<double> times;
  std::vector<double> states;  // flattened, dim entries per recorded time
  DeathCause death_cause = DeathCause::none;
  double death_time = 0.0;
  Vec final_state;              // last in-domain state
  std::optional<Vec> exit_point;  // landing point of the killing jump
  long n_jumps = 0;
  long n_suppressed = 0;
};

struct TrajectoryBatch {
  int dim = 1;
  Scheme scheme = Scheme::frozen_euler;
  std::string kernel_label;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  std::vector<PathRecord> paths;

  double survival_fraction() const {
    std::size_t alive = 0;
    for (const auto& p : paths) alive += (p.death_cause == DeathCause::horizon) ? 1 : 0;
    return paths.empty() ? 0.0 : static_cast<double>(alive) / paths.size();
  }

  double fraction_with(DeathCause c) const {
    std::size_t k = 0;
    for (const auto& p : paths) k += (p.death_cause == c) ? 1 : 0;
    return paths.empty() ? 0.0 : static_cast<double>(k) / paths.size();
  }

  std::vector<double> final_coordinate(int axis = 0) const {
    std::vector<double> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(p.final_state[axis]);
    return out;
  }
};

namespace detail {

struct JumpEngineSets {
  const OpenSetSpec* adapt = nullptr;   // adaptive small-jump cutoff wrt this set
  const OpenSetSpec* confine = nullptr; // jumps landing outside are suppressed
  const OpenSetSpec* kill = nullptr;    // jumps landing outside kill the path
  bool detect_boundary = false;         // boundary-approach proxy active
};

// Compound-Poisson thinning realization: the full proposal rate above the
// local cutoff is Lambda(x) = w(x) s_d eps(x)^(-alpha(x)) / alpha(x); jump
// radii follow the Pareto tail eps U^(-1/alpha), directions are uniform.
// A suppressed proposal consumes its exponential clock (the path stays).
inline PathRecord run_jump_path(const ExponentField& ef, const SimConfig& cfg,
                                const JumpEngineSets& sets, Rng rng) {
  const int d = ef.dim;
  const double surface = d == 1 ? 2.0 : 2.0 * M_PI;
  PathRecord rec;
  Vec x = cfg.x0;
  double t = 0.0;
  double next_record = 0.0;
  auto record = [&](double tt) {
    if (cfg.max_records > 0 && static_cast<long>(rec.times.size()) >= cfg.max_records) return;
    rec.times.push_back(tt);
    for (int kk = 0; kk < d; ++kk) rec.states.push_back(x[kk]);
  };
  record(0.0);
  next_record = cfg.record_dt;

  long events = 0;
  while (true) {
    if (++events > cfg.max_events_per_path)
      throw std::runtime_error("path exceeded max_events_per_path; check cutoff configuration");
    double dist = sets.adapt ? sets.adapt->dist_to_boundary(x)
                             : std::numeric_limits<double>::infinity();
    double eps = cfg.small_jump_cutoff;
    if (std::isfinite(dist)) {
      double floor_eps = cfg.min_adaptive_cutoff > 0.0 ? cfg.min_adaptive_cutoff
                                                       : cfg.boundary_tol / 20.0;
      eps = std::min(eps, std::max(0.5 * dist, std::min(floor_eps, eps)));
    }
    double a = ef(x);
    double w = stable_weight(a, d, cfg.normalization);
    double rate = w * surface * std::pow(eps, -a) / a;
    if (rate > cfg.intensity_cap && sets.detect_boundary) {
      if (dist < cfg.boundary_tol) {
        rec.death_cause = DeathCause::boundary_approach;
        rec.death_time = t;
        break;
      }
      if (dist > 100.0 * cfg.boundary_tol)
        throw std::runtime_error(
            "jump intensity above cap without boundary proximity (dist=" + std::to_string(dist) +
            "); boundary_tol is likely misconfigured");
    }
    double tau = rng.exponential() / rate;
    if (t + tau >= cfg.horizon) {
      t = cfg.horizon;
      rec.death_cause = DeathCause::horizon;
      rec.death_time = t;
      break;
    }
    t += tau;
    double radius = eps * std::pow(rng.uniform_pos(), -1.0 / a);
    Vec y = x;
    if (d == 1) {
      y[0] += (rng.uniform() < 0.5 ? radius : -radius);
    } else {
      double th = 2.0 * M_PI * rng.uniform();
      y[0] += radius * std::cos(th);
      y[1] += radius * std::sin(th);
    }
    if (sets.kill && !sets.kill->contains(y)) {
      rec.death_cause = DeathCause::killed_jump_out;
      rec.death_time = t;
      rec.exit_point = y;
      break;
    }
    if (sets.confine && !sets.confine->contains(y)) {
      ++rec.n_suppressed;  // clock consumed, state unchanged
      continue;
    }
    x = y;
    ++rec.n_jumps;
    if (cfg.record_dt <= 0.0) {
      record(t);
    } else if (t >= next_record) {
      record(t);
      while (next_record <= t) next_record += cfg.record_dt;
    }
  }
  rec.final_state = x;
  rec.times.push_back(std::min(t, cfg.horizon));  // final record bypasses the cap
  for (int kk = 0; kk < d; ++kk) rec.states.push_back(x[kk]);
  return rec;
}

}  // namespace detail

/// Free stable-like paths. frozen_euler advances with the exact isotropic
/// stable increment for the exponent frozen at the current state (exact in
/// law when alpha is constant); compound_poisson drops jumps below the cutoff.
inline TrajectoryBatch simulate_free(const ExponentField& ef, const SimConfig& cfg) {
  TrajectoryBatch batch;
  batch.dim = ef.dim;
  batch.scheme = cfg.scheme;
  batch.kernel_label = "stable_like(" + ef.label + ")";
  batch.seed = cfg.master_seed;
  batch.horizon = cfg.horizon;
  batch.paths.resize(cfg.n_paths);

  if (cfg.scheme == Scheme::frozen_euler) {
    int n_steps = static_cast<int>(std::llround(cfg.horizon / cfg.time_step));
#pragma omp parallel for schedule(dynamic)
    for (int p = 0; p < cfg.n_paths; ++p) {
      Rng rng = Rng::stream(cfg.master_seed, cfg.path_index_offset + p);
      PathRecord rec;
      Vec x = cfg.x0;
      rec.times.reserve(n_steps + 1);
      rec.states.reserve((n_steps + 1) * ef.dim);
      auto record = [&](double tt) {
        rec.times.push_back(tt);
        for (int kk = 0; kk < ef.dim; ++kk) rec.states.push_back(x[kk]);
      };
      record(0.0);
      for (int s = 1; s <= n_steps; ++s) {
        double a = ef(x);
        x += std::pow(cfg.time_step, 1.0 / a) * sample_isotropic(a, ef.dim, rng);
        record(s * cfg.time_step);
      }
      rec.death_cause = DeathCause::horizon;
      rec.death_time = cfg.horizon;
      rec.final_state = x;
      batch.paths[p] = rec;
    }
    return batch;
  }

  detail::JumpEngineSets sets;  // no adapt/confine/kill: conservative free run
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < cfg.n_paths; ++p)
    batch.paths[p] =
        detail::run_jump_path(ef, cfg, sets, Rng::stream(cfg.master_seed, cfg.path_index_offset + p));
  return batch;
}

/// Censored paths on D: proposals landing outside D are suppressed while the
/// clock keeps running (thinning realization of the restricted kernel). The
/// small-jump cutoff shrinks with the boundary distance so the proposal rate
/// diverges on approach; (distance < boundary_tol) and (rate > intensity_cap)
/// together stand in for the boundary-approach time.
inline TrajectoryBatch simulate_censored(const ExponentField& ef, const OpenSetSpec& D,
                                         const SimConfig& cfg) {
  if (cfg.scheme != Scheme::compound_poisson)
    throw std::invalid_argument("censored simulation requires the compound_poisson scheme");
  if (!D.contains(cfg.x0)) throw std::invalid_argument("start point must lie inside D");
  TrajectoryBatch batch;
  batch.dim = ef.dim;
  batch.scheme = cfg.scheme;
  batch.kernel_label = "censored stable_like(" + ef.label + ")";
  batch.seed = cfg.master_seed;
  batch.horizon = cfg.horizon;
  batch.paths.resize(cfg.n_paths);
  detail::JumpEngineSets sets;
  sets.adapt = &D;
  sets.confine = &D;
  sets.detect_boundary = D.bounded() || D.shape == OpenSetSpec::Shape::interval;
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < cfg.n_paths; ++p)
    batch.paths[p] =
        detail::run_jump_path(ef, cfg, sets, Rng::stream(cfg.master_seed, cfg.path_index_offset + p));
  return batch;
}

/// Part process on D: first proposal landing outside D kills the path. Shares
/// the proposal stream with simulate_censored under equal seeds, so the two
/// paths coincide until the part process's first outside jump.
inline TrajectoryBatch simulate_part(const ExponentField& ef, const OpenSetSpec& D,
                                     const SimConfig& cfg) {
  if (cfg.scheme != Scheme::compound_poisson)
    throw std::invalid_argument("part-process simulation requires the compound_poisson scheme");
  if (!D.contains(cfg.x0)) throw std::invalid_argument("start point must lie inside D");
  TrajectoryBatch batch;
  batch.dim = ef.dim;
  batch.scheme = cfg.scheme;
  batch.kernel_label = "part stable_like(" + ef.label + ")";
  batch.seed = cfg.master_seed;
  batch.horizon = cfg.horizon;
  batch.paths.resize(cfg.n_paths);
  detail::JumpEngineSets sets;
  sets.adapt = &D;
  sets.kill = &D;
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < cfg.n_paths; ++p)
    batch.paths[p] =
        detail::run_jump_path(ef, cfg, sets, Rng::stream(cfg.master_seed, cfg.path_index_offset + p));
  return batch;
}

/// Pathwise-coupling verification: with shared streams, the part-process path
/// must coincide with the censored path, jump for jump, until the part
/// process's first outside jump (or until either path dies). Uses full event
/// recording capped at `record_cap` entries per path; windows longer than the
/// cap are verified on their recorded prefix.
struct CouplingCheck {
  bool exact = true;
  long windows_checked = 0;
  long windows_truncated = 0;
};

inline CouplingCheck verify_pathwise_coupling(const ExponentField& ef, const OpenSetSpec& D,
                                              SimConfig cfg, int n_paths, long record_cap = 4000) {
  cfg.n_paths = n_paths;
  cfg.record_dt = 0.0;
  cfg.max_records = record_cap;
  auto cen = simulate_censored(ef, D, cfg);
  auto par = simulate_part(ef, D, cfg);
  CouplingCheck out;
  for (int i = 0; i < n_paths; ++i) {
    const auto& pc = cen.paths[i];
    const auto& pp = par.paths[i];
    long shared = std::min(pp.n_jumps, pc.n_jumps);
    long limit = std::min(shared, record_cap - 2);
    if (limit < shared) ++out.windows_truncated;
    ++out.windows_checked;
    for (long m = 0; m <= limit; ++m)
      if (pc.times[m] != pp.times[m] || pc.states[m] != pp.states[m]) {
        out.exact = false;
        return out;
      }
  }
  return out;
}

/// Tabulated values of the frozen-coefficient generator applied to f, for
/// fast lookups along simulated paths; far outside the table the nonlocal
/// term is approximated by the leading power of the distance to the support.
struct LfTable {
  double lo = -64.0, hi = 64.0;
  int n = 16385;
  std::vector<double> values;
  double f_integral = 0.0;  // int f dy, for the far-field approximation
  double support_center = 0.0;
  ExponentField ef;
  Normalization norm = Normalization::levy_constant;

  static LfTable build(const ExponentField& ef, Normalization norm, const ScalarField& f,
                       const QuadratureConfig& quad, double lo = -64.0, double hi = 64.0,
                       int n = 16385) {
    LfTable t;
    t.lo = lo;
    t.hi = hi;
    t.n = n;
    t.ef = ef;
    t.norm = norm;
    t.values.resize(n);
    double h = (hi - lo) / (n - 1);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i)
      t.values[i] = apply_generator(ef, norm, f, point1(lo + i * h), quad).value;
    // support data for the far field: weighted center and mass of f
    double m0 = 0.0, m1 = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = lo + i * h;
      double v = f(point1(x));
      m0 += v * h;
      m1 += x * v * h;
    }
    t.f_integral = m0;
    t.support_center = m0 != 0.0 ? m1 / m0 : 0.0;
    return t;
  }

  double operator()(double x) const {
    if (x < lo || x > hi) {
      double a = ef(point1(x));
      double w = stable_weight(a, 1, norm);
      return w * f_integral * std::pow(std::abs(x - support_center), -1.0 - a);
    }
    double h = (hi - lo) / (n - 1);
    double fx = (x - lo) / h;
    int i = std::min(static_cast<int>(fx), n - 2);
    double tt = fx - i;
    return (1.0 - tt) * values[i] + tt * values[i + 1];
  }
};

struct MartingaleRow {
  std::string name;
  long n = 0;
  double mean = 0.0;
  double M2 = 0.0;  // sum of squared deviations

  double se() const { return n > 1 ? std::sqrt(M2 / (n - 1) / n) : 0.0; }
  double z() const { return se() > 0.0 ? mean / se() : 0.0; }

  void add(double v) {
    ++n;
    double d = v - mean;
    mean += d / n;
    M2 += d * (v - mean);
  }

  void merge(const MartingaleRow& o) {
    if (o.n == 0) return;
    double d = o.mean - mean;
    long tot = n + o.n;
    M2 += o.M2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / tot;
    mean += d * o.n / static_cast<double>(tot);
    n = tot;
  }
};

struct MartingaleReport {
  std::vector<MartingaleRow> rows;
  double max_abs_z() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, std::abs(r.z()));
    return m;
  }
  void merge(const MartingaleReport& o) {
    if (rows.empty()) {
      rows = o.rows;
      return;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].merge(o.rows[i]);
  }
};

inline void to_json(nlohmann::json& j, const MartingaleReport& r) {
  j = nlohmann::json::array();
  for (const auto& row : r.rows)
    j.push_back({{"f", row.name},
                 {"n", row.n},
                 {"residual_mean", row.mean},
                 {"se", row.se()},
                 {"z", row.z()}});
}

struct NamedFunction {
  std::string name;
  ScalarField f;
};

/// Per-path residual M_T = f(X_T) - f(X_0) - int_0^T (L f)(X_s) ds, time
/// integral by the trapezoid rule on the recorded grid, L f interpolated from
/// a precomputed table. Reports mean, standard error and z per test function.
inline MartingaleReport martingale_test(const TrajectoryBatch& batch,
                                        const std::vector<NamedFunction>& f_set,
                                        const ExponentField& ef, Normalization norm,
                                        const QuadratureConfig& quad = {}) {
  MartingaleReport rep;
  for (const auto& nf : f_set) {
    LfTable table = LfTable::build(ef, norm, nf.f, quad);
    MartingaleRow row;
    row.name = nf.name;
    std::vector<double> vals(batch.paths.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t p = 0; p < batch.paths.size(); ++p) {
      const auto& path = batch.paths[p];
      double integral = 0.0;
      double prev_lf = table(path.states[0]);
      for (std::size_t s = 1; s < path.times.size(); ++s) {
        double lf = table(path.states[s * batch.dim]);
        integral += 0.5 * (prev_lf + lf) * (path.times[s] - path.times[s - 1]);
        prev_lf = lf;
      }
      double f0 = nf.f(point1(path.states[0]));
      double fT = nf.f(path.final_state);
      vals[p] = fT - f0 - integral;
    }
    for (double v : vals) row.add(v);  // fixed path order keeps merges exact
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace jumplab

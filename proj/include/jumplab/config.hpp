#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "jumplab/drifted_bm.hpp"
#include "jumplab/exponent_field.hpp"
#include "jumplab/grid.hpp"
#include "jumplab/kernel.hpp"
#include "jumplab/open_set.hpp"
#include "jumplab/quadrature.hpp"
#include "jumplab/simulator.hpp"

namespace jumplab {

/// Configuration errors carry the offending field; the CLI maps them to
/// exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace cfg {

using nlohmann::json;

inline const json& require(const json& j, const std::string& key, const std::string& scope) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing config field: " + scope + "." + key);
  return *it;
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

inline json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return j;
}

inline QuadratureConfig quadrature(const json& root) {
  QuadratureConfig q;
  if (!root.contains("quadrature")) return q;
  const json& j = root["quadrature"];
  q.r_min = get_or(j, "r_min", q.r_min);
  q.r_max = get_or(j, "r_max", q.r_max);
  q.radial_per_octave = get_or(j, "radial_points", q.radial_per_octave);
  q.angular = get_or(j, "angular_points", q.angular);
  q.cutoff_levels = get_or(j, "cutoff_levels", q.cutoff_levels);
  q.tolerance = get_or(j, "tolerance", q.tolerance);
  return q;
}

inline ExponentField exponent_field(const json& k) {
  const json& e = require(k, "exponent", "kernel");
  int dim = get_or(k, "dimension", 1);
  std::string profile = require(e, "profile", "kernel.exponent").get<std::string>();
  if (profile == "constant") {
    return constant_exponent(require(e, "value", "kernel.exponent").get<double>(), dim);
  }
  if (profile == "tanh") {
    double base = require(e, "base", "kernel.exponent").get<double>();
    double amplitude = require(e, "amplitude", "kernel.exponent").get<double>();
    return tanh_exponent(base, amplitude, dim);
  }
  throw ConfigError("unknown exponent profile: " + profile);
}

inline Normalization normalization(const json& k) {
  std::string s = get_or<std::string>(k, "normalization", "levy_constant");
  if (s == "levy_constant") return Normalization::levy_constant;
  if (s == "paper_weight") return Normalization::paper_weight;
  throw ConfigError("unknown normalization: " + s + " (levy_constant | paper_weight)");
}

/// kind: stable_like | symmetric_power | drifted_bm_density | user_table
inline JumpKernel kernel(const json& root) {
  const json& k = require(root, "kernel", "config");
  std::string kind = require(k, "kind", "kernel").get<std::string>();
  if (kind == "stable_like") {
    ExponentField ef = exponent_field(k);
    std::string err = ef.validate();
    if (!err.empty()) throw ConfigError("kernel.exponent invalid: " + err);
    return stable_like_kernel(ef, normalization(k));
  }
  if (kind == "symmetric_power") {
    double p = require(k, "power", "kernel").get<double>();
    return symmetric_power_kernel(get_or(k, "dimension", 1), p, get_or(k, "scale", 1.0));
  }
  if (kind == "drifted_bm_density") {
    DriftedBMConfig c;
    c.lambda = get_or(k, "lambda", c.lambda);
    c.t0 = get_or(k, "t0", c.t0);
    c.nodes = get_or(k, "nodes", c.nodes);
    c.domain_lo = get_or(k, "domain_lo", c.domain_lo);
    c.domain_hi = get_or(k, "domain_hi", c.domain_hi);
    c.time_steps = get_or(k, "time_steps", c.time_steps);
    return build_drifted_bm_kernel(c).kernel;
  }
  if (kind == "user_table") {
    auto table = std::make_shared<KernelTable>(
        KernelTable::load(require(k, "file", "kernel").get<std::string>()));
    return tabulated_kernel(table, get_or<std::string>(k, "label", "user_table"));
  }
  throw ConfigError("unknown kernel kind: " + kind);
}

inline Grid grid(const json& root) {
  const json& g = require(root, "grid", "config");
  auto box = require(g, "box", "grid").get<std::vector<std::array<double, 2>>>();
  int nodes = require(g, "nodes_per_axis", "grid").get<int>();
  return Grid::make(box, nodes);
}

inline OpenSetSpec open_set(const json& root, const std::string& key = "open_set") {
  const json& o = require(root, key, "config");
  std::string shape = require(o, "shape", key).get<std::string>();
  double s = get_or(o, "s", 0.0);
  if (shape == "interval")
    return OpenSetSpec::interval(require(o, "a", key).get<double>(),
                                 require(o, "b", key).get<double>(), s);
  if (shape == "box")
    return OpenSetSpec::box(require(o, "box", key).get<std::vector<std::array<double, 2>>>(), s);
  if (shape == "ball") {
    auto c = require(o, "center", key).get<std::vector<double>>();
    Vec cv(static_cast<int>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) cv[i] = c[i];
    return OpenSetSpec::ball(cv, require(o, "radius", key).get<double>(), s);
  }
  if (shape == "whole_space") return OpenSetSpec::whole_space(get_or(o, "dimension", 1));
  throw ConfigError("unknown open_set shape: " + shape);
}

inline std::vector<Vec> sample_points(const json& root, int dim) {
  std::vector<Vec> pts;
  if (root.contains("sample_points")) {
    const json& s = root["sample_points"];
    if (s.contains("list")) {
      for (const auto& p : s["list"]) {
        Vec v(dim);
        for (int k = 0; k < dim; ++k) v[k] = p[k].get<double>();
        pts.push_back(v);
      }
      return pts;
    }
    double lo = get_or(s, "lo", -2.0), hi = get_or(s, "hi", 2.0);
    int count = get_or(s, "count", 9);
    if (dim == 1) return sample_points_1d(lo, hi, count);
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < count; ++j)
        pts.push_back(point2(lo + (hi - lo) * i / (count - 1), lo + (hi - lo) * j / (count - 1)));
    return pts;
  }
  return dim == 1 ? sample_points_1d(-2.0, 2.0, 9) : sample_points(json{{"sample_points", json::object()}}, dim);
}

inline SimConfig sim(const json& root, std::uint64_t seed) {
  SimConfig c;
  c.master_seed = seed;
  if (!root.contains("sim")) return c;
  const json& s = root["sim"];
  c.time_step = get_or(s, "time_step", c.time_step);
  c.horizon = get_or(s, "horizon", c.horizon);
  c.n_paths = get_or(s, "n_paths", c.n_paths);
  std::string scheme = get_or<std::string>(s, "scheme", "frozen_euler");
  if (scheme == "frozen_euler")
    c.scheme = Scheme::frozen_euler;
  else if (scheme == "compound_poisson")
    c.scheme = Scheme::compound_poisson;
  else
    throw ConfigError("unknown sim.scheme: " + scheme);
  c.small_jump_cutoff = get_or(s, "small_jump_cutoff", c.small_jump_cutoff);
  c.boundary_tol = get_or(s, "boundary_tol", c.boundary_tol);
  c.intensity_cap = get_or(s, "intensity_cap", c.intensity_cap);
  c.record_dt = get_or(s, "record_dt", c.record_dt);
  double x0 = get_or(s, "x0", 0.0);
  c.x0 = point1(x0);
  if (s.contains("x0_vec")) {
    auto v = s["x0_vec"].get<std::vector<double>>();
    c.x0 = Vec(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) c.x0[i] = v[i];
  }
  return c;
}

}  // namespace cfg

}  // namespace jumplab

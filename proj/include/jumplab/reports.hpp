#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "jumplab/simulator.hpp"
#include "jumplab/stable_sampler.hpp"

namespace jumplab {

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

/// Columnar trajectory dump: path_id, t, state components, event code
/// (0 none, 1 killed_jump_out, 2 boundary_approach, 3 horizon on the final row).
inline void write_trajectories_csv(const TrajectoryBatch& batch, const std::string& path) {
  std::ofstream out(path);
  out.precision(12);
  out << "path_id,t";
  for (int k = 0; k < batch.dim; ++k) out << ",x" << k;
  out << ",event\n";
  for (std::size_t p = 0; p < batch.paths.size(); ++p) {
    const auto& rec = batch.paths[p];
    for (std::size_t s = 0; s < rec.times.size(); ++s) {
      out << p << "," << rec.times[s];
      for (int k = 0; k < batch.dim; ++k) out << "," << rec.states[s * batch.dim + k];
      int event = (s + 1 == rec.times.size()) ? static_cast<int>(rec.death_cause) : 0;
      out << "," << event << "\n";
    }
  }
}

inline nlohmann::json batch_summary(const TrajectoryBatch& batch, int curve_points = 21) {
  nlohmann::json j;
  j["n_paths"] = batch.paths.size();
  j["scheme"] = to_string(batch.scheme);
  j["kernel"] = batch.kernel_label;
  j["seed"] = batch.seed;
  nlohmann::json hist;
  for (DeathCause c : {DeathCause::none, DeathCause::killed_jump_out, DeathCause::boundary_approach,
                       DeathCause::horizon})
    hist[to_string(c)] = static_cast<long>(std::llround(batch.fraction_with(c) * batch.paths.size()));
  j["death_cause_histogram"] = hist;
  j["boundary_fraction"] = batch.fraction_with(DeathCause::boundary_approach);
  nlohmann::json curve = nlohmann::json::array();
  for (int i = 0; i < curve_points; ++i) {
    double t = batch.horizon * i / (curve_points - 1);
    std::size_t alive = 0;
    for (const auto& p : batch.paths)
      alive += (p.death_cause == DeathCause::horizon || p.death_time > t) ? 1 : 0;
    curve.push_back({{"t", t}, {"alive", static_cast<double>(alive) / batch.paths.size()}});
  }
  j["survival_curve"] = curve;
  return j;
}

inline void write_ecf_csv(const EcfTable& t, const std::string& path) {
  std::ofstream out(path);
  out.precision(12);
  out << "u,ecf_re,ecf_im,target\n";
  for (std::size_t i = 0; i < t.u.size(); ++i)
    out << t.u[i] << "," << t.ecf_re[i] << "," << t.ecf_im[i] << "," << t.target[i] << "\n";
}

inline void write_draws_csv(const std::vector<double>& draws, const std::string& path) {
  std::ofstream out(path);
  out.precision(12);
  out << "draw\n";
  for (double v : draws) out << v << "\n";
}

}  // namespace jumplab

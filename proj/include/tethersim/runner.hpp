#pragma once

#include <string>
#include <vector>

#include "tethersim/diagnostics.hpp"
#include "tethersim/lgvi.hpp"
#include "tethersim/scenario.hpp"

namespace tethersim {

enum class Integrator { kLgvi, kRk4 };

struct RunOptions {
  std::string out_dir;            // empty: no files, records only
  int record_every = 1;
  Integrator integrator = Integrator::kLgvi;
  lgvi::InitMode init = lgvi::InitMode::kVelocityMap;
  double tol = 1e-13;
  int max_iterations = 25;
  int snapshot_count = 9;         // snapshot times, endpoints included
};

struct NewtonStats {
  long steps = 0;
  long total_iterations = 0;
  int max_iterations = 0;
  double max_scaled_residual = 0.0;
  double max_residual_norm = 0.0;
  bool all_converged = true;
};

struct RunResult {
  std::vector<diag::DiagRecord> records;
  NewtonStats newton;
  double wall_seconds = 0.0;
  double s_p_final = 0.0;
  GroupConfig final_config;
};

// Deterministic run loop: fixed evaluation order, no randomness. Writes
// run.csv, snapshots/*.csv and summary.json when out_dir is set; identical
// configs produce byte-identical run.csv.
RunResult run(const Scenario& sc, const PhysParams& params, const RunOptions& options);

}  // namespace tethersim

#pragma once

#include <vector>

#include "tethersim/model.hpp"
#include "tethersim/params.hpp"
#include "tethersim/state.hpp"

namespace tethersim::diag {

// One per-step observables row. E_total is T_base_sub + T_tether +
// V_gravity + V_elastic exactly as summed.
struct DiagRecord {
  double t = 0.0;
  double T_base_sub = 0.0;
  double T_tether = 0.0;
  double V_gravity = 0.0;
  double V_elastic = 0.0;
  double E_total = 0.0;
  double dE = 0.0;
  Vec3 omega = Vec3::Zero();
  Vec3 omega_s = Vec3::Zero();
  double s_p = 0.0;
  double len_unstretched = 0.0;              // L - s_p
  double len_stretched = 0.0;                // sum of element lengths
  std::vector<double> strain;                // per element
  double ortho_err = 0.0;                    // max of both rotations
  Vec3 ang_mom = Vec3::Zero();               // about the origin
  double carnot_balance = 0.0;               // filled by the run loop
};

// Observation from an explicit velocity state (reference-integrator path):
// momenta of the continuous kinetic form.
DiagRecord observe(const PhysParams& p, const GroupConfig& g, const VelocityState& v,
                   double t);

// Observation from an increment (variational-integrator path). Energy
// components are the discrete interval quantities: kinetic from the
// increment quadratic form (difference quotients in place of velocities)
// and potential averaged over the interval ends, so E_total is the
// discrete energy whose conservation the integrator actually controls.
// Angular velocities are reconstructed as log(F)/h, and the angular
// momentum is the discrete momentum map of the step starting at g.
DiagRecord observe(const PhysParams& p, const GroupConfig& g, const GroupIncrement& f,
                   double t);

struct DriftStats {
  double max_rel_dE = 0.0;   // max |dE| / |E(0)|
  double trend = 0.0;        // least-squares slope of dE against t [J/s]
  double max_ortho_err = 0.0;
};

// Summary over a recorded series. Throws InsufficientData below 100 rows.
DriftStats drift_stats(const std::vector<DiagRecord>& records);

}  // namespace tethersim::diag

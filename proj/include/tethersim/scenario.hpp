#pragma once

#include <string>
#include <utility>

#include "tethersim/params.hpp"
#include "tethersim/state.hpp"

namespace tethersim {

// Initial-velocity perturbation applied by case3: the in-plane orbital
// velocities of the base and the sub-spacecraft are scaled, and the
// sub-spacecraft also receives an out-of-plane component, both relative
// to the local circular speed.
struct PerturbationSpec {
  double in_plane_scale = 1.15;
  double out_of_plane_fraction = 0.15;
};

struct Scenario {
  std::string name = "custom";   // case1 | case2 | case3 | custom
  double h = 0.05;               // [s]
  double t_f = 6000.0;           // [s]
  int N = 20;
  bool free_drum = false;        // fixed drum unless deploying
  double u = 0.0;                // constant drum moment [N m]
  bool perturb = false;
  PerturbationSpec perturbation;
  double altitude = 300.0e3;     // base circular-orbit altitude [m]
  double s_p0 = 100.0e3;         // initial stored arc length [m]
  // Optional early stop for deployment runs; off by default, the presets
  // run to their fixed horizons.
  bool stop_when_deployed = false;
  double s_p_stop = 20.0e3;      // stored length that counts as deployed [m]
};

// The three published test cases. Throws ConfigInvalid on unknown names.
Scenario scenario_preset(const std::string& name);

// Physical constants of the published model (the PhysParams defaults).
PhysParams default_params();

// A point-mass configuration for orbit-period checks: tether and
// sub-spacecraft masses and the axial stiffness are scaled down to
// dynamically negligible values.
PhysParams pointmass_params();

// Base on a circular orbit at the scenario altitude, tether and sub
// aligned along the radial direction toward the Earth, every node on its
// own local circular velocity; zero body rates. case3 applies the
// perturbation spec.
std::pair<GroupConfig, VelocityState> build_initial_state(const Scenario& sc,
                                                          const PhysParams& p);

// JSON round trip for the config file format ({"params": .., "scenario": ..})
// and for golden-file pinning of the presets.
std::string to_json(const Scenario& sc, const PhysParams& p);
std::pair<Scenario, PhysParams> from_json(const std::string& text);
std::pair<Scenario, PhysParams> load_config_file(const std::string& path);

}  // namespace tethersim

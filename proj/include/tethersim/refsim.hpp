#pragma once

#include <vector>

#include "tethersim/model.hpp"
#include "tethersim/params.hpp"
#include "tethersim/state.hpp"

namespace tethersim::refsim {

// Classical reference integrator for the fixed-drum subcase: RK4 on the
// continuous Euler-Lagrange equations of the spatially discretized model.
// The attachment constraint is eliminated analytically: r_1 and its rates
// never enter as independent coordinates; the x and base-attitude
// equations absorb the first-element inertia and forces.

struct Accel {
  Vec3 xddot = Vec3::Zero();
  Vec3 omega_dot = Vec3::Zero();
  std::vector<Vec3> rddot;    // all N+1 nodes; rddot[0] is reconstructed
  Vec3 omega_s_dot = Vec3::Zero();
};

// Accelerations solving the coupled linear system M(q) a = forces.
// Requires v.sp_dot == 0 (fixed drum) and the attachment constraint on g.
// Throws SingularMassMatrix if the kinetic form degenerates.
Accel continuous_rhs(const PhysParams& p, const GroupConfig& g, const VelocityState& v);

// One classical RK4 step of size dt. Attitudes are integrated through
// exp_so3 increments in a per-step chart; the accumulated rotation is
// re-orthonormalized once (polar projection) at the end of the step.
void rk4_step(const PhysParams& p, GroupConfig& g, VelocityState& v, double dt);

}  // namespace tethersim::refsim

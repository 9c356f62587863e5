#pragma once

#include <vector>

#include "tethersim/params.hpp"
#include "tethersim/state.hpp"
#include "tethersim/types.hpp"

namespace tethersim {

// FEM inertia coefficients of the deployed tether at a given configuration.
// M1 = M2 = mu l/3 and M12 = mu l/6 are the usual consistent-mass entries;
// M3, M23, M31 carry the convective coupling with the reeling rate. M23/M31
// are vectors along r_a - r_{a+1}.
struct InertiaCoeffs {
  double M1 = 0.0;
  double M2 = 0.0;
  double M12 = 0.0;
  std::vector<double> M3;   // [a-1], a = 1..N
  std::vector<Vec3> M23;    // [a-1]
  std::vector<Vec3> M31;    // [a-1]

  // d/ds_p of the scalar coefficients (M23/M31 do not depend on s_p).
  double dM1 = 0.0;
  double dM12 = 0.0;
  std::vector<double> dM3;
};

InertiaCoeffs inertia_coeffs(const PhysParams& p, double s_p, const std::vector<Vec3>& r);

struct KineticBreakdown {
  double T_base = 0.0;    // base body + drum + stored tether
  double T_tether = 0.0;  // deployed FEM elements
  double T_sub = 0.0;     // sub-spacecraft, including the attachment cross term
  double total() const { return T_base + T_tether + T_sub; }
};

// Discrete kinetic energy of one step, the quadratic form in the increment
// divided by h^2. Not sign-definite term by term; only the full form is
// positive semidefinite.
KineticBreakdown discrete_kinetic(const PhysParams& p, const GroupConfig& g,
                                  const GroupIncrement& f);

struct PotentialBreakdown {
  double V_gravity = 0.0;
  double V_elastic = 0.0;
  double total() const { return V_gravity + V_elastic; }
};

// Gravity (base lump, per-element midpoint rule, sub COM) plus quadratic
// strain energy. Throws SingularRadius if any gravity denominator < 1 m.
PotentialBreakdown discrete_potential(const PhysParams& p, const GroupConfig& g);

// Discrete Lagrangian L_d(g, f) = h T(g,f) - h/2 V(g) - h/2 V(g f).
double discrete_lagrangian(const PhysParams& p, const GroupConfig& g,
                           const GroupIncrement& f);

struct EnergyBreakdown {
  double T_base_sub = 0.0;
  double T_tether = 0.0;
  double V_gravity = 0.0;
  double V_elastic = 0.0;
  double T() const { return T_base_sub + T_tether; }
  double V() const { return V_gravity + V_elastic; }
  double E() const { return T() + V(); }
};

// Continuous-time energy with velocities in place of difference quotients
// (same FEM quadratic form for the tether).
EnergyBreakdown continuous_energy(const PhysParams& p, const GroupConfig& g,
                                  const VelocityState& v);

// Tension carried by one element with end points r_a, r_b and unstretched
// length l: magnitude EA (|r'| - 1) along r_b - r_a. Compressive for
// |r'| < 1, exactly as the formula dictates (no slack model).
// Throws ZeroLengthElement if |r_b - r_a| < 1e-12 l.
Vec3 tension(const Vec3& r_a, const Vec3& r_b, double l, double EA);

// Trivialized gradient of the potential, laid out as an AlgebraVector:
// plain partials on x / s_p / r slots, zero on the base-attitude slot, and
// the left-trivialized derivative on the sub-attitude slot.
AlgebraVector potential_gradient(const PhysParams& p, const GroupConfig& g);

// Momenta of the continuous kinetic form (the fiber derivative), laid out
// as an AlgebraVector: m_b xdot on x, J Omega on phi, and so on.
AlgebraVector continuous_momentum(const PhysParams& p, const GroupConfig& g,
                                  const VelocityState& v);

// Angular momentum about the origin of the continuous kinetic form,
// x x p_x + sum_a r_a x p_a + R p_Omega + R_s p_Omega_s.
Vec3 angular_momentum(const PhysParams& p, const GroupConfig& g, const VelocityState& v);

}  // namespace tethersim

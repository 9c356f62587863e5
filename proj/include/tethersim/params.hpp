#pragma once

#include "tethersim/types.hpp"

namespace tethersim {

// All values SI. The attachment offset is rho = [d, 0, b]: drum radius d
// along the first body axis, guideway length b along the third.
struct PhysParams {
  double m = 490.0;      // base spacecraft mass [kg]
  double m_r = 10.0;     // reeling drum mass [kg]
  double m_s = 150.0;    // sub-spacecraft mass [kg]
  Mat3 J = Vec3(5675.8, 5675.8, 6125.0).asDiagonal();   // base inertia [kg m^2]
  Mat3 J_s = Vec3(500.0, 500.0, 300.0).asDiagonal();    // sub inertia [kg m^2]
  Vec3 rho = Vec3(0.5, 0.0, 1.0);    // base COM -> guideway start, body frame [m]
  Vec3 rho_s = Vec3(0.0, 0.0, 1.0);  // tether end -> sub COM, body frame [m]
  double d = 0.5;        // drum radius [m]
  double b = 1.0;        // guideway length [m]
  double kappa2 = 5.0;   // drum inertia coefficient e2 . kappa_r e2 [kg]
  double L = 120.0e3;    // total unstretched tether length [m]
  double mu_bar = 24.7e-3;  // tether mass per unstretched length [kg/m]
  double EA = 659700.0;  // axial stiffness [N]
  double GM = 3.986004418e14;  // gravitational parameter [m^3/s^2]
  int N = 20;            // tether element count
  double h = 0.05;       // time step [s]

  // Throws ConfigInvalid unless all masses/lengths/EA/GM/N/h are strictly
  // positive, J and J_s are symmetric positive definite, and
  // rho == [d, 0, b].
  void validate() const;

  // m + m_r + mu_bar * s_p: everything riding at the base center.
  double base_mass(double s_p) const { return m + m_r + mu_bar * s_p; }

  // Unstretched length of one element, (L - s_p) / N.
  // Throws FullyReeled if s_p >= L.
  double element_length(double s_p) const;
};

// Non-standard inertia J_d = tr(J)/2 I - J, so that the rotational kinetic
// energy becomes a trace form in the rotation increment.
Mat3 nonstandard_inertia(const Mat3& J);

// Earth radius used for altitude <-> radius conversion in presets [m].
inline constexpr double kEarthRadius = 6378137.0;

}  // namespace tethersim

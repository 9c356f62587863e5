#include "tethersim/model.hpp"

#include <cmath>
#include <string>

#include "tethersim/errors.hpp"
#include "tethersim/liegroup.hpp"

namespace tethersim {

namespace {

void check_dims(const PhysParams& p, const GroupConfig& g) {
  if (g.num_elements() != p.N) {
    throw DimensionMismatch("config has " + std::to_string(g.num_elements()) +
                            " elements, params say " + std::to_string(p.N));
  }
}

void check_dims(const PhysParams& p, const GroupIncrement& f) {
  if (f.num_elements() != p.N) {
    throw DimensionMismatch("increment has " + std::to_string(f.num_elements()) +
                            " elements, params say " + std::to_string(p.N));
  }
}

double safe_radius(const Vec3& v, const char* what) {
  const double n = v.norm();
  if (n < 1.0) throw SingularRadius(std::string(what) + " closer than 1 m to the origin");
  return n;
}

}  // namespace

InertiaCoeffs inertia_coeffs(const PhysParams& p, double s_p, const std::vector<Vec3>& r) {
  const int N = p.N;
  const double l = p.element_length(s_p);
  const double mu = p.mu_bar;

  InertiaCoeffs c;
  c.M1 = mu * l / 3.0;
  c.M2 = c.M1;
  c.M12 = mu * l / 6.0;
  c.dM1 = -mu / (3.0 * N);
  c.dM12 = -mu / (6.0 * N);
  c.M3.resize(N);
  c.dM3.resize(N);
  c.M23.resize(N);
  c.M31.resize(N);
  for (int a = 1; a <= N; ++a) {
    const double c3 = 3.0 * N * N + 3.0 * N + 1.0 - 6.0 * N * a - 3.0 * a + 3.0 * a * a;
    c.M3[a - 1] = mu * l * c3 / (3.0 * N * N);
    c.dM3[a - 1] = -mu * c3 / (3.0 * N * N * N);
    const Vec3 diff = r[a - 1] - r[a];
    c.M23[a - 1] = mu * (1.0 + 3.0 * N - 3.0 * a) / (6.0 * N) * diff;
    c.M31[a - 1] = mu * (2.0 + 3.0 * N - 3.0 * a) / (6.0 * N) * diff;
  }
  return c;
}

KineticBreakdown discrete_kinetic(const PhysParams& p, const GroupConfig& g,
                                  const GroupIncrement& f) {
  check_dims(p, g);
  check_dims(p, f);
  const int N = p.N;
  const double h2 = p.h * p.h;
  const InertiaCoeffs c = inertia_coeffs(p, g.s_p, g.r);
  const Mat3 Jd = nonstandard_inertia(p.J);
  const Mat3 Jsd = nonstandard_inertia(p.J_s);

  KineticBreakdown T;
  T.T_base = 0.5 / h2 * p.base_mass(g.s_p) * f.dx.squaredNorm() +
             0.5 / h2 * (p.mu_bar * g.s_p + p.kappa2) * f.ds_p * f.ds_p +
             ((Mat3::Identity() - f.F) * Jd).trace() / h2;

  for (int a = 1; a <= N; ++a) {
    const Vec3& da = f.dr[a - 1];
    const Vec3& db = f.dr[a];
    T.T_tether += 0.5 / h2 * c.M1 * da.squaredNorm() +
                  0.5 / h2 * c.M2 * db.squaredNorm() +
                  0.5 / h2 * c.M3[a - 1] * f.ds_p * f.ds_p +
                  c.M12 / h2 * da.dot(db) +
                  f.ds_p / h2 * c.M23[a - 1].dot(db) +
                  f.ds_p / h2 * c.M31[a - 1].dot(da);
  }

  // NOTE: the cross term takes the sub body's first mass moment about the
  // tether attachment to be m_s * rho_s (mass times COM offset); rho_s is
  // defined as the attachment-to-COM vector, so no separate moment
  // parameter exists.
  const Vec3& dn = f.dr[N];
  T.T_sub = 0.5 / h2 * p.m_s * dn.squaredNorm() +
            ((Mat3::Identity() - f.F_s) * Jsd).trace() / h2 +
            p.m_s / h2 * dn.dot(g.R_s * (f.F_s - Mat3::Identity()) * p.rho_s);
  return T;
}

PotentialBreakdown discrete_potential(const PhysParams& p, const GroupConfig& g) {
  check_dims(p, g);
  const int N = p.N;
  const double l = p.element_length(g.s_p);

  PotentialBreakdown V;
  V.V_gravity = -p.GM * p.base_mass(g.s_p) / safe_radius(g.x, "base");
  for (int a = 1; a <= N; ++a) {
    const Vec3& ra = g.r[a - 1];
    const Vec3& rb = g.r[a];
    V.V_gravity += -2.0 * p.GM * p.mu_bar * l / safe_radius(ra + rb, "tether element");
    const double stretch = (rb - ra).norm() - l;
    V.V_elastic += 0.5 * p.EA / l * stretch * stretch;
  }
  V.V_gravity += -p.GM * p.m_s / safe_radius(g.r[N] + g.R_s * p.rho_s, "sub-spacecraft");
  return V;
}

double discrete_lagrangian(const PhysParams& p, const GroupConfig& g,
                           const GroupIncrement& f) {
  const double T = discrete_kinetic(p, g, f).total();
  const double V0 = discrete_potential(p, g).total();
  const double V1 = discrete_potential(p, group_compose(g, f)).total();
  return p.h * T - 0.5 * p.h * (V0 + V1);
}

EnergyBreakdown continuous_energy(const PhysParams& p, const GroupConfig& g,
                                  const VelocityState& v) {
  check_dims(p, g);
  if (v.num_elements() != p.N) throw DimensionMismatch("velocity state has wrong element count");
  const int N = p.N;
  const InertiaCoeffs c = inertia_coeffs(p, g.s_p, g.r);

  EnergyBreakdown e;
  e.T_base_sub = 0.5 * p.base_mass(g.s_p) * v.xdot.squaredNorm() +
                 0.5 * v.omega.dot(p.J * v.omega) +
                 0.5 * (p.mu_bar * g.s_p + p.kappa2) * v.sp_dot * v.sp_dot;

  for (int a = 1; a <= N; ++a) {
    const Vec3& ua = v.rdot[a - 1];
    const Vec3& ub = v.rdot[a];
    e.T_tether += 0.5 * c.M1 * ua.squaredNorm() + 0.5 * c.M2 * ub.squaredNorm() +
                  0.5 * c.M3[a - 1] * v.sp_dot * v.sp_dot + c.M12 * ua.dot(ub) +
                  v.sp_dot * c.M23[a - 1].dot(ub) + v.sp_dot * c.M31[a - 1].dot(ua);
  }

  const Vec3& un = v.rdot[N];
  e.T_base_sub += 0.5 * p.m_s * un.squaredNorm() +
                  p.m_s * un.dot(g.R_s * lie::hat(v.omega_s) * p.rho_s) +
                  0.5 * v.omega_s.dot(p.J_s * v.omega_s);

  const PotentialBreakdown V = discrete_potential(p, g);
  e.V_gravity = V.V_gravity;
  e.V_elastic = V.V_elastic;
  return e;
}

Vec3 tension(const Vec3& r_a, const Vec3& r_b, double l, double EA) {
  if (!(l > 0.0)) throw ZeroLengthElement("tension: unstretched length must be positive");
  const Vec3 d = r_b - r_a;
  const double len = d.norm();
  if (len < 1e-12 * l) throw ZeroLengthElement("tension: element collapsed to a point");
  // r' ~ d / l, so |r'| = len / l and the direction is d / len.
  const double stretch_ratio = len / l;
  return EA * (stretch_ratio - 1.0) / len * d;
}

AlgebraVector potential_gradient(const PhysParams& p, const GroupConfig& g) {
  check_dims(p, g);
  const int N = p.N;
  const double l = p.element_length(g.s_p);
  AlgebraVector grad(N);

  // Base lump.
  const double xr = safe_radius(g.x, "base");
  grad.dx() = p.GM * p.base_mass(g.s_p) * g.x / (xr * xr * xr);
  grad.ds_p() += -p.GM * p.mu_bar / xr;

  // Tether elements: midpoint gravity and quadratic strain energy. Both
  // carry s_p dependence through l(s_p), dl/ds_p = -1/N.
  for (int a = 1; a <= N; ++a) {
    const Vec3& ra = g.r[a - 1];
    const Vec3& rb = g.r[a];
    const Vec3 sum = ra + rb;
    const double sr = safe_radius(sum, "tether element");
    const Vec3 grav = 2.0 * p.GM * p.mu_bar * l * sum / (sr * sr * sr);
    grad.dr(a) += grav;
    grad.dr(a + 1) += grav;
    grad.ds_p() += 2.0 * p.GM * p.mu_bar / (static_cast<double>(p.N) * sr);

    const Vec3 d = rb - ra;
    const double len = d.norm();
    if (len < 1e-12 * l) throw ZeroLengthElement("potential_gradient: collapsed element");
    const double e = len - l;
    const Vec3 spring = p.EA / l * e / len * d;
    grad.dr(a) -= spring;
    grad.dr(a + 1) += spring;
    grad.ds_p() += 0.5 * p.EA / p.N * (2.0 * e / l + e * e / (l * l));
  }

  // Sub-spacecraft COM gravity; the attitude slot is the left-trivialized
  // derivative at R_s.
  const Vec3 c = g.r[N] + g.R_s * p.rho_s;
  const double cr = safe_radius(c, "sub-spacecraft");
  const Vec3 gamma = p.GM * p.m_s * c / (cr * cr * cr);
  grad.dr(N + 1) += gamma;
  grad.phi_s() = p.rho_s.cross(g.R_s.transpose() * gamma);
  return grad;
}

AlgebraVector continuous_momentum(const PhysParams& p, const GroupConfig& g,
                                  const VelocityState& v) {
  check_dims(p, g);
  const int N = p.N;
  const InertiaCoeffs c = inertia_coeffs(p, g.s_p, g.r);
  AlgebraVector mom(N);

  mom.dx() = p.base_mass(g.s_p) * v.xdot;
  mom.phi() = p.J * v.omega;
  mom.ds_p() = (p.mu_bar * g.s_p + p.kappa2) * v.sp_dot;
  for (int a = 1; a <= N; ++a) {
    mom.ds_p() += c.M3[a - 1] * v.sp_dot + c.M23[a - 1].dot(v.rdot[a]) +
                  c.M31[a - 1].dot(v.rdot[a - 1]);
    mom.dr(a) += c.M1 * v.rdot[a - 1] + c.M12 * v.rdot[a] + v.sp_dot * c.M31[a - 1];
    mom.dr(a + 1) += c.M2 * v.rdot[a] + c.M12 * v.rdot[a - 1] + v.sp_dot * c.M23[a - 1];
  }
  mom.dr(N + 1) += p.m_s * (v.rdot[N] + g.R_s * lie::hat(v.omega_s) * p.rho_s);
  mom.phi_s() = p.J_s * v.omega_s + p.m_s * p.rho_s.cross(g.R_s.transpose() * v.rdot[N]);
  return mom;
}

Vec3 angular_momentum(const PhysParams& p, const GroupConfig& g, const VelocityState& v) {
  const AlgebraVector mom = continuous_momentum(p, g, v);
  Vec3 pi = g.x.cross(Vec3(mom.dx())) + g.R * Vec3(mom.phi()) + g.R_s * Vec3(mom.phi_s());
  for (int a = 1; a <= p.N + 1; ++a) pi += g.r[a - 1].cross(Vec3(mom.dr(a)));
  return pi;
}

}  // namespace tethersim

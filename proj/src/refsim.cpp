#include "tethersim/refsim.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "tethersim/errors.hpp"
#include "tethersim/liegroup.hpp"

namespace tethersim::refsim {

namespace {

using lie::exp_so3;
using lie::hat;
using lie::project_to_so3;
using lie::right_jacobian_inv_so3;

// Reduced coordinate order: [xddot(3), omega_dot(3), rddot_2..rddot_{N+1}(3N),
// omega_s_dot(3)].
int dim(int N) { return 3 * N + 9; }
int off_r(int j) { return 6 + 3 * (j - 2); }  // j = 2..N+1

}  // namespace

Accel continuous_rhs(const PhysParams& p, const GroupConfig& g, const VelocityState& v) {
  if (g.num_elements() != p.N || v.num_elements() != p.N) {
    throw DimensionMismatch("continuous_rhs: element count mismatch");
  }
  const int N = p.N;
  const int n = dim(N);
  const InertiaCoeffs c = inertia_coeffs(p, g.s_p, g.r);
  const double mb = p.base_mass(g.s_p);
  const Mat3 rho_hat = hat(p.rho);
  const Mat3 rho_s_hat = hat(p.rho_s);

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);

  const AlgebraVector gv = potential_gradient(p, g);
  const Vec3 V_x = gv.dx();
  const Vec3 V_r1 = gv.dr(1);
  const Vec3 Gamma = gv.phi_s();

  // Base translation, with the first tether node slaved to x + R rho.
  M.block<3, 3>(0, 0) = (mb + c.M1) * Mat3::Identity();
  M.block<3, 3>(0, 3) = -c.M1 * g.R * rho_hat;
  M.block<3, 3>(0, off_r(2)) = c.M12 * Mat3::Identity();
  b.segment<3>(0) = -V_x - V_r1 + c.M1 * g.R * hat(v.omega) * rho_hat * v.omega;

  // Base attitude (left-trivialized, body frame).
  const Vec3 rdot2 = v.rdot[1];
  const Vec3 w = c.M1 * v.xdot + c.M12 * rdot2;
  const Vec3 Rtw = g.R.transpose() * w;
  const Vec3 p_omega = (p.J - c.M1 * rho_hat * rho_hat) * v.omega + p.rho.cross(Rtw);
  M.block<3, 3>(3, 0) = c.M1 * rho_hat * g.R.transpose();
  M.block<3, 3>(3, 3) = p.J - c.M1 * rho_hat * rho_hat;
  M.block<3, 3>(3, off_r(2)) = c.M12 * rho_hat * g.R.transpose();
  b.segment<3>(3) = p_omega.cross(v.omega) + Rtw.cross(p.rho.cross(v.omega)) +
                    p.rho.cross(v.omega.cross(Rtw)) - p.rho.cross(g.R.transpose() * V_r1);

  // Tether nodes 2..N+1.
  for (int j = 2; j <= N + 1; ++j) {
    const int o = off_r(j);
    double diag = 0.0;
    if (j <= N) diag += c.M1;
    if (j >= 2) diag += c.M2;
    if (j == N + 1) diag += p.m_s;
    M.block<3, 3>(o, o) = diag * Mat3::Identity();
    if (j <= N) M.block<3, 3>(o, off_r(j + 1)) = c.M12 * Mat3::Identity();
    if (j >= 3) M.block<3, 3>(o, off_r(j - 1)) = c.M12 * Mat3::Identity();
    b.segment<3>(o) = -Vec3(gv.dr(j));
    if (j == 2) {
      // Element 1 reaches the slaved node: chain through r_1 = x + R rho.
      M.block<3, 3>(o, 0) = c.M12 * Mat3::Identity();
      M.block<3, 3>(o, 3) = -c.M12 * g.R * rho_hat;
      b.segment<3>(o) += c.M12 * g.R * hat(v.omega) * rho_hat * v.omega;
    }
  }

  // Sub-spacecraft attitude coupling.
  const int on = off_r(N + 1);
  const int os = n - 3;
  M.block<3, 3>(on, os) = -p.m_s * g.R_s * rho_s_hat;
  b.segment<3>(on) += p.m_s * g.R_s * hat(v.omega_s) * rho_s_hat * v.omega_s;

  const Vec3 w_s = p.m_s * v.rdot[N];
  const Vec3 Rtws = g.R_s.transpose() * w_s;
  const Vec3 p_omega_s = p.J_s * v.omega_s + p.rho_s.cross(Rtws);
  M.block<3, 3>(os, on) = p.m_s * rho_s_hat * g.R_s.transpose();
  M.block<3, 3>(os, os) = p.J_s;
  b.segment<3>(os) = p_omega_s.cross(v.omega_s) + Rtws.cross(p.rho_s.cross(v.omega_s)) +
                     p.rho_s.cross(v.omega_s.cross(Rtws)) - Gamma;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success) {
    throw SingularMassMatrix("continuous_rhs: kinetic form factorization failed");
  }
  const Eigen::VectorXd a = ldlt.solve(b);
  if (!a.allFinite()) {
    throw SingularMassMatrix("continuous_rhs: singular kinetic form");
  }

  Accel out;
  out.xddot = a.segment<3>(0);
  out.omega_dot = a.segment<3>(3);
  out.rddot.resize(N + 1);
  for (int j = 2; j <= N + 1; ++j) out.rddot[j - 1] = a.segment<3>(off_r(j));
  out.omega_s_dot = a.segment<3>(os);
  // r_1 rides with the base.
  out.rddot[0] = out.xddot + g.R * (hat(v.omega) * hat(v.omega) + hat(out.omega_dot)) * p.rho;
  return out;
}

void rk4_step(const PhysParams& p, GroupConfig& g, VelocityState& v, double dt) {
  const int N = p.N;
  // Per-step chart: x, sigma, r_2.., sigma_s followed by the velocities.
  const int nq = 3 * N + 9;
  const int nv = 3 * N + 9;
  Eigen::VectorXd y(nq + nv);
  y.setZero();
  y.segment<3>(0) = g.x;
  for (int j = 2; j <= N + 1; ++j) y.segment<3>(off_r(j)) = g.r[j - 1];
  y.segment<3>(nq + 0) = v.xdot;
  y.segment<3>(nq + 3) = v.omega;
  for (int j = 2; j <= N + 1; ++j) y.segment<3>(nq + off_r(j)) = v.rdot[j - 1];
  y.segment<3>(nq + nv - 3) = v.omega_s;

  const Rotation R0 = g.R;
  const Rotation Rs0 = g.R_s;

  auto deriv = [&](const Eigen::VectorXd& s) {
    GroupConfig gc = g;
    VelocityState vc = v;
    gc.x = s.segment<3>(0);
    const Vec3 sigma = s.segment<3>(3);
    const Vec3 sigma_s = s.segment<3>(nq - 3);
    gc.R = R0 * exp_so3(sigma);
    gc.R_s = Rs0 * exp_so3(sigma_s);
    for (int j = 2; j <= N + 1; ++j) gc.r[j - 1] = s.segment<3>(off_r(j));
    gc.r[0] = gc.x + gc.R * p.rho;
    vc.xdot = s.segment<3>(nq + 0);
    vc.omega = s.segment<3>(nq + 3);
    for (int j = 2; j <= N + 1; ++j) vc.rdot[j - 1] = s.segment<3>(nq + off_r(j));
    vc.omega_s = s.segment<3>(nq + nv - 3);
    vc.rdot[0] = vc.xdot + gc.R * hat(vc.omega) * p.rho;
    vc.sp_dot = 0.0;

    const Accel a = continuous_rhs(p, gc, vc);
    Eigen::VectorXd dy(nq + nv);
    dy.segment<3>(0) = vc.xdot;
    dy.segment<3>(3) = right_jacobian_inv_so3(sigma) * vc.omega;
    for (int j = 2; j <= N + 1; ++j) dy.segment<3>(off_r(j)) = vc.rdot[j - 1];
    dy.segment<3>(nq - 3) = right_jacobian_inv_so3(sigma_s) * vc.omega_s;
    dy.segment<3>(nq + 0) = a.xddot;
    dy.segment<3>(nq + 3) = a.omega_dot;
    for (int j = 2; j <= N + 1; ++j) dy.segment<3>(nq + off_r(j)) = a.rddot[j - 1];
    dy.segment<3>(nq + nv - 3) = a.omega_s_dot;
    return dy;
  };

  const Eigen::VectorXd k1 = deriv(y);
  const Eigen::VectorXd k2 = deriv(y + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = deriv(y + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = deriv(y + dt * k3);
  y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  g.x = y.segment<3>(0);
  g.R = project_to_so3(R0 * exp_so3(Vec3(y.segment<3>(3))));
  g.R_s = project_to_so3(Rs0 * exp_so3(Vec3(y.segment<3>(nq - 3))));
  for (int j = 2; j <= N + 1; ++j) g.r[j - 1] = y.segment<3>(off_r(j));
  g.r[0] = g.x + g.R * p.rho;
  v.xdot = y.segment<3>(nq + 0);
  v.omega = y.segment<3>(nq + 3);
  for (int j = 2; j <= N + 1; ++j) v.rdot[j - 1] = y.segment<3>(nq + off_r(j));
  v.omega_s = y.segment<3>(nq + nv - 3);
  v.rdot[0] = v.xdot + g.R * hat(v.omega) * p.rho;
  v.sp_dot = 0.0;
}

}  // namespace tethersim::refsim

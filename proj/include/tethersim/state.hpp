#pragma once

#include <vector>

#include "tethersim/types.hpp"

namespace tethersim {

// One point of the configuration group
// G = R^3 x SO(3) x R x (R^3)^(N+1) x SO(3),
// acting on itself by the diagonal action (addition on the abelian
// factors, right multiplication on the rotations).
struct GroupConfig {
  Vec3 x = Vec3::Zero();        // base COM, inertial frame [m]
  Rotation R = Mat3::Identity();
  double s_p = 0.0;             // drum-side unstretched arc length [m]
  std::vector<Vec3> r;          // tether nodes r[0..N], r[0] is the attachment
  Rotation R_s = Mat3::Identity();

  int num_elements() const { return static_cast<int>(r.size()) - 1; }

  const Vec3& node(int a) const { return r[a - 1]; }  // a = 1..N+1
  Vec3& node(int a) { return r[a - 1]; }

  // || r_1 - (x + R rho) ||, the attachment defect.
  double attachment_defect(const Vec3& rho) const { return (r.front() - (x + R * rho)).norm(); }
};

// Relative update f with g_{k+1} = g_k f_k; same layout as GroupConfig.
struct GroupIncrement {
  Vec3 dx = Vec3::Zero();
  Rotation F = Mat3::Identity();
  double ds_p = 0.0;
  std::vector<Vec3> dr;
  Rotation F_s = Mat3::Identity();

  int num_elements() const { return static_cast<int>(dr.size()) - 1; }

  static GroupIncrement identity(int n_elements);

  GroupIncrement inverse() const;

  // Group product (this * other), componentwise on the abelian factors and
  // matrix product on the rotations.
  GroupIncrement compose(const GroupIncrement& other) const;
};

GroupConfig group_compose(const GroupConfig& g, const GroupIncrement& f);

struct VelocityState {
  Vec3 xdot = Vec3::Zero();
  Vec3 omega = Vec3::Zero();     // base angular velocity, body frame
  double sp_dot = 0.0;
  std::vector<Vec3> rdot;
  Vec3 omega_s = Vec3::Zero();   // sub angular velocity, body frame

  int num_elements() const { return static_cast<int>(rdot.size()) - 1; }
};

// Left-trivialized tangent/cotangent coordinates, laid out as
//   [ dx(3) | phi(3) | ds_p(1) | dr_1(3) ... dr_{N+1}(3) | phi_s(3) ],
// total length 3N + 13. The Newton unknown and the discrete Euler-Lagrange
// residual both live here.
class AlgebraVector {
 public:
  explicit AlgebraVector(int n_elements)
      : n_(n_elements), v_(Eigen::VectorXd::Zero(dimension(n_elements))) {}

  static int dimension(int n_elements) { return 3 * n_elements + 13; }

  int num_elements() const { return n_; }
  int size() const { return static_cast<int>(v_.size()); }

  Eigen::VectorXd& raw() { return v_; }
  const Eigen::VectorXd& raw() const { return v_; }

  auto dx() { return v_.segment<3>(0); }
  auto dx() const { return v_.segment<3>(0); }
  auto phi() { return v_.segment<3>(3); }
  auto phi() const { return v_.segment<3>(3); }
  double& ds_p() { return v_(6); }
  double ds_p() const { return v_(6); }
  auto dr(int a) { return v_.segment<3>(7 + 3 * (a - 1)); }        // a = 1..N+1
  auto dr(int a) const { return v_.segment<3>(7 + 3 * (a - 1)); }
  auto phi_s() { return v_.segment<3>(3 * n_ + 10); }
  auto phi_s() const { return v_.segment<3>(3 * n_ + 10); }

  // Flat index helpers for tests and solvers.
  static int idx_dx() { return 0; }
  static int idx_phi() { return 3; }
  static int idx_ds_p() { return 6; }
  static int idx_dr(int a) { return 7 + 3 * (a - 1); }
  int idx_phi_s() const { return 3 * n_ + 10; }

  // Group exponential of this algebra element (exact per factor:
  // addition on abelian slots, exp_so3 on the rotation slots).
  GroupIncrement exp() const;

 private:
  int n_;
  Eigen::VectorXd v_;
};

// Inverse of the velocity map: v ~ increment / h, with rotation slots
// through log_so3.
VelocityState increment_to_velocity(const GroupIncrement& f, double h);

// Velocity map: dx = h xdot, F = exp_so3(h omega), ...
GroupIncrement velocity_to_increment(const VelocityState& v, double h);

}  // namespace tethersim

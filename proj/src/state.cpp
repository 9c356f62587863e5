#include "tethersim/state.hpp"

#include "tethersim/errors.hpp"
#include "tethersim/liegroup.hpp"

namespace tethersim {

GroupIncrement GroupIncrement::identity(int n_elements) {
  GroupIncrement f;
  f.dr.assign(n_elements + 1, Vec3::Zero());
  return f;
}

GroupIncrement GroupIncrement::inverse() const {
  GroupIncrement inv;
  inv.dx = -dx;
  inv.F = F.transpose();
  inv.ds_p = -ds_p;
  inv.dr.resize(dr.size());
  for (size_t i = 0; i < dr.size(); ++i) inv.dr[i] = -dr[i];
  inv.F_s = F_s.transpose();
  return inv;
}

GroupIncrement GroupIncrement::compose(const GroupIncrement& other) const {
  if (dr.size() != other.dr.size()) {
    throw DimensionMismatch("GroupIncrement::compose: element counts differ");
  }
  GroupIncrement out;
  out.dx = dx + other.dx;
  out.F = F * other.F;
  out.ds_p = ds_p + other.ds_p;
  out.dr.resize(dr.size());
  for (size_t i = 0; i < dr.size(); ++i) out.dr[i] = dr[i] + other.dr[i];
  out.F_s = F_s * other.F_s;
  return out;
}

GroupConfig group_compose(const GroupConfig& g, const GroupIncrement& f) {
  if (g.r.size() != f.dr.size()) {
    throw DimensionMismatch("group_compose: config and increment element counts differ");
  }
  GroupConfig out;
  out.x = g.x + f.dx;
  out.R = g.R * f.F;
  out.s_p = g.s_p + f.ds_p;
  out.r.resize(g.r.size());
  for (size_t i = 0; i < g.r.size(); ++i) out.r[i] = g.r[i] + f.dr[i];
  out.R_s = g.R_s * f.F_s;
  return out;
}

GroupIncrement AlgebraVector::exp() const {
  GroupIncrement f;
  f.dx = dx();
  f.F = lie::exp_so3(phi());
  f.ds_p = ds_p();
  f.dr.resize(n_ + 1);
  for (int a = 1; a <= n_ + 1; ++a) f.dr[a - 1] = dr(a);
  f.F_s = lie::exp_so3(phi_s());
  return f;
}

VelocityState increment_to_velocity(const GroupIncrement& f, double h) {
  VelocityState v;
  v.xdot = f.dx / h;
  v.omega = lie::log_so3(f.F) / h;
  v.sp_dot = f.ds_p / h;
  v.rdot.resize(f.dr.size());
  for (size_t i = 0; i < f.dr.size(); ++i) v.rdot[i] = f.dr[i] / h;
  v.omega_s = lie::log_so3(f.F_s) / h;
  return v;
}

GroupIncrement velocity_to_increment(const VelocityState& v, double h) {
  GroupIncrement f;
  f.dx = h * v.xdot;
  f.F = lie::exp_so3(h * v.omega);
  f.ds_p = h * v.sp_dot;
  f.dr.resize(v.rdot.size());
  for (size_t i = 0; i < v.rdot.size(); ++i) f.dr[i] = h * v.rdot[i];
  f.F_s = lie::exp_so3(h * v.omega_s);
  return f;
}

}  // namespace tethersim

#pragma once

// Shared test fixtures: small-scale randomized states (well-conditioned for
// double-precision finite differencing) and the central-difference oracle
// for the two-step action sum.

#include <random>

#include "tethersim/lgvi.hpp"
#include "tethersim/liegroup.hpp"
#include "tethersim/model.hpp"
#include "tethersim/params.hpp"
#include "tethersim/state.hpp"

namespace tethersim::testsupport {

using Rng = std::mt19937;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_ball(Rng& rng, double radius) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  v.normalize();
  return uniform(rng, 0.0, radius) * v;
}

inline Rotation random_rotation(Rng& rng) {
  return lie::exp_so3(random_ball(rng, 3.0));
}

inline Mat3 random_spd(Rng& rng, double lo, double hi) {
  const Rotation Q = random_rotation(rng);
  const Vec3 ev(uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi));
  return Q * ev.asDiagonal() * Q.transpose();
}

// Order-one physical parameters: gradients and action values stay O(1), so
// central differences resolve 1e-6 relative comfortably.
inline PhysParams random_params(Rng& rng, int N) {
  PhysParams p;
  p.m = uniform(rng, 0.5, 2.0);
  p.m_r = uniform(rng, 0.1, 0.5);
  p.m_s = uniform(rng, 0.2, 1.0);
  p.J = random_spd(rng, 0.5, 2.0);
  p.J_s = random_spd(rng, 0.3, 1.5);
  p.d = uniform(rng, 0.2, 0.5);
  p.b = uniform(rng, 0.5, 1.0);
  p.rho = Vec3(p.d, 0.0, p.b);
  p.rho_s = random_ball(rng, 0.3);
  p.kappa2 = uniform(rng, 0.1, 1.0);
  p.L = 8.0;
  p.mu_bar = uniform(rng, 0.1, 1.0);
  p.EA = uniform(rng, 1.0, 10.0);
  p.GM = uniform(rng, 0.5, 5.0);
  p.N = N;
  p.h = uniform(rng, 0.05, 0.2);
  return p;
}

// Radii stay well above the 1 m singular guard; elements near unit stretch.
inline GroupConfig random_config(Rng& rng, const PhysParams& p) {
  GroupConfig g;
  g.x = Vec3(uniform(rng, 3.0, 5.0), 0.0, 0.0) + random_ball(rng, 1.0);
  g.R = random_rotation(rng);
  g.R_s = random_rotation(rng);
  g.s_p = uniform(rng, p.b + 1.0, 0.45 * p.L);
  const double l = p.element_length(g.s_p);
  g.r.resize(p.N + 1);
  g.r[0] = g.x + g.R * p.rho;
  for (int a = 2; a <= p.N + 1; ++a) {
    Vec3 dir = (g.r[a - 2].normalized() + random_ball(rng, 0.8)).normalized();
    g.r[a - 1] = g.r[a - 2] + dir * l * uniform(rng, 0.8, 1.2);
  }
  return g;
}

inline GroupIncrement random_increment(Rng& rng, const PhysParams& p, double scale) {
  GroupIncrement f;
  f.dx = random_ball(rng, scale * p.h);
  f.F = lie::exp_so3(random_ball(rng, 2.0 * scale * p.h));
  f.ds_p = uniform(rng, -0.3, 0.3) * scale * p.h;
  f.dr.resize(p.N + 1);
  for (auto& d : f.dr) d = random_ball(rng, scale * p.h);
  f.F_s = lie::exp_so3(random_ball(rng, 2.0 * scale * p.h));
  return f;
}

// Two-step action sum along a trivialized direction at g_k:
//   S(eps) = L_d(g_{k-1}, f_prev exp(eps zeta)) + L_d(g_k exp(eps zeta), exp(-eps zeta) f)
inline double action_sum(const PhysParams& p, const GroupConfig& g,
                         const GroupIncrement& f_prev, const GroupIncrement& f,
                         const AlgebraVector& zeta, double eps) {
  AlgebraVector step(zeta.num_elements());
  step.raw() = eps * zeta.raw();
  const GroupIncrement pos = step.exp();
  step.raw() = -eps * zeta.raw();
  const GroupIncrement neg = step.exp();

  const GroupConfig g_prev = group_compose(g, f_prev.inverse());
  return discrete_lagrangian(p, g_prev, f_prev.compose(pos)) +
         discrete_lagrangian(p, group_compose(g, pos), neg.compose(f));
}

// Central difference of the action sum along basis direction i.
inline double fd_action_gradient(const PhysParams& p, const GroupConfig& g,
                                 const GroupIncrement& f_prev, const GroupIncrement& f,
                                 int i, double eps) {
  AlgebraVector zeta(p.N);
  zeta.raw()(i) = 1.0;
  return (action_sum(p, g, f_prev, f, zeta, eps) -
          action_sum(p, g, f_prev, f, zeta, -eps)) /
         (2.0 * eps);
}

}  // namespace tethersim::testsupport

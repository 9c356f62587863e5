#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tethersim/diagnostics.hpp"
#include "tethersim/liegroup.hpp"
#include "tethersim/refsim.hpp"
#include "tethersim/runner.hpp"
#include "tethersim/scenario.hpp"

using namespace tethersim;
using testsupport::Rng;

namespace {

// Reduced continuous Lagrangian: r_1 and its rate ride with the base.
double lagrangian_of(const PhysParams& p, GroupConfig g, VelocityState v) {
  g.r[0] = g.x + g.R * p.rho;
  v.rdot[0] = v.xdot + g.R * lie::hat(v.omega) * p.rho;
  v.sp_dot = 0.0;
  const EnergyBreakdown e = continuous_energy(p, g, v);
  return e.T() - e.V();
}

// Reduced coordinate/velocity displacement helpers (trivialized on the
// rotations). Slot order matches refsim: x, base attitude, r_2.., sub.
int reduced_dim(int N) { return 3 * N + 9; }

GroupConfig displace_config(const PhysParams& p, GroupConfig g, const Eigen::VectorXd& dq) {
  g.x += dq.segment<3>(0);
  g.R = g.R * lie::exp_so3(dq.segment<3>(3));
  for (int j = 2; j <= p.N + 1; ++j) g.r[j - 1] += dq.segment<3>(6 + 3 * (j - 2));
  g.R_s = g.R_s * lie::exp_so3(dq.tail<3>());
  return g;
}

VelocityState displace_velocity(const PhysParams& p, VelocityState v, const Eigen::VectorXd& du) {
  v.xdot += du.segment<3>(0);
  v.omega += du.segment<3>(3);
  for (int j = 2; j <= p.N + 1; ++j) v.rdot[j - 1] += du.segment<3>(6 + 3 * (j - 2));
  v.omega_s += du.tail<3>();
  return v;
}

Eigen::VectorXd velocity_flat(const PhysParams& p, const VelocityState& v) {
  Eigen::VectorXd u(reduced_dim(p.N));
  u.segment<3>(0) = v.xdot;
  u.segment<3>(3) = v.omega;
  for (int j = 2; j <= p.N + 1; ++j) u.segment<3>(6 + 3 * (j - 2)) = v.rdot[j - 1];
  u.tail<3>() = v.omega_s;
  return u;
}

Eigen::VectorXd accel_flat(const PhysParams& p, const refsim::Accel& a) {
  Eigen::VectorXd out(reduced_dim(p.N));
  out.segment<3>(0) = a.xddot;
  out.segment<3>(3) = a.omega_dot;
  for (int j = 2; j <= p.N + 1; ++j) out.segment<3>(6 + 3 * (j - 2)) = a.rddot[j - 1];
  out.tail<3>() = a.omega_s_dot;
  return out;
}

// Fiber derivative dL/du at a state displaced by time_offset along the
// motion (q, u, a), by central differences.
Eigen::VectorXd momentum_fd(const PhysParams& p, const GroupConfig& g,
                            const VelocityState& v, const Eigen::VectorXd& a,
                            double time_offset) {
  const int n = reduced_dim(p.N);
  const double eps = 1e-5;
  const Eigen::VectorXd u0 = velocity_flat(p, v);
  const GroupConfig gq = displace_config(p, g, (time_offset * u0).eval());
  const VelocityState vq = displace_velocity(p, v, (time_offset * a).eval());
  Eigen::VectorXd mom(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd du = Eigen::VectorXd::Zero(n);
    du(i) = eps;
    const double Lp = lagrangian_of(p, gq, displace_velocity(p, vq, du));
    const double Lm = lagrangian_of(p, gq, displace_velocity(p, vq, (-du).eval()));
    mom(i) = (Lp - Lm) / (2.0 * eps);
  }
  return mom;
}

}  // namespace

TEST_CASE("continuous_rhs: accelerations satisfy the Lagrange equations (FD oracle)") {
  Rng rng(211);
  for (int trial = 0; trial < 4; ++trial) {
    const PhysParams p = testsupport::random_params(rng, 3);
    GroupConfig g = testsupport::random_config(rng, p);
    g.r[0] = g.x + g.R * p.rho;
    VelocityState v;
    v.xdot = testsupport::random_ball(rng, 0.2);
    v.omega = testsupport::random_ball(rng, 0.3);
    v.omega_s = testsupport::random_ball(rng, 0.3);
    v.sp_dot = 0.0;
    v.rdot.resize(p.N + 1);
    for (auto& rd : v.rdot) rd = testsupport::random_ball(rng, 0.2);
    v.rdot[0] = v.xdot + g.R * lie::hat(v.omega) * p.rho;

    const refsim::Accel acc = refsim::continuous_rhs(p, g, v);
    const Eigen::VectorXd a = accel_flat(p, acc);

    // Hamel-form Lagrange equations in the trivialized variables: with
    // body rates the attitude variations obey delta Omega = eta' + Omega x
    // eta, so the residual is dp/dt - p x Omega - DL/dq on those slots.
    const int n = reduced_dim(p.N);
    const double tau = 1e-4;
    const Eigen::VectorXd pdot =
        (momentum_fd(p, g, v, a, tau) - momentum_fd(p, g, v, a, -tau)) / (2.0 * tau);
    const Eigen::VectorXd p0 = momentum_fd(p, g, v, a, 0.0);
    Eigen::VectorXd dLdq(n);
    const double eps = 1e-5;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd dq = Eigen::VectorXd::Zero(n);
      dq(i) = eps;
      const double Lp = lagrangian_of(p, displace_config(p, g, dq), v);
      const double Lm = lagrangian_of(p, displace_config(p, g, (-dq).eval()), v);
      dLdq(i) = (Lp - Lm) / (2.0 * eps);
    }
    Eigen::VectorXd el = pdot - dLdq;
    el.segment<3>(3) -= Vec3(p0.segment<3>(3)).cross(v.omega);
    el.tail<3>() -= Vec3(p0.tail<3>()).cross(v.omega_s);
    const double scale = std::max({pdot.cwiseAbs().maxCoeff(), dLdq.cwiseAbs().maxCoeff(), 1.0});
    CHECK(el.cwiseAbs().maxCoeff() / scale < 1e-6);
  }
}

TEST_CASE("continuous_rhs: two-body limit and force-free rest") {
  // Point-mass limit: everything except the base is dynamically negligible.
  PhysParams p = pointmass_params();
  Scenario sc = scenario_preset("custom");
  sc.N = p.N;
  sc.h = p.h;
  auto [g, v] = build_initial_state(sc, p);
  const refsim::Accel acc = refsim::continuous_rhs(p, g, v);
  const Vec3 expected = -p.GM * g.x / std::pow(g.x.norm(), 3);
  CHECK((acc.xddot - expected).norm() < 1e-6 * expected.norm());

  // Straight unstretched tether at rest without gravity: nothing moves.
  Rng rng(223);
  PhysParams q = testsupport::random_params(rng, 4);
  q.GM = 0.0;
  GroupConfig gq = testsupport::random_config(rng, q);
  gq.r[0] = gq.x + gq.R * q.rho;
  const double l = q.element_length(gq.s_p);
  const Vec3 dir = Vec3(0.1, -1.0, 0.2).normalized();
  for (int a = 1; a <= q.N; ++a) gq.r[a] = gq.r[a - 1] + l * dir;
  VelocityState vq;
  vq.rdot.assign(q.N + 1, Vec3::Zero());
  const refsim::Accel rest = refsim::continuous_rhs(q, gq, vq);
  CHECK(accel_flat(q, rest).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rk4_step: Kepler orbit closes after one period") {
  PhysParams p = pointmass_params();
  Scenario sc = scenario_preset("custom");
  sc.N = p.N;
  auto [g, v] = build_initial_state(sc, p);

  const double a0 = g.x.norm();
  const double period = 2.0 * M_PI * std::sqrt(a0 * a0 * a0 / p.GM);
  const long steps = 5431;
  const double h = period / steps;  // ~1 s
  const Vec3 x0 = g.x;

  for (long k = 0; k < steps; ++k) refsim::rk4_step(p, g, v, h);
  CHECK((g.x - x0).norm() / a0 < 1e-6);
  CHECK(lie::orthogonality_error(g.R) < 1e-12);
}

TEST_CASE("rk4 reference drifts in energy where the variational run does not") {
  // The tumbling case excites the stiff elastic modes, which the classical
  // integrator damps secularly from the first orbit fraction on. The
  // variational run's energy only wobbles in a band, so its fitted trend
  // stays below the reference's secular rate. Sign of the comparison only;
  // absolute drifts depend on the horizon.
  Scenario sc = scenario_preset("case3");
  sc.h = 0.02;
  sc.t_f = 120.0;
  PhysParams p = default_params();

  RunOptions lgvi_opt;
  lgvi_opt.record_every = 4;
  const RunResult lgvi_run = run(sc, p, lgvi_opt);

  RunOptions rk4_opt = lgvi_opt;
  rk4_opt.integrator = Integrator::kRk4;
  const RunResult rk4_run = run(sc, p, rk4_opt);

  const diag::DriftStats dl = diag::drift_stats(lgvi_run.records);
  const diag::DriftStats dr = diag::drift_stats(rk4_run.records);
  CHECK(dr.trend < 0.0);  // the reference loses energy
  CHECK(std::abs(dr.trend) > std::abs(dl.trend));
}

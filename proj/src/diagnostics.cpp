#include "tethersim/diagnostics.hpp"

#include <cmath>

#include "tethersim/errors.hpp"
#include "tethersim/lgvi.hpp"
#include "tethersim/liegroup.hpp"

namespace tethersim::diag {

namespace {

DiagRecord observe_common(const PhysParams& p, const GroupConfig& g,
                          const VelocityState& v, double t) {
  DiagRecord rec;
  rec.t = t;
  const EnergyBreakdown e = continuous_energy(p, g, v);
  rec.T_base_sub = e.T_base_sub;
  rec.T_tether = e.T_tether;
  rec.V_gravity = e.V_gravity;
  rec.V_elastic = e.V_elastic;
  rec.E_total = e.T_base_sub + e.T_tether + e.V_gravity + e.V_elastic;
  rec.omega = v.omega;
  rec.omega_s = v.omega_s;
  rec.s_p = g.s_p;
  rec.len_unstretched = p.L - g.s_p;
  const double l = p.element_length(g.s_p);
  rec.strain.resize(p.N);
  for (int a = 1; a <= p.N; ++a) {
    const double len = (g.r[a] - g.r[a - 1]).norm();
    rec.len_stretched += len;
    rec.strain[a - 1] = (len - l) / l;
  }
  rec.ortho_err = std::max(lie::orthogonality_error(g.R), lie::orthogonality_error(g.R_s));
  return rec;
}

}  // namespace

DiagRecord observe(const PhysParams& p, const GroupConfig& g, const VelocityState& v,
                   double t) {
  DiagRecord rec = observe_common(p, g, v, t);
  rec.ang_mom = angular_momentum(p, g, v);
  return rec;
}

DiagRecord observe(const PhysParams& p, const GroupConfig& g, const GroupIncrement& f,
                   double t) {
  const VelocityState v = increment_to_velocity(f, p.h);
  DiagRecord rec = observe_common(p, g, v, t);

  // Discrete interval energy: one-sided velocity reconstruction would put
  // an O(h) wobble on E_total; the interval form is what the scheme holds
  // fixed up to the symplectic oscillation.
  const KineticBreakdown T = discrete_kinetic(p, g, f);
  const PotentialBreakdown V0 = discrete_potential(p, g);
  const PotentialBreakdown V1 = discrete_potential(p, group_compose(g, f));
  rec.T_base_sub = T.T_base + T.T_sub;
  rec.T_tether = T.T_tether;
  rec.V_gravity = 0.5 * (V0.V_gravity + V1.V_gravity);
  rec.V_elastic = 0.5 * (V0.V_elastic + V1.V_elastic);
  rec.E_total = rec.T_base_sub + rec.T_tether + rec.V_gravity + rec.V_elastic;

  rec.ang_mom = lgvi::discrete_angular_momentum(p, g, f);
  return rec;
}

DriftStats drift_stats(const std::vector<DiagRecord>& records) {
  if (records.size() < 100) {
    throw InsufficientData("drift_stats: need at least 100 records, have " +
                           std::to_string(records.size()));
  }
  DriftStats s;
  const double E0 = records.front().E_total;
  const double scale = std::abs(E0) > 0.0 ? std::abs(E0) : 1.0;

  // Least squares dE = a + trend * t.
  double st = 0.0, se = 0.0, stt = 0.0, ste = 0.0;
  const double n = static_cast<double>(records.size());
  for (const DiagRecord& r : records) {
    s.max_rel_dE = std::max(s.max_rel_dE, std::abs(r.dE) / scale);
    s.max_ortho_err = std::max(s.max_ortho_err, r.ortho_err);
    st += r.t;
    se += r.dE;
    stt += r.t * r.t;
    ste += r.t * r.dE;
  }
  const double denom = n * stt - st * st;
  s.trend = denom != 0.0 ? (n * ste - st * se) / denom : 0.0;
  return s;
}

}  // namespace tethersim::diag

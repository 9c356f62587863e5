// Acceptance suite: runs every gating criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"
#include "tethersim/diagnostics.hpp"
#include "tethersim/lgvi.hpp"
#include "tethersim/runner.hpp"
#include "tethersim/scenario.hpp"

using namespace tethersim;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

double max_node_distance(const GroupConfig& a, const GroupConfig& b) {
  double worst = (a.x - b.x).norm();
  for (size_t i = 0; i < a.r.size(); ++i) worst = std::max(worst, (a.r[i] - b.r[i]).norm());
  return worst;
}

}  // namespace

int main() {
  // ---- Case-1 desk run shared by criteria 1, 2 and 4.
  const PhysParams params = default_params();
  Scenario case1 = scenario_preset("case1");
  case1.t_f = 600.0;

  const auto wall0 = std::chrono::steady_clock::now();
  RunOptions opt;
  const RunResult desk = run(case1, params, opt);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  const diag::DriftStats drift = diag::drift_stats(desk.records);

  // 1. Orthogonality preservation, no reprojection, runtime budget.
  {
    const bool ok = desk.newton.all_converged && drift.max_ortho_err <= 1e-12 && wall < 60.0;
    report(1, "orthogonality", ok,
           "max ortho_err = " + fmt(drift.max_ortho_err) + ", wall = " + fmt(wall) + " s");
  }

  // 2. Energy behavior: bounded relative deviation on the desk run; the
  //    trend fit runs on the full published horizon, where the slow
  //    libration-scale energy exchange has averaged out and a straight-line
  //    component would mean genuine secular drift.
  {
    const bool bounded = drift.max_rel_dE <= 1e-7;

    Scenario full = scenario_preset("case1");
    RunOptions ro;
    ro.record_every = 5;
    const RunResult stretch = run(full, params, ro);
    const diag::DriftStats ds = diag::drift_stats(stretch.records);
    double max_abs_dE = 0.0;
    for (const auto& r : stretch.records) max_abs_dE = std::max(max_abs_dE, std::abs(r.dE));
    const bool trendless = std::abs(ds.trend) * full.t_f < 0.2 * max_abs_dE;

    report(2, "energy", bounded && trendless,
           "desk max |dE|/|E0| = " + fmt(drift.max_rel_dE) + "; 6000 s run: max rel = " +
               fmt(ds.max_rel_dE) + ", |trend| t_f / max|dE| = " +
               fmt(std::abs(ds.trend) * full.t_f / std::max(max_abs_dE, 1e-300)) +
               ", max ortho_err = " + fmt(ds.max_ortho_err));
  }

  // 4. Momentum map conservation (u = 0). The solver guarantee on the
  //    momentum map carries the symmetry generator's lever arm (the
  //    translation slots of the generator scale with the orbital radius).
  {
    const double pi0 = desk.records.front().ang_mom.norm();
    double r_max = 0.0;
    for (const auto& node : desk.final_config.r) r_max = std::max(r_max, node.norm());
    double max_step_change = 0.0;
    for (size_t k = 1; k < desk.records.size(); ++k) {
      max_step_change = std::max(
          max_step_change,
          (desk.records[k].ang_mom - desk.records[k - 1].ang_mom).norm());
    }
    const double bound = 10.0 * desk.newton.max_residual_norm * r_max;
    const double cumulative =
        (desk.records.back().ang_mom - desk.records.front().ang_mom).norm() / pi0;
    const bool ok = max_step_change <= bound && cumulative <= 1e-8;
    report(4, "momentum map", ok,
           "max step change = " + fmt(max_step_change) + " (residual bound " + fmt(bound) +
               "), cumulative rel = " + fmt(cumulative));
  }

  // 3. Tumbling robustness: case-3 desk run.
  {
    Scenario case3 = scenario_preset("case3");
    case3.t_f = 100.0;
    const RunResult res = run(case3, params, opt);
    const diag::DriftStats d3 = diag::drift_stats(res.records);
    const bool ok =
        res.newton.all_converged && d3.max_rel_dE <= 1e-5 && d3.max_ortho_err <= 1e-12;
    report(3, "tumbling", ok,
           "converged = " + std::string(res.newton.all_converged ? "yes" : "no") +
               ", max |dE|/|E0| = " + fmt(d3.max_rel_dE) +
               ", max ortho_err = " + fmt(d3.max_ortho_err));
  }

  // 5. Oracle agreement: order-2 shrink against the RK4 reference over 60 s.
  {
    std::vector<double> disc;
    for (const double h : {0.05, 0.025, 0.0125}) {
      Scenario sc = scenario_preset("case1");
      sc.h = h;
      sc.t_f = 60.0;
      RunOptions lg;
      lg.init = lgvi::InitMode::kLegendre;
      lg.record_every = 1 << 20;
      const RunResult lgvi_run = run(sc, params, lg);
      RunOptions rk;
      rk.integrator = Integrator::kRk4;
      rk.record_every = 1 << 20;
      const RunResult rk4_run = run(sc, params, rk);
      disc.push_back(max_node_distance(lgvi_run.final_config, rk4_run.final_config));
    }
    const double r1 = disc[0] / disc[1];
    const double r2 = disc[1] / disc[2];
    const bool ok = r1 >= 3.5 && r2 >= 3.5 && disc[2] <= 1.0;
    report(5, "reference agreement", ok,
           "discrepancy " + fmt(disc[0]) + " / " + fmt(disc[1]) + " / " + fmt(disc[2]) +
               " m, ratios " + fmt(r1) + ", " + fmt(r2));
  }

  // 6. Gradient correctness: the non-negotiable gate.
  {
    testsupport::Rng rng(20260810);
    int bad = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const PhysParams p = testsupport::random_params(rng, (trial % 2 == 0) ? 4 : 6);
      const GroupConfig g = testsupport::random_config(rng, p);
      const GroupIncrement f_prev = testsupport::random_increment(rng, p, 1.0);
      const GroupIncrement f = testsupport::random_increment(rng, p, 1.0);
      AlgebraVector res = lgvi::del_residual(p, g, f_prev, f, 0.0);
      res.ds_p() -= lgvi::carnot_forcing(p, g, f);

      Eigen::VectorXd fd(res.size());
      for (int i = 0; i < res.size(); ++i) {
        fd(i) = testsupport::fd_action_gradient(p, g, f_prev, f, i, 1e-6);
      }
      const double floor = 1e-4 * std::max(1.0, fd.cwiseAbs().maxCoeff());
      for (int i = 0; i < res.size(); ++i) {
        const double denom = std::max({std::abs(fd(i)), std::abs(res.raw()(i)), floor});
        const double rel = std::abs(res.raw()(i) - fd(i)) / denom;
        worst = std::max(worst, rel);
        if (rel > 1e-6) ++bad;
      }
    }
    report(6, "gradient correctness", bad == 0,
           "100 states, worst slot rel = " + fmt(worst));
  }

  // 7. Deployment physics: monotone release, non-decreasing energy,
  //    third-order energy-balance residual under refinement.
  {
    Scenario case2 = scenario_preset("case2");
    case2.t_f = 240.0;
    const RunResult res = run(case2, params, opt);
    bool monotone = res.newton.all_converged;
    for (size_t k = 1; k < res.records.size() && monotone; ++k) {
      monotone = res.records[k].s_p <= res.records[k - 1].s_p + 1e-9;
    }
    const double released = res.records.front().s_p - res.records.back().s_p;

    const double E0 = std::abs(res.records.front().E_total);
    double worst_drop = 0.0;
    for (size_t k = 1; k < res.records.size(); ++k) {
      worst_drop = std::max(
          worst_drop, res.records[k - 1].E_total - res.records[k].E_total);
    }
    const bool energy_up = res.records.back().E_total > res.records.front().E_total &&
                           worst_drop <= 1e-10 * E0;

    auto max_balance = [&](double h) {
      Scenario sc = scenario_preset("case2");
      sc.h = h;
      sc.t_f = 40.0;
      const RunResult r = run(sc, params, opt);
      double worst = 0.0;
      for (const auto& rec : r.records) worst = std::max(worst, std::abs(rec.carnot_balance));
      return worst;
    };
    const double b1 = max_balance(0.05);
    const double b2 = max_balance(0.025);
    const double b3 = max_balance(0.0125);
    const double order = 0.5 * (std::log2(b1 / b2) + std::log2(b2 / b3));
    // Stated rate: third order per step. The deployed strain kink at the
    // guideway caps the measured rate near two; see the analysis notes.
    const bool third_order = order >= 2.5;

    report(7, "deployment", monotone && released > 50.0 && energy_up && third_order,
           "released " + fmt(released) + " m, worst energy drop " + fmt(worst_drop) +
               " J, balance " + fmt(b1) + " / " + fmt(b2) + " / " + fmt(b3) +
               " J, measured order " + fmt(order) + (third_order ? "" : " (< 2.5)"));
  }

  // 8. Circular-orbit sanity: published period within 1%.
  {
    PhysParams pm = pointmass_params();
    Scenario sc = scenario_preset("custom");
    sc.N = pm.N;
    sc.h = pm.h;
    auto [g, v] = build_initial_state(sc, pm);

    lgvi::StepperOptions sopt;
    const lgvi::Stepper stepper(pm, sopt);
    GroupIncrement f = stepper.initialize(g, v);

    double prev_angle = 0.0;
    double unwrapped = 0.0;
    double period = 0.0;
    for (int k = 0; k < 8000; ++k) {
      lgvi::StepProblem prob;
      prob.g = group_compose(g, f);
      prob.f_prev = f;
      prob.params = pm;
      auto [fn, rep] = stepper.step(prob, f);
      g = prob.g;
      f = fn;
      double angle = std::atan2(g.x.y(), g.x.x());
      double delta = angle - prev_angle;
      if (delta < -M_PI) delta += 2.0 * M_PI;
      if (delta > M_PI) delta -= 2.0 * M_PI;
      prev_angle = angle;
      const double next = unwrapped + delta;
      if (next >= 2.0 * M_PI) {
        const double t1 = (k + 1) * pm.h;
        period = t1 - pm.h * (next - 2.0 * M_PI) / delta;
        break;
      }
      unwrapped = next;
    }
    const double rel = std::abs(period - 5410.0) / 5410.0;
    report(8, "orbital period", period > 0.0 && rel <= 0.01,
           "period = " + fmt(period) + " s, rel offset vs 5410 s = " + fmt(rel));
  }

  std::printf("%d of 8 criteria failed\n", g_failures);
  return g_failures;
}

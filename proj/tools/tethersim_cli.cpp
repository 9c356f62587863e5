#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "tethersim/errors.hpp"
#include "tethersim/runner.hpp"

using namespace tethersim;

int main(int argc, char** argv) {
  CLI::App app{"Tethered spacecraft simulator (variational integrator + RK4 reference)"};
  app.set_help_flag("--help", "print usage");  // frees -h / --h for the time step

  std::string scenario_name = "case1";
  std::string config_path;
  std::string out_dir = "out";
  std::string integrator = "lgvi";
  std::string init_mode = "velocity";
  double tf = -1.0, h = -1.0, tol = 1e-13, gm = -1.0, u = 0.0;
  int elements = -1, record_every = 1;
  bool u_set = false;

  app.add_option("--scenario", scenario_name, "case1 | case2 | case3 | custom");
  app.add_option("--config", config_path, "JSON config file (overrides the preset)");
  app.add_option("--tf", tf, "final time [s]");
  app.add_option("--h", h, "time step [s]");
  app.add_option("--elements", elements, "tether element count N");
  app.add_option("--tol", tol, "Newton tolerance (scaled residual)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--record-every", record_every, "record every K-th step");
  app.add_option("--integrator", integrator, "lgvi | rk4");
  app.add_option("--init", init_mode, "velocity | legendre");
  app.add_option("--gm", gm, "gravitational parameter [m^3/s^2]");
  app.add_option("--u", u, "constant drum control moment [N m]")->each([&](const std::string&) {
    u_set = true;
  });

  CLI11_PARSE(app, argc, argv);

  try {
    Scenario sc;
    PhysParams params;
    if (!config_path.empty()) {
      std::tie(sc, params) = load_config_file(config_path);
    } else {
      sc = scenario_preset(scenario_name);
      params = default_params();
    }
    if (tf > 0.0) sc.t_f = tf;
    if (h > 0.0) {
      sc.h = h;
      params.h = h;
    }
    if (elements > 0) {
      sc.N = elements;
      params.N = elements;
    }
    if (gm >= 0.0) params.GM = gm;
    if (u_set) sc.u = u;

    RunOptions opt;
    opt.out_dir = out_dir;
    opt.record_every = record_every;
    opt.tol = tol;
    if (integrator == "rk4") {
      opt.integrator = Integrator::kRk4;
    } else if (integrator == "lgvi") {
      opt.integrator = Integrator::kLgvi;
    } else {
      throw ConfigInvalid("unknown integrator '" + integrator + "'");
    }
    if (init_mode == "legendre") {
      opt.init = lgvi::InitMode::kLegendre;
    } else if (init_mode == "velocity") {
      opt.init = lgvi::InitMode::kVelocityMap;
    } else {
      throw ConfigInvalid("unknown init mode '" + init_mode + "'");
    }

    const RunResult res = run(sc, params, opt);
    std::printf("%s run, %zu records in %.2f s, s_p(final) = %.3f m, wrote %s\n",
                integrator.c_str(), res.records.size(), res.wall_seconds, res.s_p_final,
                out_dir.c_str());
    return 0;
  } catch (const ConfigInvalid& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const lgvi::NoConvergence& e) {
    std::fprintf(stderr, "solver failure: %s (iterations=%d, scaled residual=%g)\n",
                 e.what(), e.report.iterations, e.report.scaled_residual);
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

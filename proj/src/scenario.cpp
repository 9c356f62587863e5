#include "tethersim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tethersim/errors.hpp"

namespace tethersim {

namespace {

using nlohmann::json;

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigInvalid("expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json diag3_to_json(const Mat3& M) {
  return json::array({M(0, 0), M(1, 1), M(2, 2)});
}

Mat3 mat3_from_json(const json& j) {
  if (j.is_array() && j.size() == 3 && j[0].is_number()) {
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>()).asDiagonal();
  }
  if (j.is_array() && j.size() == 3) {
    Mat3 M;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) M(r, c) = j[r][c].get<double>();
    return M;
  }
  throw ConfigInvalid("expected a diagonal (3 numbers) or full 3x3 matrix");
}

}  // namespace

Scenario scenario_preset(const std::string& name) {
  Scenario sc;
  sc.name = name;
  if (name == "case1") {
    sc.h = 0.05;
    sc.t_f = 6000.0;
    sc.free_drum = false;
  } else if (name == "case2") {
    sc.h = 0.05;
    sc.t_f = 3848.0;
    sc.free_drum = true;
  } else if (name == "case3") {
    sc.h = 0.01;
    sc.t_f = 500.0;
    sc.free_drum = false;
    sc.perturb = true;
  } else if (name == "custom") {
    // Defaults as declared.
  } else {
    throw ConfigInvalid("unknown scenario '" + name + "'");
  }
  sc.N = 20;
  return sc;
}

PhysParams default_params() { return PhysParams{}; }

PhysParams pointmass_params() {
  PhysParams p;
  p.m_s = 1.0e-9;
  p.mu_bar = 1.0e-9;
  p.EA = 1.0e-6;
  p.N = 4;
  p.h = 1.0;
  return p;
}

std::pair<GroupConfig, VelocityState> build_initial_state(const Scenario& sc,
                                                          const PhysParams& p) {
  if (sc.N != p.N) throw ConfigInvalid("scenario and params disagree on N");
  if (sc.s_p0 < p.b || sc.s_p0 >= p.L) throw ConfigInvalid("s_p0 outside [b, L)");

  const double a0 = kEarthRadius + sc.altitude;
  const Vec3 radial = Vec3::UnitX();
  const Vec3 normal = Vec3::UnitZ();

  GroupConfig g;
  g.R = Mat3::Identity();
  g.R_s = Mat3::Identity();
  g.s_p = sc.s_p0;
  g.x = a0 * radial;
  g.r.resize(p.N + 1);

  // Nodes run from the guideway exit toward the Earth along the radial
  // direction, each element exactly at its unstretched length.
  const double l = p.element_length(sc.s_p0);
  const Vec3 attach = g.x + g.R * p.rho;
  for (int a = 1; a <= p.N + 1; ++a) {
    g.r[a - 1] = attach - static_cast<double>(a - 1) * l * radial;
  }

  VelocityState v;
  v.rdot.resize(p.N + 1);
  v.sp_dot = 0.0;
  auto circular_velocity = [&](const Vec3& pos) -> Vec3 {
    const double radius = pos.norm();
    const double speed = std::sqrt(p.GM / radius);
    Vec3 along = normal.cross(pos / radius);
    along.normalize();
    return speed * along;
  };
  v.xdot = circular_velocity(g.x);
  for (int a = 2; a <= p.N + 1; ++a) v.rdot[a - 1] = circular_velocity(g.r[a - 1]);
  // The attachment node rides with the base (zero body rates initially).
  v.rdot[0] = v.xdot;

  if (sc.perturb) {
    v.xdot *= sc.perturbation.in_plane_scale;
    v.rdot[0] = v.xdot;
    const double sub_speed = v.rdot[p.N].norm();
    v.rdot[p.N] *= sc.perturbation.in_plane_scale;
    v.rdot[p.N] += sc.perturbation.out_of_plane_fraction * sub_speed * normal;
  }
  return {g, v};
}

std::string to_json(const Scenario& sc, const PhysParams& p) {
  json j;
  j["scenario"] = {
      {"name", sc.name},
      {"h", sc.h},
      {"t_f", sc.t_f},
      {"N", sc.N},
      {"drum", sc.free_drum ? "free" : "fixed"},
      {"u", sc.u},
      {"perturb", sc.perturb},
      {"perturbation",
       {{"in_plane_scale", sc.perturbation.in_plane_scale},
        {"out_of_plane_fraction", sc.perturbation.out_of_plane_fraction}}},
      {"altitude", sc.altitude},
      {"s_p0", sc.s_p0},
      {"stop_when_deployed", sc.stop_when_deployed},
      {"s_p_stop", sc.s_p_stop},
  };
  j["params"] = {
      {"m", p.m},
      {"m_r", p.m_r},
      {"m_s", p.m_s},
      {"J", diag3_to_json(p.J)},
      {"J_s", diag3_to_json(p.J_s)},
      {"rho", vec3_to_json(p.rho)},
      {"rho_s", vec3_to_json(p.rho_s)},
      {"d", p.d},
      {"b", p.b},
      {"kappa2", p.kappa2},
      {"L", p.L},
      {"mu_bar", p.mu_bar},
      {"EA", p.EA},
      {"GM", p.GM},
      {"N", p.N},
      {"h", p.h},
  };
  return j.dump(2);
}

std::pair<Scenario, PhysParams> from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("config parse error: ") + e.what());
  }
  Scenario sc;
  PhysParams p;
  try {
    if (j.contains("scenario")) {
      const json& s = j["scenario"];
      if (s.contains("name")) sc = scenario_preset(s["name"].get<std::string>());
      if (s.contains("h")) sc.h = s["h"].get<double>();
      if (s.contains("t_f")) sc.t_f = s["t_f"].get<double>();
      if (s.contains("N")) sc.N = s["N"].get<int>();
      if (s.contains("drum")) sc.free_drum = (s["drum"].get<std::string>() == "free");
      if (s.contains("u")) sc.u = s["u"].get<double>();
      if (s.contains("perturb")) sc.perturb = s["perturb"].get<bool>();
      if (s.contains("perturbation")) {
        const json& q = s["perturbation"];
        if (q.contains("in_plane_scale"))
          sc.perturbation.in_plane_scale = q["in_plane_scale"].get<double>();
        if (q.contains("out_of_plane_fraction"))
          sc.perturbation.out_of_plane_fraction = q["out_of_plane_fraction"].get<double>();
      }
      if (s.contains("altitude")) sc.altitude = s["altitude"].get<double>();
      if (s.contains("s_p0")) sc.s_p0 = s["s_p0"].get<double>();
      if (s.contains("stop_when_deployed"))
        sc.stop_when_deployed = s["stop_when_deployed"].get<bool>();
      if (s.contains("s_p_stop")) sc.s_p_stop = s["s_p_stop"].get<double>();
    }
    if (j.contains("params")) {
      const json& q = j["params"];
      if (q.contains("m")) p.m = q["m"].get<double>();
      if (q.contains("m_r")) p.m_r = q["m_r"].get<double>();
      if (q.contains("m_s")) p.m_s = q["m_s"].get<double>();
      if (q.contains("J")) p.J = mat3_from_json(q["J"]);
      if (q.contains("J_s")) p.J_s = mat3_from_json(q["J_s"]);
      if (q.contains("rho")) p.rho = vec3_from_json(q["rho"]);
      if (q.contains("rho_s")) p.rho_s = vec3_from_json(q["rho_s"]);
      if (q.contains("d")) p.d = q["d"].get<double>();
      if (q.contains("b")) p.b = q["b"].get<double>();
      if (q.contains("kappa2")) p.kappa2 = q["kappa2"].get<double>();
      if (q.contains("L")) p.L = q["L"].get<double>();
      if (q.contains("mu_bar")) p.mu_bar = q["mu_bar"].get<double>();
      if (q.contains("EA")) p.EA = q["EA"].get<double>();
      if (q.contains("GM")) p.GM = q["GM"].get<double>();
      if (q.contains("N")) p.N = q["N"].get<int>();
      if (q.contains("h")) p.h = q["h"].get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("config field error: ") + e.what());
  }
  // The scenario drives the discretization.
  p.N = sc.N;
  p.h = sc.h;
  return {sc, p};
}

std::pair<Scenario, PhysParams> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace tethersim

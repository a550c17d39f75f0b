#include "rtm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rtm/errors.hpp"

namespace rtm {

using nlohmann::json;

Engine parse_engine(const std::string& name) {
  if (name == "analytic") return Engine::analytic;
  if (name == "grid") return Engine::grid;
  throw ValidationError("unknown engine '" + name + "' (expected analytic or grid)");
}

std::string to_string(Engine engine) { return engine == Engine::grid ? "grid" : "analytic"; }

double RunConfig::mirror_strength(double h) const {
  return v0 ? *v0 : v0_ratio * mass * gravity * h;
}

PhysicalParams RunConfig::physical(double h) const {
  return PhysicalParams(mass, gravity, constants::hbar, mirror_strength(h), kappa);
}

void RunConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string("config: ") + name + " must be positive");
    }
  };
  positive(mass, "atom.mass");
  positive(gravity, "gravity");
  positive(kappa, "mirror.kappa");
  if (v0) positive(*v0, "mirror.V0");
  positive(v0_ratio, "mirror.V0_ratio");
  positive(decay_rate, "validity.gamma");
  positive(detuning, "validity.delta");
  if (max_rabi) positive(*max_rabi, "validity.Omega_max");
  positive(psp_threshold, "validity.psp_threshold");
  positive(z0, "packet.z0");
  positive(width, "packet.width");
  if (!std::isfinite(mean_momentum)) throw ValidationError("config: packet.momentum must be finite");
  if (n_max && *n_max < 4) throw ValidationError("config: spectrum.n_max must be at least 4");
  if (dt) positive(*dt, "time.dt");
  if (t_final) positive(*t_final, "time.t_final");
  positive(samples_per_period, "time.samples_per_period");
  if (!(modulation_amplitude >= 0.0)) {
    throw ValidationError("config: modulation.amplitude must be non-negative");
  }
  if (!(modulation_frequency >= 0.0)) {
    throw ValidationError("config: modulation.frequency must be non-negative");
  }
  if (!(window_frac > 0.0 && window_frac < 1.0)) {
    throw ValidationError("config: revival.window_frac must lie in (0, 1)");
  }
  if (resonant_energy) positive(*resonant_energy, "inversion.E_N");
  if (r) positive(*r, "inversion.r");
  positive(h_ref, "scan.h_ref");
  positive(scan_speed, "scan.scan_speed");
  if (jobs < 1) throw ValidationError("config: scan.jobs must be at least 1");
  if (!(calibration_tolerance >= 0.0)) {
    throw ValidationError("config: scan.calibration_tolerance must be non-negative");
  }
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ValidationError("config: unknown key '" + key + "' in " + where);
    }
  }
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError("config: " + where + "." + key + " must be a number");
  return v.get<double>();
}

std::string text_field(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ValidationError("config: " + where + "." + key + " must be a string");
  return v.get<std::string>();
}

template <typename T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  if (obj.contains(key)) out = static_cast<T>(number(obj, key, where));
}

template <typename T>
void read(const json& obj, const char* key, const std::string& where, std::optional<T>& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = static_cast<T>(number(obj, key, where));
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  reject_unknown(root,
                 {"atom", "gravity", "mirror", "validity", "packet", "spectrum", "grid", "time",
                  "modulation", "revival", "inversion", "scan"},
                 "config");
  RunConfig c;
  if (root.contains("atom")) {
    const json& atom = root["atom"];
    if (atom.is_string()) {
      if (atom.get<std::string>() != "cs133" && atom.get<std::string>() != "cs") {
        throw ValidationError("config: unknown atom preset '" + atom.get<std::string>() + "'");
      }
    } else {
      reject_unknown(atom, {"mass"}, "atom");
      read(atom, "mass", "atom", c.mass);
    }
  }
  read(root, "gravity", "config", c.gravity);
  if (root.contains("mirror")) {
    const json& m = root["mirror"];
    reject_unknown(m, {"V0", "V0_ratio", "kappa"}, "mirror");
    read(m, "V0", "mirror", c.v0);
    read(m, "V0_ratio", "mirror", c.v0_ratio);
    read(m, "kappa", "mirror", c.kappa);
  }
  if (root.contains("validity")) {
    const json& v = root["validity"];
    reject_unknown(v, {"gamma", "delta", "Omega_max", "psp_threshold"}, "validity");
    read(v, "gamma", "validity", c.decay_rate);
    read(v, "delta", "validity", c.detuning);
    read(v, "Omega_max", "validity", c.max_rabi);
    read(v, "psp_threshold", "validity", c.psp_threshold);
  }
  if (root.contains("packet")) {
    const json& p = root["packet"];
    reject_unknown(p, {"z0", "width", "momentum"}, "packet");
    read(p, "z0", "packet", c.z0);
    read(p, "width", "packet", c.width);
    read(p, "momentum", "packet", c.mean_momentum);
  }
  if (root.contains("spectrum")) {
    const json& s = root["spectrum"];
    reject_unknown(s, {"n_max"}, "spectrum");
    read(s, "n_max", "spectrum", c.n_max);
  }
  if (root.contains("grid")) {
    const json& g = root["grid"];
    reject_unknown(g, {"points"}, "grid");
    read(g, "points", "grid", c.grid_points);
  }
  if (root.contains("time")) {
    const json& t = root["time"];
    reject_unknown(t, {"dt", "t_final", "samples_per_period"}, "time");
    read(t, "dt", "time", c.dt);
    read(t, "t_final", "time", c.t_final);
    read(t, "samples_per_period", "time", c.samples_per_period);
  }
  if (root.contains("modulation")) {
    const json& m = root["modulation"];
    reject_unknown(m, {"amplitude", "frequency"}, "modulation");
    read(m, "amplitude", "modulation", c.modulation_amplitude);
    read(m, "frequency", "modulation", c.modulation_frequency);
  }
  if (root.contains("revival")) {
    const json& r = root["revival"];
    reject_unknown(r, {"window_frac"}, "revival");
    read(r, "window_frac", "revival", c.window_frac);
  }
  if (root.contains("inversion")) {
    const json& i = root["inversion"];
    reject_unknown(i, {"E_N", "r"}, "inversion");
    read(i, "E_N", "inversion", c.resonant_energy);
    read(i, "r", "inversion", c.r);
  }
  if (root.contains("scan")) {
    const json& s = root["scan"];
    reject_unknown(s,
                   {"h_ref", "profile", "scan_speed", "engine", "jobs", "calibration_tolerance"},
                   "scan");
    read(s, "h_ref", "scan", c.h_ref);
    read(s, "scan_speed", "scan", c.scan_speed);
    read(s, "jobs", "scan", c.jobs);
    read(s, "calibration_tolerance", "scan", c.calibration_tolerance);
    if (s.contains("profile") && !s["profile"].is_null()) c.profile = text_field(s, "profile", "scan");
    if (s.contains("engine")) c.engine = parse_engine(text_field(s, "engine", "scan"));
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c = config_from_json_text(ss.str());
  if (c.profile && c.profile->is_relative()) c.profile = path.parent_path() / *c.profile;
  return c;
}

std::string config_to_json_text(const RunConfig& c) {
  auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
  json root;
  root["atom"] = {{"mass", c.mass}};
  root["gravity"] = c.gravity;
  root["mirror"] = {{"V0", opt(c.v0)}, {"V0_ratio", c.v0_ratio}, {"kappa", c.kappa}};
  root["validity"] = {{"gamma", c.decay_rate},
                      {"delta", c.detuning},
                      {"Omega_max", opt(c.max_rabi)},
                      {"psp_threshold", c.psp_threshold}};
  root["packet"] = {{"z0", c.z0}, {"width", c.width}, {"momentum", c.mean_momentum}};
  root["spectrum"] = {{"n_max", opt(c.n_max)}};
  root["grid"] = {{"points", c.grid_points}};
  root["time"] = {
      {"dt", opt(c.dt)}, {"t_final", opt(c.t_final)}, {"samples_per_period", c.samples_per_period}};
  root["modulation"] = {{"amplitude", c.modulation_amplitude},
                        {"frequency", c.modulation_frequency}};
  root["revival"] = {{"window_frac", c.window_frac}};
  root["inversion"] = {{"E_N", opt(c.resonant_energy)}, {"r", opt(c.r)}};
  root["scan"] = {{"h_ref", c.h_ref},
                  {"profile", c.profile ? json(c.profile->string()) : json(nullptr)},
                  {"scan_speed", c.scan_speed},
                  {"engine", to_string(c.engine)},
                  {"jobs", c.jobs},
                  {"calibration_tolerance", c.calibration_tolerance}};
  return root.dump(2);
}

}  // namespace rtm

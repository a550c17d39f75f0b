#include "rtm/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "rtm/errors.hpp"

namespace rtm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kProjectionPoints = 1u << 14;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_field(const std::string& field, std::size_t line_no, const char* what) {
  const std::string t = trim(field);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) {
    throw ValidationError("profile line " + std::to_string(line_no) + ": cannot parse " + what +
                          " '" + t + "'");
  }
  if (!std::isfinite(v)) {
    throw ValidationError("profile line " + std::to_string(line_no) + ": non-finite " + what);
  }
  return v;
}

/// Runs body(i) for i in [0, n) on at most `jobs` threads.
template <typename Body>
void parallel_for(std::size_t n, unsigned jobs, Body body) {
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
}

std::string clean_status(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Profiles

SurfaceProfile parse_profile(const std::string& text, const std::string& name,
                             std::optional<double> h_ref) {
  SurfaceProfile profile;
  profile.name = name;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!seen_content) {
      seen_content = true;
      if (t == "x_m,h_m") continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
      throw ValidationError("profile line " + std::to_string(line_no) +
                            ": expected two comma-separated columns x_m,h_m");
    }
    const double x = parse_field(t.substr(0, comma), line_no, "x");
    const double h = parse_field(t.substr(comma + 1), line_no, "h");
    if (!profile.samples.empty() && !(x > profile.samples.back().x)) {
      throw ValidationError("profile line " + std::to_string(line_no) + ": x = " + t.substr(0, comma) +
                            (x == profile.samples.back().x ? " duplicates" : " is below") +
                            " the previous position; x must be strictly increasing");
    }
    if (h_ref && !(std::abs(h) < 0.1 * *h_ref)) {
      throw ValidationError("profile line " + std::to_string(line_no) + ": |h| = " +
                            std::to_string(std::abs(h)) + " m is not below 0.1 H_ref");
    }
    profile.samples.push_back({x, h});
  }
  return profile;
}

SurfaceProfile load_profile(const std::filesystem::path& path, std::optional<double> h_ref) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open profile " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_profile(ss.str(), path.stem().string(), h_ref);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_profile(const SurfaceProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write profile " + path.string());
  out << "x_m,h_m\n";
  for (const auto& s : profile.samples) out << format_number(s.x) << ',' << format_number(s.h) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Experiments

int levels_for_drop(double z0) {
  const double e = 1.6 * z0 + 10.0;
  const double n = std::pow(2.0 * e, 1.5) / (3.0 * std::numbers::pi);
  return std::max(20, static_cast<int>(std::ceil(n)) + 10);
}

RevivalMeasurement measure_revival_analytic(double z0, const ExperimentSettings& settings,
                                            const Spectrum& spectrum) {
  const Grid grid{0.0, 2.5 * z0, kProjectionPoints};
  const GridWavepacket packet = make_gaussian(z0, settings.width, settings.mean_momentum, grid);
  const EigenCoefficients coeffs = project(packet, spectrum);

  RevivalMeasurement m;
  m.n0_mean = coeffs.n0_mean;
  double e = 0.0;
  for (int n = coeffs.first_level; n <= coeffs.last_level; ++n) {
    e += std::norm(coeffs.c[n - 1]) * spectrum.level(n);
  }
  m.mean_energy = e;
  m.classical_period = classical_period(spectrum, coeffs.n0_mean);
  m.predicted_t2 = revival_time_closed_form(e);
  const double t_end = settings.t_final.value_or((1.0 + settings.window_frac) * m.predicted_t2 +
                                                 m.classical_period);
  const auto times = uniform_times(t_end, m.classical_period / settings.samples_per_period);
  const AutocorrSignal signal = analytic_autocorrelation(coeffs, spectrum, times);
  m.samples = signal.size();
  RevivalOptions options;
  options.window_frac = settings.window_frac;
  m.t2 = detect_revival(signal, m.predicted_t2, options).revival;
  return m;
}

RevivalMeasurement measure_revival_grid(double z0, const ExperimentSettings& settings,
                                        double amplitude, double omega) {
  const PotentialModel potential{settings.v0, settings.kappa, amplitude, omega};
  const PotentialModel mirror{settings.v0, settings.kappa, 0.0, 0.0};
  potential.validate();
  const Grid grid = default_grid(potential, z0, settings.grid_points);
  const GridWavepacket packet = make_gaussian(z0, settings.width, settings.mean_momentum, grid);

  RevivalMeasurement m;
  const EnergyMoments e0 = SplitStepPropagator(grid, potential).energy(packet.amplitudes(), 0.0);
  m.mean_energy = e0.mean;
  m.classical_period = semiclassical_period(mirror, e0.mean);
  m.predicted_t2 = semiclassical_revival_time(mirror, e0.mean);
  const double dt = settings.dt.value_or(max_stable_dt(potential, e0));
  const double t_end = settings.t_final.value_or((1.0 + settings.window_frac) * m.predicted_t2 +
                                                 m.classical_period);
  const auto stride = static_cast<std::size_t>(
      std::max(1.0, std::round(m.classical_period / settings.samples_per_period / dt)));
  spdlog::debug("grid run z0={} a={} omega={} dt={} steps={} stride={}", z0, amplitude, omega, dt,
                std::llround(t_end / dt), stride);
  const EvolutionResult run = evolve(packet, potential, t_end, dt, stride);
  m.samples = run.autocorr.size();
  RevivalOptions options;
  options.window_frac = settings.window_frac;
  m.t2 = detect_revival(run.autocorr, m.predicted_t2, options).revival;
  return m;
}

ExperimentSettings experiment_settings(const RunConfig& config, double h) {
  const PhysicalParams p = config.physical(h);
  ExperimentSettings s;
  s.width = to_scaled(meters(config.width), Dimension::length, p);
  s.mean_momentum = to_scaled({config.mean_momentum, Dimension::momentum}, Dimension::momentum, p);
  s.v0 = to_scaled(joules(config.mirror_strength(h)), Dimension::energy, p);
  s.kappa = config.kappa * p.units().length_unit;
  s.grid_points = config.grid_points;
  if (config.dt) s.dt = to_scaled(seconds(*config.dt), Dimension::time, p);
  if (config.t_final) s.t_final = to_scaled(seconds(*config.t_final), Dimension::time, p);
  s.samples_per_period = config.samples_per_period;
  s.window_frac = config.window_frac;
  return s;
}

namespace {

void fill_validity(PointResult& point, double drop_height, const RunConfig& config,
                   const PhysicalParams& p) {
  ValidityParams v{config.decay_rate, config.detuning, impact_speed_from_drop(drop_height, p),
                   config.max_rabi};
  point.p_sp = spontaneous_emission_probability(v, config.kappa, p);
  point.p_sp_flag = point.p_sp > config.psp_threshold;
}

}  // namespace

ScanResult run_static_scan(const SurfaceProfile& profile, const RunConfig& config) {
  config.validate();
  const PhysicalParams p = config.physical(config.h_ref);
  const double length_unit = p.units().length_unit;
  const double energy_unit = p.units().energy_unit;
  const double time_unit = p.units().time_unit;
  const double h_ref = config.h_ref / length_unit;

  double h_max = -std::numeric_limits<double>::infinity();
  double h_min = std::numeric_limits<double>::infinity();
  for (const auto& s : profile.samples) {
    if (!(std::abs(s.h) < 0.1 * config.h_ref)) {
      throw ValidationError("profile height " + std::to_string(s.h) + " m is not below 0.1 H_ref");
    }
    h_max = std::max(h_max, s.h);
    h_min = std::min(h_min, s.h);
  }

  ScanResult result;
  result.mode = ScanMode::static_mode;
  result.reconstructed.name = profile.name + "_reconstructed";
  result.per_point.resize(profile.samples.size());
  if (profile.samples.empty()) return result;

  const double e_low = h_ref - h_max / length_unit;
  if (std::pow(2.0 * e_low, 1.5) / (3.0 * std::numbers::pi) < 20.0) {
    throw ValidationError("H_ref - max h leaves n0 below 20, outside the semiclassical regime");
  }

  const ExperimentSettings settings = experiment_settings(config, config.h_ref);
  std::optional<Spectrum> spectrum;
  if (config.engine == Engine::analytic) {
    spectrum = Spectrum::triangular_well(
        config.n_max.value_or(levels_for_drop(h_ref - h_min / length_unit)));
  }

  std::vector<double> raw_height(profile.samples.size(), kNaN);
  parallel_for(profile.samples.size(), config.jobs, [&](std::size_t i) {
    const ProfileSample& s = profile.samples[i];
    PointResult& point = result.per_point[i];
    point.x = s.x;
    point.h_input = s.h;
    point.t2 = point.t2_uncertainty = point.energy = point.h = kNaN;
    const double drop = config.h_ref - s.h;
    try {
      fill_validity(point, drop, config, p);
      const double z0 = drop / length_unit;
      const RevivalMeasurement m = config.engine == Engine::analytic
                                       ? measure_revival_analytic(z0, settings, *spectrum)
                                       : measure_revival_grid(z0, settings);
      point.t2 = m.t2.value * time_unit;
      point.t2_uncertainty = m.t2.uncertainty * time_unit;
      const StaticInversion inv =
          invert_static(m.t2, h_ref, config.calibration_tolerance * h_ref);
      point.energy = inv.energy.value * energy_unit;
      raw_height[i] = inv.height.value * length_unit;
      spdlog::info("point {} x={} m: T2={} s", i, s.x, point.t2);
    } catch (const Error& e) {
      point.status = clean_status(e.what());
      spdlog::warn("point {} x={} m failed: {}", i, s.x, e.what());
    }
  });

  std::size_t failures = 0;
  std::optional<double> calibration;
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < raw_height.size(); ++i) {
    if (std::isnan(raw_height[i])) {
      ++failures;
      continue;
    }
    if (!calibration) calibration = raw_height[i];
    if (result.per_point[i].p_sp_flag) ++flagged;
  }
  if (2 * failures > raw_height.size()) {
    throw NumericalError("static scan aborted: " + std::to_string(failures) + " of " +
                         std::to_string(raw_height.size()) + " points failed");
  }
  if (flagged > 0) {
    spdlog::warn("{} scan points exceed the spontaneous-emission threshold {}", flagged,
                 config.psp_threshold);
  }
  for (std::size_t i = 0; i < raw_height.size(); ++i) {
    PointResult& point = result.per_point[i];
    if (!std::isnan(raw_height[i])) point.h = raw_height[i] - *calibration;
    result.reconstructed.samples.push_back({point.x, point.h});
  }
  return result;
}

// ---------------------------------------------------------------------------
// Dynamic mode

Periodicity profile_periodicity(const SurfaceProfile& profile) {
  const auto& s = profile.samples;
  const std::size_t n = s.size();
  if (n < 4) throw ValidationError("dynamic mode needs at least 4 profile samples");
  const double dx = (s.back().x - s.front().x) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((s[i].x - s[i - 1].x) - dx) > 1e-6 * dx) {
      throw ValidationError("dynamic mode needs a uniformly sampled profile");
    }
  }
  Periodicity out;
  for (const auto& p : s) out.mean += p.h;
  out.mean /= static_cast<double>(n);

  std::vector<std::complex<double>> spec(n / 2 + 1);
  for (std::size_t k = 1; k <= n / 2; ++k) {
    std::complex<double> acc{};
    for (std::size_t j = 0; j < n; ++j) {
      const double ph = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / n;
      acc += (s[j].h - out.mean) * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    spec[k] = acc;
  }
  std::size_t best = 1;
  for (std::size_t k = 2; k <= n / 2; ++k) {
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  }
  const double peak = std::abs(spec[best]);
  double scale = 0.0;
  for (const auto& p : s) scale = std::max(scale, std::abs(p.h - out.mean));
  if (scale == 0.0) return out;  // flat: zero-amplitude modulation
  for (std::size_t k = 1; k <= n / 2; ++k) {
    if (k != best && !(peak >= 10.0 * std::abs(spec[k]))) {
      throw ValidationError(
          "profile is not periodic (dominant spectral peak is not 10x the others); use static mode");
    }
  }
  const bool nyquist = 2 * best == n;
  out.amplitude = (nyquist ? 1.0 : 2.0) * peak / static_cast<double>(n);
  const double span = dx * static_cast<double>(n);
  out.period = span / static_cast<double>(best);
  // h - mean = a cos(k x + arg) = a sin(k x + arg + pi/2), x from the first sample.
  out.phase = std::arg(spec[best]) + 0.5 * std::numbers::pi;
  return out;
}

ScanResult run_dynamic_scan(const SurfaceProfile& profile, const RunConfig& config) {
  config.validate();
  if (config.engine != Engine::grid) {
    spdlog::info("dynamic mode always runs the grid engine");
  }
  const Periodicity per = profile_periodicity(profile);
  const PhysicalParams p = config.physical(config.h_ref);
  const ScaledUnits& u = p.units();
  const double drop = config.h_ref - per.mean;
  const double z0 = drop / u.length_unit;
  const ExperimentSettings settings = experiment_settings(config, config.h_ref);

  DynamicExtras extras;
  extras.amplitude_true = per.amplitude;
  const bool modulated = per.amplitude > 0.0;
  if (modulated) {
    extras.omega_true = 2.0 * std::numbers::pi * config.scan_speed / per.period;
    extras.spacing_true = per.period;
  } else {
    extras.omega_true = extras.spacing_true = kNaN;
  }
  const double a_scaled = per.amplitude / u.length_unit;
  const double omega_scaled = modulated ? extras.omega_true * u.time_unit : 0.0;

  RevivalMeasurement runs[2];
  parallel_for(modulated ? 2 : 1, config.jobs, [&](std::size_t i) {
    runs[i] = i == 0 ? measure_revival_grid(z0, settings)
                     : measure_revival_grid(z0, settings, a_scaled, omega_scaled);
  });
  if (!modulated) runs[1] = runs[0];
  const RevivalMeasurement& ref = runs[0];
  const RevivalMeasurement& mod = runs[1];
  extras.t2_static = {ref.t2.value * u.time_unit, ref.t2.uncertainty * u.time_unit};
  extras.t2_modulated = {mod.t2.value * u.time_unit, mod.t2.uncertainty * u.time_unit};

  const double e_n0 = ref.mean_energy;
  if (config.r) {
    extras.r = *config.r;
  } else if (config.resonant_energy) {
    extras.r = std::sqrt(*config.resonant_energy / u.energy_unit / e_n0);
  } else if (modulated) {
    const Spectrum spectrum = Spectrum::triangular_well(config.n_max.value_or(levels_for_drop(z0)));
    extras.r = std::sqrt(resonant_energy(omega_scaled, spectrum).energy / e_n0);
  } else {
    extras.r = kNaN;
  }

  extras.amplitude = {kNaN, kNaN};
  extras.omega = {kNaN, kNaN};
  extras.spacing = kNaN;
  if (!modulated) {
    extras.amplitude = {0.0, 0.0};
    extras.frequency_status = "no modulation: frequency undefined";
  } else {
    try {
      const ModulationContext ctx = partial_context(e_n0, extras.r);
      const InversionResult inv = invert_dynamic(ref.t2, mod.t2, ctx);
      extras.amplitude = {inv.amplitude.value * u.length_unit,
                          inv.amplitude.uncertainty * u.length_unit};
      extras.omega = {inv.omega.value / u.time_unit, inv.omega.uncertainty / u.time_unit};
      extras.alpha_t = inv.alpha_t;
      extras.roots = inv.roots_found;
      if (extras.omega.value > 0.0) {
        extras.spacing = structure_spacing(extras.omega.value, config.scan_speed);
      } else {
        extras.frequency_status = "recovered omega is zero: spacing undefined";
      }
    } catch (const Error& e) {
      extras.frequency_status = clean_status(e.what());
      try {
        const ModulationContext ctx = partial_context(e_n0, extras.r);
        const double a = amplitude_from_times(ref.t2.value, mod.t2.value, ctx);
        extras.amplitude = {a * u.length_unit, kNaN};
      } catch (const Error&) {
      }
      spdlog::warn("dynamic inversion: {}", e.what());
    }
  }

  ScanResult result;
  result.mode = ScanMode::dynamic_mode;
  result.reconstructed.name = profile.name + "_reconstructed";
  const double x0 = profile.samples.front().x;
  for (const auto& s : profile.samples) {
    PointResult point;
    point.x = s.x;
    point.h_input = s.h;
    point.t2 = extras.t2_modulated.value;
    point.t2_uncertainty = extras.t2_modulated.uncertainty;
    point.energy = e_n0 * u.energy_unit;
    point.h = modulated ? per.mean + extras.amplitude.value *
                                         std::sin(2.0 * std::numbers::pi * (s.x - x0) / per.period +
                                                  per.phase)
                        : per.mean;
    fill_validity(point, config.h_ref - s.h, config, p);
    result.per_point.push_back(point);
    result.reconstructed.samples.push_back({point.x, point.h});
  }
  result.dynamic_extras = extras;
  return result;
}

// ---------------------------------------------------------------------------
// Reports

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw ValidationError("unknown format '" + name + "' (expected csv or json)");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_number(v).c_str(), nullptr);
}

}  // namespace

std::string format_report(const ScanResult& result, ReportFormat format) {
  const char* mode = result.mode == ScanMode::static_mode ? "static" : "dynamic";
  if (format == ReportFormat::csv) {
    std::ostringstream out;
    if (result.dynamic_extras) {
      const DynamicExtras& d = *result.dynamic_extras;
      out << "# mode=" << mode << '\n'
          << "# amplitude_true_m=" << format_number(d.amplitude_true)
          << " omega_true_rad_s=" << format_number(d.omega_true)
          << " spacing_true_m=" << format_number(d.spacing_true) << '\n'
          << "# T2_static_s=" << format_number(d.t2_static.value)
          << " T2_modulated_s=" << format_number(d.t2_modulated.value) << '\n'
          << "# amplitude_m=" << format_number(d.amplitude.value)
          << " omega_rad_s=" << format_number(d.omega.value)
          << " spacing_m=" << format_number(d.spacing) << " r=" << format_number(d.r)
          << " alpha_T=" << format_number(d.alpha_t) << '\n'
          << "# frequency_status=" << d.frequency_status << '\n';
    }
    out << "x_m,h_input_m,T2_s,T2_uncertainty_s,E_J,h_m,P_sp,P_sp_flag,status\n";
    for (const auto& p : result.per_point) {
      out << format_number(p.x) << ',' << format_number(p.h_input) << ',' << format_number(p.t2)
          << ',' << format_number(p.t2_uncertainty) << ',' << format_number(p.energy) << ','
          << format_number(p.h) << ',' << format_number(p.p_sp) << ','
          << (p.p_sp_flag ? 1 : 0) << ',' << p.status << '\n';
    }
    return out.str();
  }
  nlohmann::ordered_json root;
  root["mode"] = mode;
  root["points"] = nlohmann::ordered_json::array();
  for (const auto& p : result.per_point) {
    nlohmann::ordered_json j;
    j["x_m"] = json_number(p.x);
    j["h_input_m"] = json_number(p.h_input);
    j["T2_s"] = json_number(p.t2);
    j["T2_uncertainty_s"] = json_number(p.t2_uncertainty);
    j["E_J"] = json_number(p.energy);
    j["h_m"] = json_number(p.h);
    j["P_sp"] = json_number(p.p_sp);
    j["P_sp_flag"] = p.p_sp_flag;
    j["status"] = p.status;
    root["points"].push_back(j);
  }
  if (result.dynamic_extras) {
    const DynamicExtras& d = *result.dynamic_extras;
    nlohmann::ordered_json j;
    j["amplitude_true_m"] = json_number(d.amplitude_true);
    j["omega_true_rad_s"] = json_number(d.omega_true);
    j["spacing_true_m"] = json_number(d.spacing_true);
    j["T2_static_s"] = json_number(d.t2_static.value);
    j["T2_static_uncertainty_s"] = json_number(d.t2_static.uncertainty);
    j["T2_modulated_s"] = json_number(d.t2_modulated.value);
    j["T2_modulated_uncertainty_s"] = json_number(d.t2_modulated.uncertainty);
    j["amplitude_m"] = json_number(d.amplitude.value);
    j["amplitude_uncertainty_m"] = json_number(d.amplitude.uncertainty);
    j["omega_rad_s"] = json_number(d.omega.value);
    j["omega_uncertainty_rad_s"] = json_number(d.omega.uncertainty);
    j["spacing_m"] = json_number(d.spacing);
    j["r"] = json_number(d.r);
    j["alpha_T"] = json_number(d.alpha_t);
    j["roots_found"] = nlohmann::ordered_json::array();
    for (double r : d.roots) j["roots_found"].push_back(json_number(r));
    j["frequency_status"] = d.frequency_status;
    root["dynamic"] = j;
  }
  return root.dump(2) + "\n";
}

void emit_report(const ScanResult& result, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open report " + path.string() + " for writing");
  out << format_report(result, format);
  out.flush();
  if (!out) throw Error("write failed for report " + path.string());
}

}  // namespace rtm

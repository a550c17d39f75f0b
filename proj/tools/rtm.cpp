// rtm: command-line front end of the recurrence tracking microscope simulator.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "rtm/config.hpp"
#include "rtm/errors.hpp"
#include "rtm/inversion.hpp"
#include "rtm/propagator.hpp"
#include "rtm/revival.hpp"
#include "rtm/scan.hpp"
#include "rtm/spectrum.hpp"

namespace {

using nlohmann::ordered_json;
using rtm::format_number;

struct Common {
  std::string config_path;
  std::string out;
  std::string format = "csv";
  std::string engine;
  unsigned jobs = 0;
};

void add_common(CLI::App* sub, Common& c, const char* default_format) {
  c.format = default_format;
  sub->add_option("--config", c.config_path, "JSON run configuration (SI units)");
  sub->add_option("--out", c.out, "Output path (default: stdout)");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--engine", c.engine, "analytic or grid")
      ->check(CLI::IsMember({"analytic", "grid"}));
  sub->add_option("--jobs", c.jobs, "Worker threads for scans")->check(CLI::PositiveNumber);
}

// Flags override config fields; the config overrides built-in defaults.
rtm::RunConfig resolve(const Common& c) {
  rtm::RunConfig cfg = c.config_path.empty() ? rtm::RunConfig{} : rtm::load_config(c.config_path);
  if (!c.engine.empty()) cfg.engine = rtm::parse_engine(c.engine);
  if (c.jobs > 0) cfg.jobs = c.jobs;
  cfg.validate();
  return cfg;
}

void write_output(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw rtm::Error("cannot open " + c.out + " for writing");
  f << text;
  if (!f) throw rtm::Error("write failed for " + c.out);
}

ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_number(v).c_str(), nullptr);
}

std::string signal_table(const rtm::AutocorrSignal& s, double time_unit, const std::string& format,
                         const rtm::EvolutionResult* run = nullptr, double length_unit = 1.0) {
  const bool scaled_time = run == nullptr;
  if (format == "json") {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
      ordered_json r;
      r["t_s"] = num(s.times[i] * time_unit);
      if (scaled_time) r["t_scaled"] = num(s.times[i]);
      r["re_C"] = num(s.values[i].real());
      r["im_C"] = num(s.values[i].imag());
      r["abs2_C"] = num(s.magnitude2[i]);
      if (run) {
        r["mean_z_m"] = num(run->mean_position[i] * length_unit);
        r["norm"] = num(run->norm[i]);
      }
      rows.push_back(r);
    }
    return rows.dump(2) + "\n";
  }
  std::ostringstream out;
  out << (scaled_time ? "t_s,t_scaled," : "t_s,") << "re_C,im_C,abs2_C"
      << (run ? ",mean_z_m,norm" : "") << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << format_number(s.times[i] * time_unit) << ',';
    if (scaled_time) out << format_number(s.times[i]) << ',';
    out << format_number(s.values[i].real()) << ','
        << format_number(s.values[i].imag()) << ',' << format_number(s.magnitude2[i]);
    if (run) {
      out << ',' << format_number(run->mean_position[i] * length_unit) << ','
          << format_number(run->norm[i]);
    }
    out << '\n';
  }
  return out.str();
}

// Reads the t_s, re_C and im_C columns of a signal CSV.
rtm::AutocorrSignal read_signal(const std::string& path, double time_unit) {
  std::ifstream in(path);
  if (!in) throw rtm::ValidationError("cannot open signal " + path);
  std::string line;
  if (!std::getline(in, line)) throw rtm::ValidationError(path + ": empty signal file");
  std::vector<std::string> names;
  for (std::stringstream ss(line); std::getline(ss, names.emplace_back(), ',');) {
  }
  names.pop_back();
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return i;
    }
    throw rtm::ValidationError(path + ": missing column " + name);
  };
  const std::size_t it = column("t_s"), ire = column("re_C"), iim = column("im_C");
  rtm::AutocorrSignal s;
  for (int row = 2; std::getline(in, line); ++row) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      char* end = nullptr;
      v.push_back(std::strtod(cell.c_str(), &end));
      if (end == cell.c_str()) {
        throw rtm::ValidationError(path + ":" + std::to_string(row) + ": not a number '" + cell + "'");
      }
    }
    if (v.size() != names.size()) {
      throw rtm::ValidationError(path + ":" + std::to_string(row) + ": expected " +
                                 std::to_string(names.size()) + " columns");
    }
    s.push(v[it] / time_unit, {v[ire], v[iim]});
  }
  return s;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("rtm");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("RTM_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("RTM_LOG='{}' is not a log level; keeping 'warn'", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Recurrence tracking microscope simulator"};
  app.require_subcommand(1);

  // spectrum
  Common spectrum_opts;
  int n_max = 200;
  std::string atom = "cs";
  auto* spectrum = app.add_subcommand("spectrum", "Triangular-well levels and Airy zeros");
  add_common(spectrum, spectrum_opts, "csv");
  spectrum->add_option("--n-max", n_max, "Number of levels")->check(CLI::Range(4, 1000000));
  spectrum->add_option("--atom", atom, "Atom preset")->check(CLI::IsMember({"cs", "cs133"}));

  // autocorr
  Common autocorr_opts;
  std::optional<double> periods;
  auto* autocorr = app.add_subcommand("autocorr", "Autocorrelation C(t) of the configured packet");
  add_common(autocorr, autocorr_opts, "csv");
  autocorr->add_option("--periods", periods, "Signal length in classical periods");
  std::string autocorr_mode;
  autocorr->add_option("--mode", autocorr_mode, "Alias of --engine")
      ->check(CLI::IsMember({"analytic", "grid"}));

  // propagate
  Common propagate_opts;
  std::optional<double> t_final;
  std::string checkpoint_out, resume_from;
  auto* propagate = app.add_subcommand("propagate", "Split-step propagation on the grid");
  add_common(propagate, propagate_opts, "csv");
  propagate->add_option("--t-final", t_final, "Propagation time in s");
  std::optional<double> propagate_dt;
  propagate->add_option("--dt", propagate_dt, "Time step in s (default: stability rule)");
  propagate->add_option("--checkpoint", checkpoint_out, "Write the final state here");
  propagate->add_option("--resume", resume_from, "Start from a checkpoint");

  // revival
  Common revival_opts;
  auto* revival = app.add_subcommand("revival", "Measure classical period and revival time");
  add_common(revival, revival_opts, "json");
  std::string signal_in;
  std::optional<double> predicted_t2;
  revival->add_option("--in", signal_in, "Read C(t) from an autocorr or propagate CSV");
  revival->add_option("--predicted-t2", predicted_t2, "Centre of the revival window in s")
      ->check(CLI::PositiveNumber);

  // invert-static
  Common inv_s_opts;
  double t2 = 0.0, t2_unc = 0.0, href = 0.0;
  auto* inv_static = app.add_subcommand("invert-static", "Revival time to energy and height");
  add_common(inv_static, inv_s_opts, "json");
  inv_static->add_option("--t2", t2, "Measured revival time in s")->required();
  inv_static->add_option("--t2-uncertainty", t2_unc, "Its uncertainty in s");
  inv_static->add_option("--href", href, "Reference drop height in m")->required();

  // invert-dynamic
  Common inv_d_opts;
  double t2s = 0.0, t2m = 0.0, t2s_unc = 0.0, t2m_unc = 0.0;
  std::optional<double> r_value, omega_seed, amplitude, e_n0;
  auto* inv_dynamic = app.add_subcommand("invert-dynamic", "Revival times to (a, omega)");
  add_common(inv_dynamic, inv_d_opts, "json");
  inv_dynamic->add_option("--t2", t2s, "Static revival time in s")->required();
  inv_dynamic->add_option("--t2mod", t2m, "Modulated revival time in s")->required();
  inv_dynamic->add_option("--t2-uncertainty", t2s_unc, "s");
  inv_dynamic->add_option("--t2mod-uncertainty", t2m_unc, "s");
  auto* r_opt = inv_dynamic->add_option("--r", r_value, "r = sqrt(E_N / E_n0)");
  auto* seed_opt =
      inv_dynamic->add_option("--omega-seed", omega_seed, "rad/s; r from the resonant level");
  r_opt->excludes(seed_opt);
  inv_dynamic->add_option("--amplitude", amplitude, "Known amplitude in m for the frequency step");
  inv_dynamic->add_option("--energy", e_n0, "E_n0 in J (default m g z0 from the config)");

  // scan
  Common scan_opts;
  std::string profile_path, mode = "static";
  auto* scan = app.add_subcommand("scan", "Scan a surface profile");
  add_common(scan, scan_opts, "csv");
  scan->add_option("--profile", profile_path, "CSV x_m,h_m (overrides the config)");
  scan->add_option("--mode", mode, "static or dynamic")
      ->check(CLI::IsMember({"static", "dynamic"}));

  // validate
  Common validate_opts;
  auto* validate = app.add_subcommand("validate", "Check a configuration and its physics");
  add_common(validate, validate_opts, "json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (spectrum->parsed()) {
      const rtm::RunConfig cfg = resolve(spectrum_opts);
      const rtm::PhysicalParams p = cfg.physical(cfg.z0);
      const double e_unit = p.units().energy_unit;
      std::ostringstream out;
      ordered_json rows = ordered_json::array();
      if (spectrum_opts.format == "csv") out << "n,z_n_exact,z_n_asymptotic,E_n_scaled,E_n_SI\n";
      for (int n = 1; n <= n_max; ++n) {
        const double z = rtm::airy_zero(n, rtm::AiryZeroMode::exact);
        const double za = rtm::airy_zero(n, rtm::AiryZeroMode::asymptotic);
        const double e = rtm::triangular_energy(n);
        if (spectrum_opts.format == "csv") {
          out << n << ',' << format_number(z) << ',' << format_number(za) << ','
              << format_number(e) << ',' << format_number(e * e_unit) << '\n';
        } else {
          rows.push_back({{"n", n},
                          {"z_n_exact", num(z)},
                          {"z_n_asymptotic", num(za)},
                          {"E_n_scaled", num(e)},
                          {"E_n_SI", num(e * e_unit)}});
        }
      }
      write_output(spectrum_opts, spectrum_opts.format == "csv" ? out.str() : rows.dump(2) + "\n");
    } else if (autocorr->parsed() || revival->parsed()) {
      Common& c = autocorr->parsed() ? autocorr_opts : revival_opts;
      if (autocorr->parsed() && c.engine.empty()) c.engine = autocorr_mode;
      rtm::RunConfig cfg = resolve(c);
      const rtm::PhysicalParams p = cfg.physical(cfg.z0);
      const auto& u = p.units();
      const double z0 = cfg.z0 / u.length_unit;
      rtm::ExperimentSettings settings = rtm::experiment_settings(cfg, cfg.z0);
      rtm::AutocorrSignal signal;
      double predicted = 0.0, period = 0.0;
      std::optional<rtm::Spectrum> spec;
      std::optional<rtm::EigenCoefficients> coeffs;
      if (revival->parsed() && !signal_in.empty()) {
        signal = read_signal(signal_in, u.time_unit);
        predicted = rtm::revival_time_closed_form(z0 + 1.0 / (8.0 * settings.width * settings.width));
      } else if (cfg.engine == rtm::Engine::analytic) {
        spec = rtm::Spectrum::triangular_well(cfg.n_max.value_or(rtm::levels_for_drop(z0)));
        const rtm::Grid grid{0.0, 2.5 * z0, 1u << 14};
        coeffs = rtm::project(rtm::make_gaussian(z0, settings.width, settings.mean_momentum, grid),
                              *spec);
        period = rtm::classical_period(*spec, coeffs->n0_mean);
        double e = 0.0;
        for (int n = coeffs->first_level; n <= coeffs->last_level; ++n) {
          e += std::norm(coeffs->c[n - 1]) * spec->level(n);
        }
        predicted = rtm::revival_time_closed_form(e);
        const double t_end =
            periods ? *periods * period
                    : settings.t_final.value_or((1.0 + cfg.window_frac) * predicted + period);
        signal = rtm::analytic_autocorrelation(
            *coeffs, *spec, rtm::uniform_times(t_end, period / cfg.samples_per_period));
      } else {
        const rtm::PotentialModel pot{settings.v0, settings.kappa,
                                      cfg.modulation_amplitude / u.length_unit,
                                      cfg.modulation_frequency * u.time_unit};
        const rtm::PotentialModel mirror{settings.v0, settings.kappa, 0.0, 0.0};
        const rtm::Grid grid = rtm::default_grid(pot, z0, settings.grid_points);
        const auto packet = rtm::make_gaussian(z0, settings.width, settings.mean_momentum, grid);
        const auto e0 = rtm::SplitStepPropagator(grid, pot).energy(packet.amplitudes(), 0.0);
        period = rtm::semiclassical_period(mirror, e0.mean);
        predicted = rtm::semiclassical_revival_time(mirror, e0.mean);
        const double dt = settings.dt.value_or(rtm::max_stable_dt(pot, e0));
        const double t_end =
            periods ? *periods * period
                    : settings.t_final.value_or((1.0 + cfg.window_frac) * predicted + period);
        const auto stride = static_cast<std::size_t>(
            std::max(1.0, std::round(period / cfg.samples_per_period / dt)));
        signal = rtm::evolve(packet, pot, t_end, dt, stride).autocorr;
      }
      if (predicted_t2) predicted = *predicted_t2 / u.time_unit;
      if (autocorr->parsed()) {
        write_output(c, signal_table(signal, u.time_unit, c.format));
      } else {
        rtm::RevivalOptions options;
        options.window_frac = cfg.window_frac;
        const rtm::RevivalReport rep = rtm::analyze_revivals(signal, predicted, options);
        ordered_json j;
        j["engine"] = rtm::to_string(cfg.engine);
        j["T1_s"] = num(rep.classical_period.value * u.time_unit);
        j["T1_uncertainty_s"] = num(rep.classical_period.uncertainty * u.time_unit);
        j["T1_kinematic_s"] = num(2.0 * std::sqrt(2.0 * cfg.z0 / cfg.gravity));
        j["T2_s"] = num(rep.revival_time.value * u.time_unit);
        j["T2_uncertainty_s"] = num(rep.revival_time.uncertainty * u.time_unit);
        j["T2_predicted_s"] = num(predicted * u.time_unit);
        if (spec) {
          j["n0_mean"] = num(coeffs->n0_mean);
          j["T2_closed_form_s"] = num(rtm::revival_time(*spec, coeffs->n0_mean,
                                                        rtm::RevivalMethod::closed_form) *
                                      u.time_unit);
          j["T2_derivative_s"] = num(rtm::revival_time(*spec, coeffs->n0_mean,
                                                       rtm::RevivalMethod::derivative) *
                                     u.time_unit);
        }
        j["window_lo_s"] = num(rep.window_lo * u.time_unit);
        j["window_hi_s"] = num(rep.window_hi * u.time_unit);
        write_output(c, j.dump(2) + "\n");
      }
    } else if (propagate->parsed()) {
      rtm::RunConfig cfg = resolve(propagate_opts);
      if (propagate_dt) cfg.dt = *propagate_dt;
      const rtm::PhysicalParams p = cfg.physical(cfg.z0);
      const auto& u = p.units();
      const double z0 = cfg.z0 / u.length_unit;
      const rtm::ExperimentSettings settings = rtm::experiment_settings(cfg, cfg.z0);
      const rtm::PotentialModel pot{settings.v0, settings.kappa,
                                    cfg.modulation_amplitude / u.length_unit,
                                    cfg.modulation_frequency * u.time_unit};
      double t_start = 0.0;
      std::optional<rtm::GridWavepacket> packet;
      if (!resume_from.empty()) {
        rtm::Checkpoint cp = rtm::load_checkpoint(resume_from);
        t_start = cp.time;
        packet = std::move(cp.packet);
        if (pot.modulated() && t_start != 0.0) {
          spdlog::warn("resuming a modulated run: the drive phase restarts at t = 0");
        }
      } else {
        packet = rtm::make_gaussian(z0, settings.width, settings.mean_momentum,
                                    rtm::default_grid(pot, z0, settings.grid_points));
      }
      const auto e0 = rtm::SplitStepPropagator(packet->grid(), pot).energy(packet->amplitudes(), 0.0);
      const double period = 2.0 * std::sqrt(2.0 * e0.mean);
      const double duration = t_final ? *t_final / u.time_unit
                                      : settings.t_final.value_or(5.0 * period);
      const double dt = settings.dt.value_or(rtm::max_stable_dt(pot, e0));
      const auto stride = static_cast<std::size_t>(
          std::max(1.0, std::round(period / cfg.samples_per_period / dt)));
      rtm::EvolutionResult run = rtm::evolve(*packet, pot, duration, dt, stride);
      for (double& t : run.autocorr.times) t += t_start;
      spdlog::info("norm drift {:.3e}, energy drift {:.3e}", run.norm_drift, run.energy_drift);
      if (!checkpoint_out.empty()) {
        rtm::save_checkpoint(checkpoint_out, run.final_state,
                             t_start + dt * std::llround(duration / dt));
      }
      write_output(propagate_opts, signal_table(run.autocorr, u.time_unit, propagate_opts.format,
                                                &run, u.length_unit));
    } else if (inv_static->parsed()) {
      const rtm::RunConfig cfg = resolve(inv_s_opts);
      const rtm::PhysicalParams p = cfg.physical(href);
      const auto& u = p.units();
      const rtm::StaticInversion inv = rtm::invert_static(
          {t2 / u.time_unit, t2_unc / u.time_unit}, href / u.length_unit,
          cfg.calibration_tolerance * href / u.length_unit);
      ordered_json j;
      j["E_J"] = num(inv.energy.value * u.energy_unit);
      j["E_uncertainty_J"] = num(inv.energy.uncertainty * u.energy_unit);
      j["h_m"] = num(inv.height.value * u.length_unit);
      j["h_uncertainty_m"] = num(inv.height.uncertainty * u.length_unit);
      write_output(inv_s_opts, j.dump(2) + "\n");
    } else if (inv_dynamic->parsed()) {
      const rtm::RunConfig cfg = resolve(inv_d_opts);
      const rtm::PhysicalParams p = cfg.physical(cfg.z0);
      const auto& u = p.units();
      const double e = e_n0 ? *e_n0 / u.energy_unit : cfg.z0 / u.length_unit;
      double r = 0.0;
      if (r_value) {
        r = *r_value;
      } else if (cfg.r) {
        r = *cfg.r;
      } else if (cfg.resonant_energy) {
        r = std::sqrt(*cfg.resonant_energy / u.energy_unit / e);
      } else {
        const double w = omega_seed.value_or(cfg.modulation_frequency) * u.time_unit;
        const auto spec = rtm::Spectrum::triangular_well(cfg.n_max.value_or(rtm::levels_for_drop(e)));
        r = std::sqrt(rtm::resonant_energy(w, spec).energy / e);
      }
      const rtm::ModulationContext ctx = rtm::partial_context(e, r);
      std::optional<double> a_scaled;
      if (amplitude) a_scaled = *amplitude / u.length_unit;
      const rtm::InversionResult inv =
          rtm::invert_dynamic({t2s / u.time_unit, t2s_unc / u.time_unit},
                              {t2m / u.time_unit, t2m_unc / u.time_unit}, ctx, a_scaled);
      ordered_json j;
      j["r"] = num(r);
      j["amplitude_m"] = num(inv.amplitude.value * u.length_unit);
      j["amplitude_uncertainty_m"] = num(inv.amplitude.uncertainty * u.length_unit);
      j["omega_rad_s"] = num(inv.omega.value / u.time_unit);
      j["omega_uncertainty_rad_s"] = num(inv.omega.uncertainty / u.time_unit);
      j["alpha_T"] = num(inv.alpha_t);
      j["roots_found"] = ordered_json::array();
      for (double x : inv.roots_found) j["roots_found"].push_back(num(x));
      j["residuals"] = ordered_json::array();
      for (double x : inv.residuals) j["residuals"].push_back(num(x));
      if (inv.omega.value > 0.0) {
        j["spacing_m"] = num(rtm::structure_spacing(inv.omega.value / u.time_unit, cfg.scan_speed));
      }
      write_output(inv_d_opts, j.dump(2) + "\n");
    } else if (scan->parsed()) {
      rtm::RunConfig cfg = resolve(scan_opts);
      if (mode == "dynamic" && scan_opts.engine.empty()) cfg.engine = rtm::Engine::grid;
      if (!profile_path.empty()) cfg.profile = profile_path;
      if (!cfg.profile) throw rtm::ValidationError("scan needs --profile or scan.profile");
      const rtm::SurfaceProfile profile = rtm::load_profile(*cfg.profile, cfg.h_ref);
      const rtm::ScanResult result = mode == "static" ? rtm::run_static_scan(profile, cfg)
                                                      : rtm::run_dynamic_scan(profile, cfg);
      write_output(scan_opts, rtm::format_report(result, rtm::parse_format(scan_opts.format)));
    } else if (validate->parsed()) {
      const rtm::RunConfig cfg = resolve(validate_opts);
      const rtm::PhysicalParams p = cfg.physical(cfg.z0);
      const auto& u = p.units();
      const double z0 = cfg.z0 / u.length_unit;
      const double width = cfg.width / u.length_unit;
      // Largest kinetic energy at the mirror: fall from z0 plus six momentum spreads.
      const double max_ke = (z0 + 6.0 / (2.0 * width)) * u.energy_unit;
      p.check_mirror_holds(max_ke);
      const double n0 = std::pow(2.0 * z0, 1.5) / (3.0 * std::numbers::pi);
      if (n0 < 20.0) throw rtm::ValidationError("z0 gives n0 below 20 (semiclassical regime)");
      rtm::ValidityParams v{cfg.decay_rate, cfg.detuning, rtm::impact_speed_from_drop(cfg.z0, p),
                            cfg.max_rabi};
      const double psp = rtm::spontaneous_emission_probability(v, cfg.kappa, p);
      if (psp > cfg.psp_threshold) {
        spdlog::warn("spontaneous emission probability {:.3f} per bounce exceeds {}", psp,
                     cfg.psp_threshold);
      }
      ordered_json j;
      j["valid"] = true;
      j["length_unit_m"] = num(u.length_unit);
      j["time_unit_s"] = num(u.time_unit);
      j["energy_unit_J"] = num(u.energy_unit);
      j["z0_scaled"] = num(z0);
      j["n0_estimate"] = num(n0);
      j["kappa_scaled"] = num(cfg.kappa * u.length_unit);
      j["V0_J"] = num(p.mirror_strength());
      j["impact_speed_m_s"] = num(v.impact_speed);
      j["P_sp"] = num(psp);
      j["P_sp_flag"] = psp > cfg.psp_threshold;
      j["config"] = ordered_json::parse(rtm::config_to_json_text(cfg));
      write_output(validate_opts, j.dump(2) + "\n");
    }
  } catch (const rtm::ValidationError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const rtm::NumericalError& e) {
    spdlog::error("{}", e.what());
    return 3;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}

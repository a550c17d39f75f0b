#pragma once

#include <filesystem>
#include <numbers>
#include <optional>
#include <string>

#include "rtm/physics.hpp"

namespace rtm {

enum class Engine { analytic, grid };

Engine parse_engine(const std::string& name);
std::string to_string(Engine engine);

/// One run configuration shared by every CLI subcommand. All fields are SI;
/// conversion to scaled units happens where the numerics start.
struct RunConfig {
  double mass = constants::cs133_mass;
  double gravity = constants::default_gravity;

  // Mirror V0 exp(-kappa z). Without an explicit V0 the strength is
  // v0_ratio * m g H, H being the reference drop height.
  std::optional<double> v0;
  double v0_ratio = 100.0;
  double kappa = 1.0 / 0.55e-6;

  double decay_rate = 2.0 * std::numbers::pi * 5.2e6;  // gamma
  double detuning = 2.0 * std::numbers::pi * 1.0e9;    // delta
  std::optional<double> max_rabi;
  double psp_threshold = default_psp_warning_threshold;

  double z0 = 20.1e-6;         // drop height of the packet centre
  double width = 0.28e-6;      // position standard deviation
  double mean_momentum = 0.0;  // kg m/s

  std::optional<int> n_max;
  std::size_t grid_points = 1u << 14;
  std::optional<double> dt;       // s; default from the stability rule
  std::optional<double> t_final;  // s; default covers the revival window
  double samples_per_period = 200.0;

  double modulation_amplitude = 0.0;                          // m
  double modulation_frequency = 2.0 * std::numbers::pi * 1.0e3;  // rad/s

  double window_frac = 0.3;

  std::optional<double> resonant_energy;  // E_N in J
  std::optional<double> r;

  double h_ref = 20.1e-6;
  std::optional<std::filesystem::path> profile;
  double scan_speed = 1.0e-6;
  Engine engine = Engine::analytic;
  unsigned jobs = 1;
  /// Allowed excess of the recovered energy over m g H_ref, relative.
  double calibration_tolerance = 0.02;

  /// Mirror strength actually used for a drop of height h.
  double mirror_strength(double h) const;
  /// Physical parameters with the mirror sized for drop height h.
  PhysicalParams physical(double h) const;
  void validate() const;
};

/// Reads a JSON config; unknown keys are rejected so typos surface.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const RunConfig& config);

}  // namespace rtm

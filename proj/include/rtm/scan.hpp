#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rtm/config.hpp"
#include "rtm/inversion.hpp"
#include "rtm/propagator.hpp"
#include "rtm/revival.hpp"

namespace rtm {

struct ProfileSample {
  double x = 0.0;  // m
  double h = 0.0;  // m
};

struct SurfaceProfile {
  std::vector<ProfileSample> samples;
  std::string name;
  std::string units = "m";
};

/// Two-column CSV "x_m,h_m" (header optional, '#' comments). x must be
/// strictly increasing and heights finite; with h_ref set, |h| < 0.1 h_ref.
/// Errors name the offending line.
SurfaceProfile load_profile(const std::filesystem::path& path,
                            std::optional<double> h_ref = std::nullopt);
SurfaceProfile parse_profile(const std::string& text, const std::string& name = "profile",
                             std::optional<double> h_ref = std::nullopt);
/// Writes "x_m,h_m" at 12 significant digits.
void write_profile(const SurfaceProfile& profile, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Single drop-and-measure experiment, scaled units.

struct ExperimentSettings {
  double width = 0.0;  // packet position standard deviation
  double mean_momentum = 0.0;
  double v0 = 0.0;     // mirror, grid engine
  double kappa = 0.0;
  std::size_t grid_points = 1u << 14;
  std::optional<double> dt;
  std::optional<double> t_final;
  double samples_per_period = 200.0;
  double window_frac = 0.3;
};

struct RevivalMeasurement {
  Estimate t2;
  double predicted_t2 = 0.0;
  double classical_period = 0.0;
  double mean_energy = 0.0;
  double n0_mean = 0.0;  // analytic engine only
  std::size_t samples = 0;
};

/// Analytic engine: triangular-well levels, projection, autocorrelation up to
/// past the revival window, detect_revival around 16 E^2 / pi.
RevivalMeasurement measure_revival_analytic(double z0, const ExperimentSettings& settings,
                                            const Spectrum& spectrum);

/// Grid engine over the (optionally modulated) soft mirror; the revival window
/// is centred on the semiclassical prediction for the static soft mirror.
RevivalMeasurement measure_revival_grid(double z0, const ExperimentSettings& settings,
                                        double amplitude = 0.0, double omega = 0.0);

/// Enough triangular-well levels to hold a packet dropped from z0.
int levels_for_drop(double z0);

// ---------------------------------------------------------------------------
// Scans

enum class ScanMode { static_mode, dynamic_mode };

struct PointResult {
  double x = 0.0;           // m
  double h_input = 0.0;     // m, the surface that was scanned
  double t2 = 0.0;          // s, NaN on failure
  double t2_uncertainty = 0.0;
  double energy = 0.0;      // J
  double h = 0.0;           // m, reconstructed
  double p_sp = 0.0;
  bool p_sp_flag = false;
  std::string status = "ok";  // or the failure message
};

struct DynamicExtras {
  double amplitude_true = 0.0;  // m
  double omega_true = 0.0;      // rad/s
  double spacing_true = 0.0;    // m
  Estimate t2_static;           // s
  Estimate t2_modulated;        // s
  Estimate amplitude;           // m
  Estimate omega;               // rad/s, NaN when not recoverable
  double spacing = 0.0;         // m
  double r = 0.0;
  double alpha_t = 0.0;
  std::vector<double> roots;
  std::string frequency_status = "ok";
};

struct ScanResult {
  SurfaceProfile reconstructed;
  std::vector<PointResult> per_point;
  ScanMode mode = ScanMode::static_mode;
  std::optional<DynamicExtras> dynamic_extras;
};

/// Scaled experiment settings derived from the config for a drop of height h.
ExperimentSettings experiment_settings(const RunConfig& config, double h);

/// Each point is an independent drop from H_ref - h(x); the first point
/// calibrates h = 0. Failures are recorded per point; more than half failing
/// aborts with NumericalError.
ScanResult run_static_scan(const SurfaceProfile& profile, const RunConfig& config);

struct Periodicity {
  double amplitude = 0.0;  // m
  double period = 0.0;     // m
  double phase = 0.0;      // of a sin(2 pi x / period + phase)
  double mean = 0.0;
};

/// Dominant Fourier component of a uniformly sampled profile. Throws
/// ValidationError when it is not at least 10x every other component.
Periodicity profile_periodicity(const SurfaceProfile& profile);

/// Static reference run and modulated run on the grid engine, then the
/// dynamic-mode inversion.
ScanResult run_dynamic_scan(const SurfaceProfile& profile, const RunConfig& config);

enum class ReportFormat { csv, json };
ReportFormat parse_format(const std::string& name);

std::string format_report(const ScanResult& result, ReportFormat format);
void emit_report(const ScanResult& result, const std::filesystem::path& path, ReportFormat format);

/// Shortest decimal of v at 12 significant digits ("nan" for NaN).
std::string format_number(double v);

}  // namespace rtm

#pragma once

#include <optional>
#include <vector>

#include "rtm/revival.hpp"
#include "rtm/spectrum.hpp"

// Everything here works in scaled units (hbar = m = g = 1), so an energy and
// the height it corresponds to are the same number.
namespace rtm {

/// E = sqrt(pi T2 / 16), the inverse of revival_time_closed_form.
double energy_from_revival(double t2);

/// h = H_ref - E. Throws ValidationError when E exceeds H_ref by more than
/// `tolerance` (calibration inconsistency).
double height_from_energy(double energy, double h_ref, double tolerance = 0.0);

struct Resonance {
  double quantum_number = 0.0;  // real N with dE/dn(N) = omega
  double energy = 0.0;          // E_N
};

/// Level whose local spacing equals omega. Throws NumericalError
/// ("no resonance") when omega is outside the spacings the spectrum covers.
Resonance resonant_energy(double omega, const Spectrum& spectrum);

struct ModulationContext {
  double e_n0 = 0.0;
  double e_resonant = 0.0;  // E_N
  double r = 0.0;           // sqrt(E_N / E_n0)
  double a_tilde = 0.0;     // r^2 omega / (4 E_n0)

  double u() const { return (1.0 - r) * (1.0 - r); }
};

/// Builds the context for a modulation at omega. Throws SingularityError
/// when r = 1 and ValidationError for non-positive inputs.
ModulationContext make_modulation_context(double e_n0, double e_resonant, double omega);

/// Context known only through r, as in a measurement where omega is unknown.
ModulationContext partial_context(double e_n0, double r);

/// T_lambda for a mirror modulated with amplitude a.
double modulated_revival_time(const ModulationContext& ctx, double amplitude, double t2_static);

/// a = sqrt(8/3) E_n0 (1-r)^2 sqrt(1 - T_lambda / T2).
double amplitude_from_times(double t2_static, double t2_modulated, const ModulationContext& ctx);

struct FrequencySolution {
  double alpha_t = 0.0;
  std::vector<double> roots;      // candidate a_tilde, ascending
  std::vector<double> residuals;  // cubic residual at each root
  double a_tilde = 0.0;           // smallest root
  double omega = 0.0;
};

/// Solves the cubic in x = a_tilde^2 on [0, (1-r)^2) and converts the
/// smallest root to omega = 4 E_n0 a_tilde / r^2. Only ctx.e_n0 and ctx.r
/// are used. Throws NumericalError when no root lies in the interval.
FrequencySolution frequency_from_times(double t2_static, double t2_modulated, double amplitude,
                                       const ModulationContext& ctx);

/// 2 pi v / omega; any consistent unit system.
double structure_spacing(double omega, double scan_speed);

struct StaticInversion {
  Estimate energy;
  Estimate height;
};

StaticInversion invert_static(const Estimate& t2, double h_ref, double tolerance = 0.0);

struct InversionResult {
  Estimate amplitude;
  Estimate omega;
  double alpha_t = 0.0;
  std::vector<double> roots_found;
  std::vector<double> residuals;
};

/// Dynamic inversion. When `amplitude` is given it is used for the
/// frequency step instead of the value read off the times.
/// Uncertainties are propagated linearly from the two time estimates.
InversionResult invert_dynamic(const Estimate& t2_static, const Estimate& t2_modulated,
                               const ModulationContext& ctx,
                               std::optional<double> amplitude = std::nullopt);

}  // namespace rtm

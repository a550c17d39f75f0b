#pragma once

#include <span>
#include <vector>

#include "rtm/airy.hpp"

namespace rtm {

/// Ordered eigenenergies E_1..E_nmax in scaled units (hbar = m = g = 1).
/// Levels between integers are reached by cubic interpolation through the
/// four nearest integer levels.
class Spectrum {
 public:
  /// Takes E_1..E_nmax; must be positive and strictly increasing.
  explicit Spectrum(std::vector<double> energies);

  /// Triangular-well levels 2^(-1/3) z_n.
  static Spectrum triangular_well(int n_max, AiryZeroMode mode = AiryZeroMode::exact);

  int n_max() const noexcept { return static_cast<int>(energies_.size()); }
  std::span<const double> energies() const noexcept { return energies_; }
  double level(int n) const;
  /// E at real quantum number n, 1 <= n <= n_max.
  double interpolate(double n) const;

 private:
  std::vector<double> energies_;
};

/// Scaled energy 2^(-1/3) z_n of level n of the triangular well.
double triangular_energy(int n, AiryZeroMode mode = AiryZeroMode::exact);

/// Large-n closed form E_n = (1/2)(3 pi n)^(2/3) in scaled units.
double large_n_energy(double n);

/// Unit-step central finite difference of order j (1, 2 or 3) at real n0.
double energy_derivative(const Spectrum& spectrum, double n0, int order);

/// T1 = 2 pi / |dE/dn|.
double classical_period(const Spectrum& spectrum, double n0);

/// Same period in action variables: 2 pi / |dE/dI| with I = n hbar.
double classical_period_action(const Spectrum& spectrum, double n0, double hbar = 1.0);

enum class RevivalMethod { derivative, closed_form };

/// T2 either from 2 pi / (|E''| / 2) or from 16 E_n0^2 / pi.
double revival_time(const Spectrum& spectrum, double n0, RevivalMethod method);

/// 16 E^2 / pi for a mean energy E (scaled).
double revival_time_closed_form(double mean_energy);

/// T_j = 2 pi / (|E^(j)| / j!).
double recurrence_time(const Spectrum& spectrum, double n0, int order);

/// Real quantum number whose interpolated energy equals `energy`.
double quantum_number_for_energy(const Spectrum& spectrum, double energy);

}  // namespace rtm

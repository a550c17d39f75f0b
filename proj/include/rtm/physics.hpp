#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace rtm {

enum class Dimension { length, time, energy, momentum, frequency };

std::string_view to_string(Dimension d);

/// A dimensional SI value tagged with its dimension.
struct Quantity {
  double value;
  Dimension dimension;
};

constexpr Quantity meters(double v) { return {v, Dimension::length}; }
constexpr Quantity seconds(double v) { return {v, Dimension::time}; }
constexpr Quantity joules(double v) { return {v, Dimension::energy}; }
constexpr Quantity per_second(double v) { return {v, Dimension::frequency}; }

namespace constants {
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double cs133_mass = 2.2069e-25;  // kg
inline constexpr double default_gravity = 9.8;    // m/s^2
}  // namespace constants

/// Length, time and energy scales of the gravitational cavity
/// (hbar = m = g = 1 internally).
struct ScaledUnits {
  double length_unit;  // (hbar^2 / (m^2 g))^(1/3)
  double time_unit;    // (hbar / (m g^2))^(1/3)
  double energy_unit;  // (hbar^2 m g^2)^(1/3)
};

/// Dimensional backbone in SI. Mirror fields describe V0 exp(-kappa z).
class PhysicalParams {
 public:
  PhysicalParams(double mass, double gravity, double hbar, double mirror_strength,
                 double mirror_decay);

  static PhysicalParams cs133(double mirror_strength, double mirror_decay,
                              double gravity = constants::default_gravity);

  double mass() const noexcept { return mass_; }
  double gravity() const noexcept { return gravity_; }
  double hbar() const noexcept { return hbar_; }
  double mirror_strength() const noexcept { return mirror_strength_; }
  double mirror_decay() const noexcept { return mirror_decay_; }

  const ScaledUnits& units() const noexcept { return units_; }

  /// Throws ValidationError unless V0 exceeds the largest kinetic energy the
  /// packet reaches at the mirror (turning point above z = 0).
  void check_mirror_holds(double max_kinetic_energy) const;

 private:
  double mass_;
  double gravity_;
  double hbar_;
  double mirror_strength_;
  double mirror_decay_;
  ScaledUnits units_;
};

double to_scaled(Quantity q, Dimension kind, const PhysicalParams& params);
double from_scaled(double value, Dimension kind, const PhysicalParams& params);

struct ValidityParams {
  double decay_rate;                    // gamma, 1/s
  double detuning;                      // delta, angular 1/s, > 0 (blue)
  double impact_speed;                  // v_z, m/s
  std::optional<double> max_rabi;       // Omega_max, 1/s
};

/// Spontaneous emission probability per bounce,
/// gamma Omega_max^2 / (4 delta^2) * 2 / (kappa v_z). Without Omega_max the
/// light-shift condition hbar Omega^2/(4 delta) = m v^2 / 2 eliminates it.
double spontaneous_emission_probability(const ValidityParams& v, double kappa,
                                        const PhysicalParams& params);

/// Rabi frequency satisfying the light-shift turning-point condition.
double light_shift_rabi(double detuning, double impact_speed, const PhysicalParams& params);

/// Classical free-fall impact speed sqrt(2 g z0).
double impact_speed_from_drop(double z0, const PhysicalParams& params);

inline constexpr double default_psp_warning_threshold = 0.1;

}  // namespace rtm

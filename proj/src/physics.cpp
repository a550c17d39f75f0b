#include "rtm/physics.hpp"

#include <cmath>
#include <string>

#include "rtm/errors.hpp"

namespace rtm {

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::length: return "length";
    case Dimension::time: return "time";
    case Dimension::energy: return "energy";
    case Dimension::momentum: return "momentum";
    case Dimension::frequency: return "frequency";
  }
  return "unknown";
}

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(std::string(name) + " must be finite and strictly positive, got " +
                          std::to_string(v));
  }
}

double unit_of(Dimension kind, const PhysicalParams& p) {
  const ScaledUnits& u = p.units();
  switch (kind) {
    case Dimension::length: return u.length_unit;
    case Dimension::time: return u.time_unit;
    case Dimension::energy: return u.energy_unit;
    case Dimension::momentum: return p.hbar() / u.length_unit;
    case Dimension::frequency: return 1.0 / u.time_unit;
  }
  throw ValidationError("unknown dimension");
}

}  // namespace

PhysicalParams::PhysicalParams(double mass, double gravity, double hbar, double mirror_strength,
                               double mirror_decay)
    : mass_(mass),
      gravity_(gravity),
      hbar_(hbar),
      mirror_strength_(mirror_strength),
      mirror_decay_(mirror_decay) {
  require_positive(mass, "mass");
  require_positive(gravity, "gravity");
  require_positive(hbar, "hbar");
  require_positive(mirror_strength, "mirror strength V0");
  require_positive(mirror_decay, "mirror decay kappa");
  units_.length_unit = std::cbrt(hbar * hbar / (mass * mass * gravity));
  units_.time_unit = std::cbrt(hbar / (mass * gravity * gravity));
  units_.energy_unit = std::cbrt(hbar * hbar * mass * gravity * gravity);
}

PhysicalParams PhysicalParams::cs133(double mirror_strength, double mirror_decay, double gravity) {
  return PhysicalParams(constants::cs133_mass, gravity, constants::hbar, mirror_strength,
                        mirror_decay);
}

void PhysicalParams::check_mirror_holds(double max_kinetic_energy) const {
  if (!(mirror_strength_ > max_kinetic_energy)) {
    throw ValidationError("mirror strength V0 = " + std::to_string(mirror_strength_) +
                          " J does not exceed the packet's maximum kinetic energy " +
                          std::to_string(max_kinetic_energy) + " J; atoms would reach the surface");
  }
}

double to_scaled(Quantity q, Dimension kind, const PhysicalParams& params) {
  if (q.dimension != kind) {
    throw ValidationError("dimension mismatch: got a " + std::string(to_string(q.dimension)) +
                          ", expected a " + std::string(to_string(kind)));
  }
  return q.value / unit_of(kind, params);
}

double from_scaled(double value, Dimension kind, const PhysicalParams& params) {
  return value * unit_of(kind, params);
}

double light_shift_rabi(double detuning, double impact_speed, const PhysicalParams& params) {
  require_positive(detuning, "detuning");
  if (!(impact_speed >= 0.0)) throw ValidationError("impact speed must be non-negative");
  return std::sqrt(2.0 * detuning * params.mass() * impact_speed * impact_speed / params.hbar());
}

double spontaneous_emission_probability(const ValidityParams& v, double kappa,
                                        const PhysicalParams& params) {
  if (!(v.decay_rate >= 0.0)) throw ValidationError("decay rate gamma must be non-negative");
  if (!(v.detuning > 0.0)) {
    throw ValidationError("detuning delta must be positive (blue-detuned mirror)");
  }
  if (!(v.impact_speed > 0.0)) {
    throw ValidationError("impact speed v_z must be positive (reflection time diverges)");
  }
  if (!(kappa > 0.0)) throw ValidationError("mirror decay kappa must be positive");

  const double reflection_time = 2.0 / (kappa * v.impact_speed);
  if (v.max_rabi) {
    const double omega = *v.max_rabi;
    return v.decay_rate * omega * omega / (4.0 * v.detuning * v.detuning) * reflection_time;
  }
  return v.decay_rate * params.mass() * v.impact_speed / (params.hbar() * v.detuning * kappa);
}

double impact_speed_from_drop(double z0, const PhysicalParams& params) {
  if (!(z0 >= 0.0)) throw ValidationError("drop height must be non-negative");
  return std::sqrt(2.0 * params.gravity() * z0);
}

}  // namespace rtm

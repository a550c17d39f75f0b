#include "rtm/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rtm/errors.hpp"

namespace rtm {

namespace {

constexpr double kRootResidual = 1e-10;
constexpr int kRootScan = 256;

double cubic(double alpha, double u, double x) {
  const double d = u - x;
  return alpha * d * d * d - (3.0 * u + x);
}

double cubic_slope(double alpha, double u, double x) {
  const double d = u - x;
  return -3.0 * alpha * d * d - 1.0;
}

double polish_root(double alpha, double u, double lo, double hi) {
  double glo = cubic(alpha, u, lo);
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * u; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = cubic(alpha, u, mid);
    if (gm == 0.0) return mid;
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double step = cubic(alpha, u, x) / cubic_slope(alpha, u, x);
    const double next = x - step;
    if (!(next >= 0.0 && next < u)) break;
    x = next;
  }
  return x;
}

void require_times(double t2_static, double t2_modulated) {
  if (!(t2_static > 0.0) || !std::isfinite(t2_static)) {
    throw ValidationError("static revival time must be positive");
  }
  if (!(t2_modulated > 0.0) || !std::isfinite(t2_modulated)) {
    throw ValidationError("modulated revival time must be positive");
  }
}

}  // namespace

double energy_from_revival(double t2) {
  if (!(t2 > 0.0) || !std::isfinite(t2)) {
    throw ValidationError("revival time must be positive, got " + std::to_string(t2));
  }
  return std::sqrt(t2 * std::numbers::pi / 16.0);
}

double height_from_energy(double energy, double h_ref, double tolerance) {
  if (!(h_ref > 0.0)) throw ValidationError("reference drop height must be positive");
  if (!(tolerance >= 0.0)) throw ValidationError("tolerance must be non-negative");
  if (!(energy > 0.0)) throw ValidationError("energy must be positive");
  if (energy > h_ref + tolerance) {
    throw ValidationError("calibration inconsistency: recovered energy " + std::to_string(energy) +
                          " exceeds m g H_ref = " + std::to_string(h_ref));
  }
  return h_ref - energy;
}

Resonance resonant_energy(double omega, const Spectrum& spectrum) {
  if (!(omega > 0.0)) throw ValidationError("modulation frequency must be positive");
  const double lo_n = 2.0;
  const double hi_n = spectrum.n_max() - 1.0;
  if (!(hi_n > lo_n)) throw ValidationError("spectrum too short for a resonance search");
  auto spacing = [&](double n) { return energy_derivative(spectrum, n, 1); };
  const double s_lo = spacing(lo_n);  // largest spacing
  const double s_hi = spacing(hi_n);  // smallest spacing
  if (omega > s_lo || omega < s_hi) {
    throw NumericalError("no resonance: omega = " + std::to_string(omega) +
                         " lies outside the level spacings [" + std::to_string(s_hi) + ", " +
                         std::to_string(s_lo) + "]");
  }
  double a = lo_n, b = hi_n;
  for (int it = 0; it < 200 && b - a > 1e-13 * b; ++it) {
    const double mid = 0.5 * (a + b);
    if (spacing(mid) > omega) {
      a = mid;
    } else {
      b = mid;
    }
  }
  const double n = 0.5 * (a + b);
  return {n, spectrum.interpolate(n)};
}

ModulationContext make_modulation_context(double e_n0, double e_resonant, double omega) {
  if (!(omega >= 0.0)) throw ValidationError("modulation frequency must be non-negative");
  if (!(e_resonant > 0.0)) throw ValidationError("E_N must be positive");
  if (!(e_n0 > 0.0)) throw ValidationError("E_n0 must be positive");
  ModulationContext ctx = partial_context(e_n0, std::sqrt(e_resonant / e_n0));
  ctx.e_resonant = e_resonant;
  ctx.a_tilde = ctx.r * ctx.r * omega / (4.0 * e_n0);
  return ctx;
}

ModulationContext partial_context(double e_n0, double r) {
  if (!(e_n0 > 0.0)) throw ValidationError("E_n0 must be positive");
  if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("r must be positive");
  if (r == 1.0) throw SingularityError("r = 1: modulation resonant with the initial level");
  ModulationContext ctx;
  ctx.e_n0 = e_n0;
  ctx.r = r;
  ctx.e_resonant = r * r * e_n0;
  return ctx;
}

double modulated_revival_time(const ModulationContext& ctx, double amplitude, double t2_static) {
  if (!(amplitude >= 0.0)) throw ValidationError("amplitude must be non-negative");
  if (!(t2_static > 0.0)) throw ValidationError("static revival time must be positive");
  const double u = ctx.u();
  const double at2 = ctx.a_tilde * ctx.a_tilde;
  const double denom = u - at2;
  if (denom == 0.0) {
    throw SingularityError("(1-r)^2 = a_tilde^2: modulated revival time is singular");
  }
  const double q = amplitude / ctx.e_n0;
  return t2_static * (1.0 - 0.125 * q * q * (3.0 * u + at2) / (denom * denom * denom));
}

double amplitude_from_times(double t2_static, double t2_modulated, const ModulationContext& ctx) {
  require_times(t2_static, t2_modulated);
  const double bracket = 1.0 - t2_modulated / t2_static;
  if (bracket < 0.0) {
    throw ValidationError("modulated revival time exceeds the static one: negative bracket, "
                          "regime violated");
  }
  if (ctx.a_tilde != 0.0 && !(ctx.u() > ctx.a_tilde * ctx.a_tilde)) {
    throw ValidationError("regime violated: need (1-r)^2 > a_tilde^2");
  }
  return std::sqrt(8.0 / 3.0) * ctx.e_n0 * ctx.u() * std::sqrt(bracket);
}

FrequencySolution frequency_from_times(double t2_static, double t2_modulated, double amplitude,
                                       const ModulationContext& ctx) {
  require_times(t2_static, t2_modulated);
  if (!(amplitude > 0.0)) throw ValidationError("amplitude must be positive");
  if (!(t2_modulated < t2_static)) {
    throw ValidationError("frequency inversion needs T_lambda < T2");
  }
  const double u = ctx.u();
  const double q = ctx.e_n0 / amplitude;
  FrequencySolution sol;
  sol.alpha_t = 8.0 * q * q * (1.0 - t2_modulated / t2_static);
  const double alpha = sol.alpha_t;

  std::vector<double> xs;
  double prev_x = 0.0;
  double prev_g = cubic(alpha, u, 0.0);
  if (std::abs(prev_g) < kRootResidual) xs.push_back(0.0);
  // g falls monotonically on [0, u): a root at zero is the only one.
  for (int k = 1; k <= kRootScan && xs.empty(); ++k) {
    // The last node is the open end x = u, where g = -4u.
    const double x = u * k / kRootScan;
    const double g = cubic(alpha, u, x);
    const bool crossing = (prev_g > 0.0 && g < 0.0) || (prev_g < 0.0 && g > 0.0);
    if (crossing) {
      const double root = polish_root(alpha, u, prev_x, x);
      if (root < u && (xs.empty() || root - xs.back() > 1e-14 * u)) xs.push_back(root);
    } else if (g == 0.0 && k < kRootScan) {
      xs.push_back(x);
    }
    prev_x = x;
    prev_g = g;
  }
  if (xs.empty()) {
    throw NumericalError("inconsistent measurement: no root of the frequency equation in "
                         "[0, (1-r)^2) (alpha_T = " + std::to_string(alpha) + ")");
  }
  for (double x : xs) {
    const double res = cubic(alpha, u, x);
    if (!(std::abs(res) < kRootResidual)) {
      throw NumericalError("frequency root did not converge: residual " + std::to_string(res));
    }
    sol.roots.push_back(std::sqrt(x));
    sol.residuals.push_back(res);
  }
  sol.a_tilde = sol.roots.front();
  sol.omega = 4.0 * ctx.e_n0 * sol.a_tilde / (ctx.r * ctx.r);
  return sol;
}

double structure_spacing(double omega, double scan_speed) {
  if (!(omega > 0.0)) throw ValidationError("omega must be positive");
  if (!(scan_speed > 0.0)) throw ValidationError("scan speed must be positive");
  return 2.0 * std::numbers::pi * scan_speed / omega;
}

StaticInversion invert_static(const Estimate& t2, double h_ref, double tolerance) {
  StaticInversion out;
  out.energy.value = energy_from_revival(t2.value);
  out.energy.uncertainty = 0.5 * out.energy.value * std::abs(t2.uncertainty) / t2.value;
  out.height.value = height_from_energy(out.energy.value, h_ref, tolerance);
  out.height.uncertainty = out.energy.uncertainty;
  return out;
}

InversionResult invert_dynamic(const Estimate& t2_static, const Estimate& t2_modulated,
                               const ModulationContext& ctx, std::optional<double> amplitude) {
  const double ts = t2_static.value;
  const double tm = t2_modulated.value;
  InversionResult out;
  const double a = amplitude_from_times(ts, tm, ctx);
  out.amplitude.value = a;
  if (a > 0.0) {
    // da/dTm = -a / (2 (Ts - Tm)), da/dTs = a Tm / (2 Ts (Ts - Tm)).
    const double d_tm = -a / (2.0 * (ts - tm));
    const double d_ts = a * tm / (2.0 * ts * (ts - tm));
    out.amplitude.uncertainty =
        std::hypot(d_tm * t2_modulated.uncertainty, d_ts * t2_static.uncertainty);
  } else {
    out.amplitude.uncertainty = std::numeric_limits<double>::quiet_NaN();
  }
  if (a == 0.0 && !amplitude) {
    // Unmodulated: no frequency information in the times.
    out.omega = {0.0, std::numeric_limits<double>::quiet_NaN()};
    return out;
  }
  const double a_used = amplitude.value_or(a);
  const FrequencySolution sol = frequency_from_times(ts, tm, a_used, ctx);
  out.alpha_t = sol.alpha_t;
  out.roots_found = sol.roots;
  out.residuals = sol.residuals;
  out.omega.value = sol.omega;

  auto omega_at = [&](double s, double m) {
    try {
      return frequency_from_times(s, m, a_used, ctx).omega;
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  const double hs = 1e-7 * ts;
  const double hm = std::min(1e-7 * tm, 0.25 * (ts - tm));
  const double dws = (omega_at(ts + hs, tm) - omega_at(ts - hs, tm)) / (2.0 * hs);
  const double dwm = (omega_at(ts, tm + hm) - omega_at(ts, tm - hm)) / (2.0 * hm);
  out.omega.uncertainty =
      std::hypot(dws * t2_static.uncertainty, dwm * t2_modulated.uncertainty);
  return out;
}

}  // namespace rtm

#include "rtm/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rtm/errors.hpp"

namespace rtm {

namespace {
const double kCbrtHalf = std::cbrt(0.5);
}

Spectrum::Spectrum(std::vector<double> energies) : energies_(std::move(energies)) {
  if (energies_.size() < 4) throw ValidationError("spectrum needs at least 4 levels");
  for (std::size_t i = 0; i < energies_.size(); ++i) {
    if (!(energies_[i] > 0.0)) throw ValidationError("spectrum energies must be positive");
    if (i > 0 && !(energies_[i] > energies_[i - 1])) {
      throw ValidationError("spectrum energies must be strictly increasing");
    }
  }
}

Spectrum Spectrum::triangular_well(int n_max, AiryZeroMode mode) {
  if (n_max < 4) throw ValidationError("n_max must be at least 4");
  std::vector<double> e(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) e[n - 1] = triangular_energy(n, mode);
  return Spectrum(std::move(e));
}

double Spectrum::level(int n) const {
  if (n < 1 || n > n_max()) {
    throw ValidationError("level " + std::to_string(n) + " outside spectrum [1, " +
                          std::to_string(n_max()) + "]");
  }
  return energies_[n - 1];
}

double Spectrum::interpolate(double n) const {
  if (!(n >= 1.0) || !(n <= n_max())) {
    throw ValidationError("quantum number " + std::to_string(n) + " outside spectrum [1, " +
                          std::to_string(n_max()) + "]");
  }
  const double fl = std::floor(n);
  if (fl == n) return energies_[static_cast<std::size_t>(n) - 1];
  // Four-point stencil, shifted inward at the edges.
  int first = static_cast<int>(fl) - 1;
  first = std::clamp(first, 1, n_max() - 3);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const int ni = first + i;
    double w = 1.0;
    for (int k = 0; k < 4; ++k) {
      if (k == i) continue;
      w *= (n - (first + k)) / static_cast<double>(ni - (first + k));
    }
    sum += w * energies_[ni - 1];
  }
  return sum;
}

double triangular_energy(int n, AiryZeroMode mode) { return kCbrtHalf * airy_zero(n, mode); }

double large_n_energy(double n) { return 0.5 * std::cbrt(std::pow(3.0 * std::numbers::pi * n, 2)); }

double energy_derivative(const Spectrum& s, double n0, int order) {
  if (order < 1 || order > 3) throw UnsupportedOrder(order);
  const int reach = order == 3 ? 2 : 1;  // stencil half-width
  if (!(n0 >= 1.0 + reach) || !(n0 <= s.n_max() - reach)) {
    throw ValidationError("n0 = " + std::to_string(n0) + " outside the derivative range [" +
                          std::to_string(1 + reach) + ", " + std::to_string(s.n_max() - reach) +
                          "] for order " + std::to_string(order));
  }
  auto e = [&](double dn) { return s.interpolate(n0 + dn); };
  switch (order) {
    case 1: return 0.5 * (e(1.0) - e(-1.0));
    case 2: return e(1.0) - 2.0 * e(0.0) + e(-1.0);
    default: break;
  }
  return 0.5 * (e(2.0) - 2.0 * e(1.0) + 2.0 * e(-1.0) - e(-2.0));
}

double recurrence_time(const Spectrum& s, double n0, int order) {
  if (order < 1 || order > 3) throw UnsupportedOrder(order);
  double factorial = 1.0;
  for (int k = 2; k <= order; ++k) factorial *= k;
  const double d = energy_derivative(s, n0, order);
  if (d == 0.0) throw SingularityError("vanishing energy derivative at n0");
  return 2.0 * std::numbers::pi / (std::abs(d) / factorial);
}

double classical_period(const Spectrum& s, double n0) { return recurrence_time(s, n0, 1); }

double classical_period_action(const Spectrum& s, double n0, double hbar) {
  // dE/dI from the same lattice expressed in actions I = n hbar.
  (void)energy_derivative(s, n0, 1);
  const double delta_action = 2.0 * hbar;  // I(n0 + 1) - I(n0 - 1)
  const double de_di = (s.interpolate(n0 + 1.0) - s.interpolate(n0 - 1.0)) / delta_action;
  return 2.0 * std::numbers::pi / std::abs(de_di);
}

double revival_time_closed_form(double mean_energy) {
  return 16.0 * mean_energy * mean_energy / std::numbers::pi;
}

double revival_time(const Spectrum& s, double n0, RevivalMethod method) {
  if (method == RevivalMethod::derivative) return recurrence_time(s, n0, 2);
  // same range check as the derivative path
  (void)energy_derivative(s, n0, 2);
  return revival_time_closed_form(s.interpolate(n0));
}

double quantum_number_for_energy(const Spectrum& s, double energy) {
  if (!(energy >= s.level(1)) || !(energy <= s.level(s.n_max()))) {
    throw ValidationError("energy outside the spectrum range");
  }
  const auto levels = s.energies();
  const auto it = std::upper_bound(levels.begin(), levels.end(), energy);
  double lo = static_cast<double>(it - levels.begin());
  double hi = std::min(lo + 1.0, static_cast<double>(s.n_max()));
  for (int i = 0; i < 80 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (s.interpolate(mid) < energy) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace rtm

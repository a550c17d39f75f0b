#include "rtm/airy.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rtm/errors.hpp"

namespace rtm {
namespace {

constexpr double kSeriesLimit = 8.0;
constexpr double kEps = 1e-17;
constexpr double kBesselFrom = 1.0;

AiryValue maclaurin(double x) {
  // Extended precision limits the cancellation between f and g near |x| = 8.
  using real = long double;
  const real xl = x;
  const real x3 = xl * xl * xl;
  // f, g and their derivatives, Ai = c1 f - c2 g.
  real tf = 1.0L, tg = xl, tfp = xl * xl / 2.0L, tgp = 1.0L;
  real f = tf, g = tg, fp = tfp, gp = tgp;
  for (int k = 0; k < 200; ++k) {
    const real k3 = 3.0L * k;
    tf *= x3 / ((k3 + 2.0L) * (k3 + 3.0L));
    tg *= x3 / ((k3 + 3.0L) * (k3 + 4.0L));
    tfp *= x3 / ((k3 + 3.0L) * (k3 + 5.0L));
    tgp *= x3 / ((k3 + 1.0L) * (k3 + 3.0L));
    f += tf;
    g += tg;
    fp += tfp;
    gp += tgp;
    const real scale = fabsl(f) + fabsl(g) + fabsl(fp) + fabsl(gp);
    if (fabsl(tf) + fabsl(tg) + fabsl(tfp) + fabsl(tgp) < 1e-21L * scale) break;
  }
  constexpr real c1 = 0.355028053887817239260063186004L;
  constexpr real c2 = 0.258819403792806798405183560189L;
  return {static_cast<double>(c1 * f - c2 * g), static_cast<double>(c1 * fp - c2 * gp)};
}

// Coefficients u_k, v_k of the large-argument expansions (DLMF 9.7.2).
struct AsymptoticSums {
  double u_even, u_odd, v_even, v_odd;  // alternating sums in 1/zeta
  double u_all, v_all;                  // (-1)^k sums for positive x
};

AsymptoticSums asymptotic_sums(double zeta) {
  AsymptoticSums s{1.0, 0.0, 1.0, 0.0, 1.0, 1.0};
  double u = 1.0;
  double inv_pow = 1.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
    const double v = -(6.0 * k + 1.0) / (6.0 * k - 1.0) * u;
    inv_pow /= zeta;
    const double tu = u * inv_pow;
    const double tv = v * inv_pow;
    const double mag = std::abs(tu) + std::abs(tv);
    if (mag > last) break;  // divergent tail: optimal truncation
    last = mag;
    const double alt = (k % 2 == 0) ? 1.0 : -1.0;
    s.u_all += alt * tu;
    s.v_all += alt * tv;
    // Split into even and odd orders, each with its own alternating sign.
    const double pair_sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      s.u_even += pair_sign * tu;
      s.v_even += pair_sign * tv;
    } else {
      s.u_odd += pair_sign * tu;
      s.v_odd += pair_sign * tv;
    }
    if (mag < kEps) break;
  }
  return s;
}

AiryValue asymptotic(double x) {
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  if (x > 0.0) {
    const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    const AsymptoticSums s = asymptotic_sums(zeta);
    const double e = std::exp(-zeta);
    const double q = std::pow(x, 0.25);
    return {0.5 * inv_sqrt_pi * e / q * s.u_all, -0.5 * inv_sqrt_pi * q * e * s.v_all};
  }
  const double y = -x;
  const double zeta = 2.0 / 3.0 * y * std::sqrt(y);
  const AsymptoticSums s = asymptotic_sums(zeta);
  const double phase = zeta + std::numbers::pi / 4.0;
  const double sn = std::sin(phase);
  const double cs = std::cos(phase);
  const double q = std::pow(y, 0.25);
  const double ai = inv_sqrt_pi / q * (sn * s.u_even - cs * s.u_odd);
  const double aip = -inv_sqrt_pi * q * (cs * s.v_even + sn * s.v_odd);
  return {ai, aip};
}

// For x > 0 the Maclaurin terms cancel down to the decaying tail; the Bessel
// form keeps full relative accuracy there.
AiryValue decaying(double x) {
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  const double c = 1.0 / (std::numbers::pi * std::sqrt(3.0));
  return {c * std::sqrt(x) * std::cyl_bessel_k(1.0 / 3.0, zeta),
          -c * x * std::cyl_bessel_k(2.0 / 3.0, zeta)};
}

}  // namespace

AiryValue airy(double x) {
  if (x > kBesselFrom) return decaying(x);
  if (std::abs(x) <= kSeriesLimit) return maclaurin(x);
  return asymptotic(x);
}

double airy_ai(double x) { return airy(x).ai; }
double airy_ai_prime(double x) { return airy(x).ai_prime; }

double airy_zero(int n, AiryZeroMode mode) {
  if (n < 1) throw ValidationError("Airy zero index must be >= 1, got " + std::to_string(n));

  const double zeta = 1.5 * std::numbers::pi * (n - 0.25);
  const double z2 = zeta * zeta;
  const double seed = std::cbrt(z2) * (1.0 + 5.0 / (48.0 * z2) - 5.0 / (36.0 * z2 * z2));
  if (mode == AiryZeroMode::asymptotic) return seed;

  // Neighbouring zeros are separated by at least ~pi / sqrt(z_n); a bracket of
  // a quarter of that around the seed holds exactly one sign change.
  const double half = 0.25 * std::numbers::pi / std::sqrt(seed);
  double lo = seed - half;
  double hi = seed + half;
  double f_lo = airy_ai(-lo);
  double f_hi = airy_ai(-hi);
  if (f_lo * f_hi > 0.0) {
    throw NumericalError("failed to bracket Airy zero n=" + std::to_string(n));
  }
  for (int it = 0; it < 40 && hi - lo > 1e-6; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = airy_ai(-mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  // d/dz Ai(-z) = -Ai'(-z)
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    const AiryValue a = airy(-z);
    const double step = a.ai / a.ai_prime;
    z += step;
    if (std::abs(step) < 1e-15 * z) break;
  }
  return z;
}

}  // namespace rtm

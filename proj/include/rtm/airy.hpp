#pragma once

namespace rtm {

/// Ai(x). Maclaurin series for |x| <= 8, asymptotic expansions beyond.
double airy_ai(double x);
/// Ai'(x), same regime split as airy_ai.
double airy_ai_prime(double x);

struct AiryValue {
  double ai;
  double ai_prime;
};
AiryValue airy(double x);

enum class AiryZeroMode { exact, asymptotic };

/// Magnitude z_n of the n-th negative zero of Ai, so Ai(-z_n) = 0.
/// Exact mode: bisection seeded by the asymptotic formula, polished by Newton.
/// Asymptotic mode: f(zeta) = zeta^(2/3) (1 + 5/(48 zeta^2) - 5/(36 zeta^4))
/// with zeta = 3 pi (n - 1/4) / 2.
double airy_zero(int n, AiryZeroMode mode = AiryZeroMode::exact);

}  // namespace rtm

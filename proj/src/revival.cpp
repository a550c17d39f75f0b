#include "rtm/revival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rtm/errors.hpp"

namespace rtm {

namespace {

/// Vertex offset (in samples, within [-1, 1]) of the parabola through
/// (-1, a), (0, b), (1, c).
double parabolic_offset(double a, double b, double c) {
  const double denom = a - 2.0 * b + c;
  if (denom >= 0.0) return 0.0;
  return std::clamp(0.5 * (a - c) / denom, -1.0, 1.0);
}

double parabolic_height(double a, double b, double c, double offset) {
  return b - 0.25 * (a - c) * offset;
}

constexpr double kCapFraction = 0.8;

struct ParabolaFit {
  double value, slope, curvature;  // y = value + slope x + curvature x^2, x = t - origin
};

ParabolaFit fit_parabola(const std::vector<double>& t, const std::vector<double>& y,
                         std::size_t first, std::size_t last, double origin) {
  // Normal equations in a unit-free coordinate for conditioning.
  const double span = std::max(t[last] - t[first], 1e-300);
  double s[5] = {0, 0, 0, 0, 0};
  double r[3] = {0, 0, 0};
  for (std::size_t i = first; i <= last; ++i) {
    const double x = (t[i] - origin) / span;
    double xp = 1.0;
    for (int k = 0; k < 5; ++k) {
      s[k] += xp;
      if (k < 3) r[k] += xp * y[i];
      xp *= x;
    }
  }
  if (last - first < 2) return {y[first], 0.0, 0.0};
  double a[3][4] = {{s[0], s[1], s[2], r[0]}, {s[1], s[2], s[3], r[1]}, {s[2], s[3], s[4], r[2]}};
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double f = a[j][i] / a[i][i];
      for (int k = i; k < 4; ++k) a[j][k] -= f * a[i][k];
    }
  }
  const double c2 = a[2][3] / a[2][2];
  const double c1 = (a[1][3] - a[1][2] * c2) / a[1][1];
  const double c0 = (a[0][3] - a[0][2] * c2 - a[0][1] * c1) / a[0][0];
  return {c0, c1 / span, c2 / (span * span)};
}

double sample_spacing(const AutocorrSignal& s) {
  if (s.size() < 3) throw InsufficientSignal("signal has fewer than 3 samples");
  return (s.times.back() - s.times.front()) / static_cast<double>(s.size() - 1);
}

}  // namespace

PeriodDetection detect_classical_period(const AutocorrSignal& signal, const PeriodOptions& opt) {
  const auto& m = signal.magnitude2;
  const std::size_t n = m.size();
  if (n < 3) throw InsufficientSignal("signal has fewer than 3 samples");
  const double dt = sample_spacing(signal);

  // Skip the lobe around t = 0.
  std::size_t start = 0;
  while (start < n && m[start] >= 0.5 * m[0]) ++start;
  if (start >= n) throw InsufficientSignal("signal never leaves the initial peak");

  double reference = 0.0;
  for (std::size_t i = start; i < n; ++i) reference = std::max(reference, m[i]);
  const double enter = opt.threshold_frac * reference;
  const double leave = opt.hysteresis * enter;

  PeriodDetection out;
  bool in_run = false;
  std::size_t run_begin = 0, best = 0;
  for (std::size_t i = start; i < n; ++i) {
    if (!in_run) {
      if (m[i] > enter) {
        in_run = true;
        run_begin = i;
        best = i;
      }
      continue;
    }
    if (m[i] > m[best]) best = i;
    if (m[i] < leave) {
      in_run = false;
      if (best == 0 || best + 1 >= n) continue;
      const double off = parabolic_offset(m[best - 1], m[best], m[best + 1]);
      const Peak peak{signal.times[best] + off * dt,
                      parabolic_height(m[best - 1], m[best], m[best + 1], off),
                      static_cast<double>(i - run_begin) * dt};
      // Early recurrences only: a gap means the train collapsed and what follows
      // belongs to a later revival.
      if (out.peaks.size() >= 2 &&
          peak.time - out.peaks.back().time > 1.5 * (out.peaks[1].time - out.peaks[0].time)) {
        break;
      }
      out.peaks.push_back(peak);
      if (static_cast<int>(out.peaks.size()) >= opt.max_peaks) break;
    }
  }
  if (out.peaks.size() < 3) {
    throw InsufficientSignal("found " + std::to_string(out.peaks.size()) +
                             " dominant recurrence peaks, need at least 3");
  }
  const std::size_t k = out.peaks.size() - 1;
  std::vector<double> spacing(k);
  for (std::size_t i = 0; i < k; ++i) spacing[i] = out.peaks[i + 1].time - out.peaks[i].time;
  double mean = 0.0;
  for (double s : spacing) mean += s;
  mean /= static_cast<double>(k);
  double var = 0.0;
  for (double s : spacing) var += (s - mean) * (s - mean);
  var = k > 1 ? var / static_cast<double>(k - 1) : 0.0;
  out.period = {mean, std::sqrt(var / static_cast<double>(k))};
  return out;
}

std::vector<double> moving_maximum(const std::vector<double>& values, std::size_t width_samples) {
  const std::size_t n = values.size();
  std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
  if (width_samples % 2 == 0) ++width_samples;
  const std::size_t half = width_samples / 2;
  if (n < width_samples) return out;
  // Monotone deque of candidate indices.
  std::vector<std::size_t> dq(n);
  std::size_t head = 0, tail = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (tail > head && values[dq[tail - 1]] <= values[i]) --tail;
    dq[tail++] = i;
    if (dq[head] + width_samples <= i) ++head;
    if (i + 1 >= width_samples) out[i - half] = values[dq[head]];
  }
  return out;
}

std::vector<double> revival_envelope(const std::vector<double>& values, std::size_t width_samples) {
  std::vector<double> upper = moving_maximum(values, width_samples);
  // NaN borders stay NaN through the average.
  return moving_average_envelope(upper, width_samples);
}

std::vector<double> moving_average_envelope(const std::vector<double>& values,
                                            std::size_t width_samples) {
  const std::size_t n = values.size();
  std::vector<double> env(n, std::numeric_limits<double>::quiet_NaN());
  if (width_samples % 2 == 0) ++width_samples;
  const std::size_t half = width_samples / 2;
  if (n < width_samples) return env;
  std::vector<double> prefix(n + 1, 0.0);
  std::vector<std::size_t> gaps(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool missing = std::isnan(values[i]);
    prefix[i + 1] = prefix[i] + (missing ? 0.0 : values[i]);
    gaps[i + 1] = gaps[i] + (missing ? 1 : 0);
  }
  for (std::size_t i = half; i + half < n; ++i) {
    if (gaps[i + half + 1] != gaps[i - half]) continue;
    env[i] = (prefix[i + half + 1] - prefix[i - half]) / static_cast<double>(width_samples);
  }
  return env;
}

RevivalDetection detect_revival(const AutocorrSignal& signal, double predicted_t2,
                                const RevivalOptions& opt) {
  if (!(predicted_t2 > 0.0)) throw ValidationError("predicted revival time must be positive");
  if (!(opt.window_frac > 0.0 && opt.window_frac < 1.0)) {
    throw ValidationError("window fraction must lie in (0, 1)");
  }
  const double dt = sample_spacing(signal);
  RevivalDetection out;
  out.window_lo = predicted_t2 * (1.0 - opt.window_frac);
  out.window_hi = predicted_t2 * (1.0 + opt.window_frac);
  out.smoothing_width =
      opt.smoothing_width ? *opt.smoothing_width
                          : detect_classical_period(signal, opt.period).period.value;
  if (!(out.smoothing_width > 0.0)) throw ValidationError("smoothing width must be positive");

  const double half_width = 0.5 * out.smoothing_width;
  if (signal.times.front() > out.window_lo - half_width ||
      signal.times.back() < out.window_hi + half_width) {
    throw ValidationError("signal [" + std::to_string(signal.times.front()) + ", " +
                          std::to_string(signal.times.back()) +
                          "] does not cover the revival window [" + std::to_string(out.window_lo) +
                          ", " + std::to_string(out.window_hi) + "] plus smoothing margin");
  }
  const auto width_samples =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(out.smoothing_width / dt)));
  const std::vector<double> env = revival_envelope(signal.magnitude2, width_samples);

  const double t0 = signal.times.front();
  const auto lo = static_cast<std::size_t>(std::ceil((out.window_lo - t0) / dt));
  const auto hi = std::min(signal.size() - 1,
                           static_cast<std::size_t>(std::floor((out.window_hi - t0) / dt)));
  std::size_t best = lo;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (std::isnan(env[i])) continue;
    if (std::isnan(env[best]) || env[i] > env[best]) best = i;
  }
  const std::size_t step = std::max<std::size_t>(1, width_samples);
  if (best < lo + step || best + step > hi) {
    throw NumericalError("revival envelope maximum sits at the edge of the search window [" +
                         std::to_string(out.window_lo) + ", " + std::to_string(out.window_hi) +
                         "]; the prediction or window fraction is off");
  }
  // Least-squares parabola over the envelope cap above 80% of the maximum.
  // The envelope is piecewise linear between recurrence peaks, so a
  // three-sample vertex would jitter by whole classical periods.
  const double cap = kCapFraction * env[best];
  std::size_t left_i = best, right_i = best;
  while (left_i > 0 && !std::isnan(env[left_i - 1]) && env[left_i - 1] > cap) --left_i;
  while (right_i + 1 < env.size() && !std::isnan(env[right_i + 1]) && env[right_i + 1] > cap) {
    ++right_i;
  }
  const ParabolaFit fit = fit_parabola(signal.times, env, left_i, right_i, signal.times[best]);
  double peak_time = signal.times[best];
  out.envelope_peak = env[best];
  if (fit.curvature < 0.0) {
    const double vertex = -fit.slope / (2.0 * fit.curvature);
    const double t_vertex = signal.times[best] + vertex;
    if (t_vertex >= signal.times[left_i] && t_vertex <= signal.times[right_i]) {
      peak_time = t_vertex;
      out.envelope_peak = fit.value + fit.slope * vertex + fit.curvature * vertex * vertex;
    }
  }

  const double level = 0.95 * out.envelope_peak;
  auto crossing = [&](std::size_t i, std::size_t j) {
    // level lies between env[i] and env[j]
    const double f = (env[i] - level) / (env[i] - env[j]);
    return signal.times[i] + f * (signal.times[j] - signal.times[i]);
  };
  double left = signal.times[lo];
  for (std::size_t i = best; i > lo; --i) {
    if (env[i - 1] < level) {
      left = crossing(i, i - 1);
      break;
    }
  }
  double right = signal.times[hi];
  for (std::size_t i = best; i < hi; ++i) {
    if (env[i + 1] < level) {
      right = crossing(i, i + 1);
      break;
    }
  }
  out.revival = {peak_time, 0.5 * (right - left)};
  return out;
}

RevivalReport analyze_revivals(const AutocorrSignal& signal, double predicted_t2,
                               const RevivalOptions& options) {
  RevivalReport report;
  const PeriodDetection period = detect_classical_period(signal, options.period);
  RevivalOptions opt = options;
  if (!opt.smoothing_width) opt.smoothing_width = period.period.value;
  const RevivalDetection rev = detect_revival(signal, predicted_t2, opt);
  report.classical_period = period.period;
  report.peaks = period.peaks;
  report.revival_time = rev.revival;
  report.window_lo = rev.window_lo;
  report.window_hi = rev.window_hi;
  return report;
}

}  // namespace rtm

#pragma once

#include <optional>
#include <vector>

#include "rtm/wavepacket.hpp"

namespace rtm {

struct Estimate {
  double value = 0.0;
  double uncertainty = 0.0;
};

struct Peak {
  double time = 0.0;
  double height = 0.0;
  double width = 0.0;  // time spent above the detection threshold
};

struct PeriodOptions {
  int max_peaks = 8;            // K, the number of early peaks averaged
  double threshold_frac = 0.5;  // of the tallest peak after the t = 0 lobe
  double hysteresis = 0.8;      // a run ends below hysteresis * threshold
};

struct PeriodDetection {
  Estimate period;
  std::vector<Peak> peaks;
};

/// Mean spacing of the first K dominant peaks of |C|^2, each refined by a
/// three-point parabola; uncertainty is the standard error of the spacings.
/// Throws InsufficientSignal with fewer than 3 peaks.
PeriodDetection detect_classical_period(const AutocorrSignal& signal,
                                        const PeriodOptions& options = {});

struct RevivalOptions {
  double window_frac = 0.3;
  /// Moving-average width; defaults to the classical period detected on the signal.
  std::optional<double> smoothing_width;
  PeriodOptions period;
};

struct RevivalDetection {
  Estimate revival;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double smoothing_width = 0.0;
  double envelope_peak = 0.0;
};

/// Revival envelope maximized inside predicted_t2 * [1 - f, 1 + f] and refined
/// by a least-squares parabola over the envelope cap above 80% of its maximum.
/// Uncertainty is the half-width of the region where the envelope exceeds 95%
/// of its peak.
RevivalDetection detect_revival(const AutocorrSignal& signal, double predicted_t2,
                                const RevivalOptions& options = {});

/// Upper envelope of |C|^2: running maximum over one classical period, then a
/// moving average of the same width. A plain moving average of |C|^2 over a
/// period is flat through collapse and revival alike, so the maximum comes first.
std::vector<double> revival_envelope(const std::vector<double>& values, std::size_t width_samples);

/// Centered running maximum; entries without a full window are NaN.
std::vector<double> moving_maximum(const std::vector<double>& values, std::size_t width_samples);

/// Centered moving average of |C|^2 over `width_samples` (odd) samples.
/// Entries without a full window are NaN.
std::vector<double> moving_average_envelope(const std::vector<double>& values,
                                            std::size_t width_samples);

struct RevivalReport {
  Estimate classical_period;
  Estimate revival_time;
  std::vector<Peak> peaks;
  double window_lo = 0.0;
  double window_hi = 0.0;
};

RevivalReport analyze_revivals(const AutocorrSignal& signal, double predicted_t2,
                               const RevivalOptions& options = {});

}  // namespace rtm

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "rtm/spectrum.hpp"

namespace rtm {

using cplx = std::complex<double>;

/// Uniform periodic grid z_i = z_min + i dz, dz = (z_max - z_min) / size.
struct Grid {
  double z_min = 0.0;
  double z_max = 1.0;
  std::size_t size = 0;

  double dz() const noexcept { return (z_max - z_min) / static_cast<double>(size); }
  double z(std::size_t i) const noexcept { return z_min + static_cast<double>(i) * dz(); }
  /// Throws unless size is a power of two and z_max > z_min.
  void validate() const;
};

class GridWavepacket {
 public:
  GridWavepacket(Grid grid, std::vector<cplx> amplitudes);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const cplx> amplitudes() const noexcept { return amplitudes_; }
  std::span<cplx> amplitudes() noexcept { return amplitudes_; }

  double norm() const;
  double mean_position() const;
  double position_variance() const;
  /// max(|psi| at the two end points) / max |psi|.
  double boundary_ratio() const;
  /// <p^2>/2 by central differences (scaled units).
  double kinetic_energy() const;

 private:
  Grid grid_;
  std::vector<cplx> amplitudes_;
};

/// Normalized Gaussian with position standard deviation `width` centred at z0.
GridWavepacket make_gaussian(double z0, double width, double mean_momentum, const Grid& grid);

/// Triangular-well eigenfunction Ai(2^(1/3) z - z_n), zero for z < 0, normalized on `grid`.
std::vector<double> eigenfunction(int n, const Spectrum& spectrum, const Grid& grid);

struct EigenCoefficients {
  std::vector<cplx> c;  // index n - 1, aligned with the spectrum
  int first_level = 1;  // projection window, inclusive
  int last_level = 1;
  double n0_mean = 0.0;
  double width = 0.0;         // standard deviation of n under |c_n|^2
  double captured_weight = 0.0;  // sum |c_n|^2 before renormalization

  double weight_sum() const;
};

/// c_n = <phi_n|psi> over the window [n0 - 8 dn, n0 + 8 dn]. Throws NumericalError
/// if the spectrum misses more than 1e-6 of the weight.
EigenCoefficients project(const GridWavepacket& packet, const Spectrum& spectrum);

/// psi(z) = sum_n c_n phi_n(z).
GridWavepacket synthesize(const EigenCoefficients& coeffs, const Spectrum& spectrum,
                          const Grid& grid);

struct AutocorrSignal {
  std::vector<double> times;
  std::vector<cplx> values;
  std::vector<double> magnitude2;

  std::size_t size() const noexcept { return times.size(); }
  /// Builds values and magnitude2 consistently.
  void push(double t, cplx c);
};

/// C(t) = sum_n |c_n|^2 exp(-i E_n t); times non-negative and sorted.
AutocorrSignal analytic_autocorrelation(const EigenCoefficients& coeffs, const Spectrum& spectrum,
                                        std::span<const double> times);

/// t_k = k dt for k = 0..floor(t_end / dt).
std::vector<double> uniform_times(double t_end, double dt);

}  // namespace rtm

#include "rtm/wavepacket.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "rtm/errors.hpp"

namespace rtm {

namespace {
const double kGravityWavevector = std::cbrt(2.0);
constexpr double kAiryCutoff = 60.0;  // Ai(x) < 1e-130 beyond
}  // namespace

void Grid::validate() const {
  if (size < 4 || !std::has_single_bit(size)) {
    throw ValidationError("grid size must be a power of two >= 4, got " + std::to_string(size));
  }
  if (!(z_max > z_min)) throw ValidationError("grid requires z_max > z_min");
}

GridWavepacket::GridWavepacket(Grid grid, std::vector<cplx> amplitudes)
    : grid_(grid), amplitudes_(std::move(amplitudes)) {
  grid_.validate();
  if (amplitudes_.size() != grid_.size) {
    throw ValidationError("amplitude count does not match grid size");
  }
}

double GridWavepacket::norm() const {
  double s = 0.0;
  for (const cplx& a : amplitudes_) s += std::norm(a);
  return s * grid_.dz();
}

double GridWavepacket::mean_position() const {
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    const double p = std::norm(amplitudes_[i]);
    s += p * grid_.z(i);
    w += p;
  }
  return s / w;
}

double GridWavepacket::position_variance() const {
  const double mean = mean_position();
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    const double p = std::norm(amplitudes_[i]);
    const double d = grid_.z(i) - mean;
    s += p * d * d;
    w += p;
  }
  return s / w;
}

double GridWavepacket::boundary_ratio() const {
  double peak = 0.0;
  for (const cplx& a : amplitudes_) peak = std::max(peak, std::abs(a));
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(amplitudes_.front()), std::abs(amplitudes_.back())) / peak;
}

double GridWavepacket::kinetic_energy() const {
  const std::size_t n = amplitudes_.size();
  const double dz = grid_.dz();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx d = (amplitudes_[(i + 1) % n] - amplitudes_[(i + n - 1) % n]) / (2.0 * dz);
    s += std::norm(d);
  }
  return 0.5 * s * dz / norm();
}

GridWavepacket make_gaussian(double z0, double width, double mean_momentum, const Grid& grid) {
  grid.validate();
  if (!(width > 0.0)) throw ValidationError("packet width must be positive");
  if (!(z0 - 4.0 * width > 0.0)) {
    throw ValidationError("packet centre z0 must clear the mirror by 4 widths (z0 - 4 dz > 0)");
  }
  if (grid.z_min > 0.0 || grid.z_max < 2.5 * z0) {
    throw ValidationError("grid [" + std::to_string(grid.z_min) + ", " +
                          std::to_string(grid.z_max) + "] must span at least [0, " +
                          std::to_string(2.5 * z0) + "]");
  }
  std::vector<cplx> psi(grid.size);
  const double inv4s2 = 1.0 / (4.0 * width * width);
  for (std::size_t i = 0; i < grid.size; ++i) {
    const double z = grid.z(i);
    const double d = z - z0;
    psi[i] = std::polar(std::exp(-d * d * inv4s2), mean_momentum * z);
  }
  double s = 0.0;
  for (const cplx& a : psi) s += std::norm(a);
  const double scale = 1.0 / std::sqrt(s * grid.dz());
  for (cplx& a : psi) a *= scale;
  return GridWavepacket(grid, std::move(psi));
}

std::vector<double> eigenfunction(int n, const Spectrum& spectrum, const Grid& grid) {
  const double zn = spectrum.level(n) * kGravityWavevector;
  std::vector<double> phi(grid.size, 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size; ++i) {
    const double z = grid.z(i);
    if (z < 0.0) continue;
    const double x = kGravityWavevector * z - zn;
    if (x > kAiryCutoff) break;
    phi[i] = airy_ai(x);
    s += phi[i] * phi[i];
  }
  const double inv = 1.0 / std::sqrt(s * grid.dz());
  for (double& v : phi) v *= inv;
  return phi;
}

double EigenCoefficients::weight_sum() const {
  double s = 0.0;
  for (const cplx& a : c) s += std::norm(a);
  return s;
}

namespace {

void fill_statistics(EigenCoefficients& ec) {
  double w = 0.0, m = 0.0;
  for (int n = ec.first_level; n <= ec.last_level; ++n) {
    const double p = std::norm(ec.c[n - 1]);
    w += p;
    m += p * n;
  }
  m /= w;
  double v = 0.0;
  for (int n = ec.first_level; n <= ec.last_level; ++n) {
    const double d = n - m;
    v += std::norm(ec.c[n - 1]) * d * d;
  }
  ec.n0_mean = m;
  ec.width = std::sqrt(v / w);
}

void project_range(const GridWavepacket& packet, const Spectrum& spectrum, int first, int last,
                   EigenCoefficients& ec) {
  const Grid& g = packet.grid();
  const auto psi = packet.amplitudes();
  for (int n = first; n <= last; ++n) {
    if (n >= ec.first_level && n <= ec.last_level && ec.c[n - 1] != cplx{}) continue;
    const std::vector<double> phi = eigenfunction(n, spectrum, g);
    cplx acc{};
    for (std::size_t i = 0; i < g.size; ++i) acc += phi[i] * psi[i];
    ec.c[n - 1] = acc * g.dz();
  }
}

}  // namespace

EigenCoefficients project(const GridWavepacket& packet, const Spectrum& spectrum) {
  const Grid& g = packet.grid();
  // Window seed from the packet's energy moments in the triangular well.
  double potential = 0.0, potential2 = 0.0, w = 0.0;
  const auto psi = packet.amplitudes();
  for (std::size_t i = 0; i < g.size; ++i) {
    const double p = std::norm(psi[i]);
    const double z = std::max(g.z(i), 0.0);
    potential += p * z;
    potential2 += p * z * z;
    w += p;
  }
  potential /= w;
  potential2 /= w;
  const double kinetic = packet.kinetic_energy();
  const double e_mean = potential + kinetic;
  const double sigma_e =
      std::sqrt(std::max(potential2 - potential * potential, 0.0) + 2.0 * kinetic * kinetic);
  if (e_mean >= spectrum.level(spectrum.n_max())) {
    throw NumericalError("packet mean energy " + std::to_string(e_mean) +
                         " exceeds the top of the spectrum (n_max = " +
                         std::to_string(spectrum.n_max()) + ")");
  }
  const double n_center =
      e_mean <= spectrum.level(1) ? 1.0 : quantum_number_for_energy(spectrum, e_mean);
  const double spacing = n_center >= 2.0 && n_center <= spectrum.n_max() - 1
                             ? energy_derivative(spectrum, std::clamp(n_center, 2.0, spectrum.n_max() - 1.0), 1)
                             : spectrum.level(2) - spectrum.level(1);
  const double half = std::max(8.0 * sigma_e / spacing + 2.0, 4.0);

  EigenCoefficients ec;
  ec.c.assign(static_cast<std::size_t>(spectrum.n_max()), cplx{});
  int first = std::max(1, static_cast<int>(std::floor(n_center - half)));
  int last = std::min(spectrum.n_max(), static_cast<int>(std::ceil(n_center + half)));
  ec.first_level = first;
  ec.last_level = first - 1;
  for (int attempt = 0; attempt < 6; ++attempt) {
    project_range(packet, spectrum, first, last, ec);
    ec.first_level = std::min(ec.first_level, first);
    ec.last_level = std::max(ec.last_level, last);
    fill_statistics(ec);
    const int want_first = std::max(1, static_cast<int>(std::floor(ec.n0_mean - 8.0 * ec.width)));
    const int want_last =
        std::min(spectrum.n_max(), static_cast<int>(std::ceil(ec.n0_mean + 8.0 * ec.width)));
    if (want_first >= ec.first_level && want_last <= ec.last_level) break;
    first = std::min(want_first, ec.first_level);
    last = std::max(want_last, ec.last_level);
  }

  ec.captured_weight = ec.weight_sum();
  const double deficit = packet.norm() - ec.captured_weight;
  if (deficit > 1e-6) {
    throw NumericalError("eigenbasis misses weight " + std::to_string(deficit) +
                         " of the packet; increase n_max (currently " +
                         std::to_string(spectrum.n_max()) + ")");
  }
  const double scale = 1.0 / std::sqrt(ec.captured_weight);
  for (cplx& a : ec.c) a *= scale;
  fill_statistics(ec);
  return ec;
}

GridWavepacket synthesize(const EigenCoefficients& coeffs, const Spectrum& spectrum,
                          const Grid& grid) {
  std::vector<cplx> psi(grid.size, cplx{});
  for (int n = coeffs.first_level; n <= coeffs.last_level; ++n) {
    const cplx c = coeffs.c[n - 1];
    if (c == cplx{}) continue;
    const std::vector<double> phi = eigenfunction(n, spectrum, grid);
    for (std::size_t i = 0; i < grid.size; ++i) psi[i] += c * phi[i];
  }
  return GridWavepacket(grid, std::move(psi));
}

void AutocorrSignal::push(double t, cplx c) {
  times.push_back(t);
  values.push_back(c);
  magnitude2.push_back(std::norm(c));
}

AutocorrSignal analytic_autocorrelation(const EigenCoefficients& coeffs, const Spectrum& spectrum,
                                        std::span<const double> times) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || (k > 0 && times[k] < times[k - 1])) {
      throw ValidationError("autocorrelation times must be non-negative and sorted");
    }
  }
  std::vector<double> weight;
  std::vector<double> energy;
  for (int n = coeffs.first_level; n <= coeffs.last_level; ++n) {
    const double p = std::norm(coeffs.c[n - 1]);
    if (p == 0.0) continue;
    weight.push_back(p);
    energy.push_back(spectrum.level(n));
  }
  AutocorrSignal out;
  out.times.reserve(times.size());
  out.values.reserve(times.size());
  out.magnitude2.reserve(times.size());
  for (const double t : times) {
    cplx acc{};
    for (std::size_t k = 0; k < weight.size(); ++k) acc += std::polar(weight[k], -energy[k] * t);
    out.push(t, acc);
  }
  return out;
}

std::vector<double> uniform_times(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw ValidationError("need dt > 0 and t_end >= 0");
  const auto count = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9)) + 1;
  std::vector<double> t(count);
  for (std::size_t k = 0; k < count; ++k) t[k] = static_cast<double>(k) * dt;
  return t;
}

}  // namespace rtm

#include "rtm/propagator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <string>

#include "rtm/errors.hpp"

namespace rtm {

// ---------------------------------------------------------------------------
// PotentialModel

void PotentialModel::validate() const {
  if (!(v0 > 0.0)) throw ValidationError("mirror strength V0 must be positive");
  if (!(kappa > 0.0)) throw ValidationError("mirror decay kappa must be positive");
  if (!(amplitude >= 0.0)) throw ValidationError("modulation amplitude must be non-negative");
  if (!(frequency >= 0.0)) throw ValidationError("modulation frequency must be non-negative");
  if (!(amplitude * kappa < 5.0)) {
    throw ValidationError("modulation too deep: a * kappa = " + std::to_string(amplitude * kappa) +
                          " must stay below 5");
  }
}

double PotentialModel::mirror_factor(double t) const {
  if (amplitude == 0.0) return 1.0;
  return std::exp(kappa * amplitude * std::sin(frequency * t));
}

double PotentialModel::value(double z, double t) const {
  return z + v0 * std::exp(-kappa * z) * mirror_factor(t);
}

double PotentialModel::lower_turning_point(double e) const {
  // z + V0 exp(-kappa z) is decreasing below its minimum at ln(V0 kappa) / kappa.
  const double z_star = std::log(v0 * kappa) / kappa;
  auto f = [&](double z) { return z + v0 * std::exp(-kappa * z) - e; };
  if (f(z_star) >= 0.0) {
    throw ValidationError("energy " + std::to_string(e) + " is below the cavity minimum");
  }
  double lo = z_star - 1.0 / kappa;
  while (f(lo) < 0.0) lo -= (z_star - lo);
  double hi = z_star;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double semiclassical_period(const PotentialModel& potential, double e) {
  potential.validate();
  const double z1 = potential.lower_turning_point(e);
  // Upper turning point: the mirror term is tiny there, so a few fixed-point
  // iterations of z = e - V0 exp(-kappa z) converge.
  double z2 = e;
  for (int i = 0; i < 50; ++i) z2 = e - potential.v0 * std::exp(-potential.kappa * z2);
  if (!(z2 > z1)) throw ValidationError("no classical orbit at energy " + std::to_string(e));
  // z = c - h cos(theta) removes both inverse square-root end singularities.
  const double c = 0.5 * (z1 + z2);
  const double h = 0.5 * (z2 - z1);
  constexpr int kNodes = 20000;
  const double dtheta = std::numbers::pi / kNodes;
  double sum = 0.0;
  for (int k = 0; k < kNodes; ++k) {
    const double theta = (k + 0.5) * dtheta;
    const double z = c - h * std::cos(theta);
    const double kinetic = e - potential.value(z, 0.0);
    if (kinetic > 0.0) sum += h * std::sin(theta) / std::sqrt(2.0 * kinetic);
  }
  return 2.0 * sum * dtheta;
}

double semiclassical_revival_time(const PotentialModel& potential, double e) {
  const double de = 1e-3 * e;
  const double t = semiclassical_period(potential, e);
  const double slope =
      (semiclassical_period(potential, e + de) - semiclassical_period(potential, e - de)) /
      (2.0 * de);
  if (!(std::abs(slope) > 0.0)) throw NumericalError("flat classical period: no revival");
  return t * t * t / (std::numbers::pi * std::abs(slope));
}

// ---------------------------------------------------------------------------
// SplitStepPropagator

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

// Plain complex product; std::complex operator* goes through the
// NaN-recovering __muldc3 path and dominates the step cost.
inline void multiply_in_place(cplx* data, const cplx* factor, std::size_t n) {
  auto* d = reinterpret_cast<double*>(data);
  const auto* f = reinterpret_cast<const double*>(factor);
  for (std::size_t i = 0; i < n; ++i) {
    const double re = d[2 * i] * f[2 * i] - d[2 * i + 1] * f[2 * i + 1];
    const double im = d[2 * i] * f[2 * i + 1] + d[2 * i + 1] * f[2 * i];
    d[2 * i] = re;
    d[2 * i + 1] = im;
  }
}

}  // namespace

struct SplitStepPropagator::Impl {
  Grid grid;
  PotentialModel potential;
  std::vector<double> z;
  std::vector<double> mirror;       // V0 exp(-kappa z)
  std::vector<double> kinetic;      // k^2 / 2
  // Potential ceiling: the largest kinetic energy the grid resolves. Deep
  // under the mirror V0 exp(-kappa z) is far above it, and there the kick
  // phase varies faster than the grid can follow and sprays aliased noise.
  double v_cap = 0.0;
  std::vector<cplx> kinetic_phase;  // exp(-i k^2 dt / 2) / N
  double kinetic_dt = std::numeric_limits<double>::quiet_NaN();
  std::vector<cplx> half_kick;      // exp(-i V dt / 2)
  double kick_dt = std::numeric_limits<double>::quiet_NaN();
  mutable std::vector<cplx> scratch;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  Impl(const Grid& g, const PotentialModel& p) : grid(g), potential(p) {
    grid.validate();
    potential.validate();
    const std::size_t n = grid.size;
    z.resize(n);
    mirror.resize(n);
    kinetic.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = grid.z(i);
      mirror[i] = potential.v0 * std::exp(-potential.kappa * z[i]);
      const auto m = static_cast<std::int64_t>(i) - (i < n / 2 ? 0 : static_cast<std::int64_t>(n));
      const double k = 2.0 * std::numbers::pi * static_cast<double>(m) / (grid.z_max - grid.z_min);
      kinetic[i] = 0.5 * k * k;
    }
    const double k_max = std::numbers::pi / grid.dz();
    v_cap = 0.5 * k_max * k_max;
    scratch.resize(n);
    std::lock_guard lock(planner_mutex());
    const int len = static_cast<int>(n);
    // FFTW_MEASURE scribbles over scratch; nothing lives there yet.
    forward = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD,
                               FFTW_MEASURE | FFTW_UNALIGNED);
    backward = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()),
                                FFTW_BACKWARD, FFTW_MEASURE | FFTW_UNALIGNED);
    if (!forward || !backward) throw NumericalError("FFTW planning failed");
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  void prepare_kinetic(double dt) {
    if (dt == kinetic_dt) return;
    const double inv_n = 1.0 / static_cast<double>(grid.size);
    kinetic_phase.resize(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) {
      kinetic_phase[i] = std::polar(inv_n, -kinetic[i] * dt);
    }
    kinetic_dt = dt;
  }

  // Static and modulated paths share this evaluation so a = 0 reproduces the
  // static phases bit for bit.
  void fill_half_kick(double t_mid, double dt) {
    const double factor = potential.mirror_factor(t_mid);
    half_kick.resize(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) {
      const double v = std::min(z[i] + mirror[i] * factor, v_cap);
      half_kick[i] = std::polar(1.0, -0.5 * v * dt);
    }
  }

  void advance(std::span<cplx> psi, double t, double dt, std::size_t steps) {
    if (psi.size() != grid.size) throw ValidationError("state size does not match the grid");
    prepare_kinetic(dt);
    const bool modulated = potential.modulated();
    if (!modulated && kick_dt != dt) {
      fill_half_kick(0.0, dt);
      kick_dt = dt;
    }
    const std::size_t n = grid.size;
    cplx* data = psi.data();
    for (std::size_t s = 0; s < steps; ++s) {
      if (modulated) {
        fill_half_kick(t + (static_cast<double>(s) + 0.5) * dt, dt);
        kick_dt = std::numeric_limits<double>::quiet_NaN();
      }
      multiply_in_place(data, half_kick.data(), n);
      fftw_execute_dft(forward, as_fftw(data), as_fftw(data));
      multiply_in_place(data, kinetic_phase.data(), n);
      fftw_execute_dft(backward, as_fftw(data), as_fftw(data));
      multiply_in_place(data, half_kick.data(), n);
    }
  }

  EnergyMoments energy(std::span<const cplx> psi, double t) const {
    const std::size_t n = grid.size;
    std::copy(psi.begin(), psi.end(), scratch.begin());
    fftw_execute_dft(forward, as_fftw(scratch.data()), as_fftw(scratch.data()));
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) scratch[i] *= kinetic[i] * inv_n;
    fftw_execute_dft(backward, as_fftw(scratch.data()), as_fftw(scratch.data()));
    const double factor = potential.mirror_factor(t);
    double norm = 0.0, mean = 0.0, second = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx h_psi = scratch[i] + std::min(z[i] + mirror[i] * factor, v_cap) * psi[i];
      norm += std::norm(psi[i]);
      mean += (std::conj(psi[i]) * h_psi).real();
      second += std::norm(h_psi);
    }
    mean /= norm;
    second /= norm;
    return {mean, std::sqrt(std::max(second - mean * mean, 0.0))};
  }

  double edge_ratio(std::span<const cplx> psi, double k_cut) const {
    const std::size_t n = grid.size;
    std::copy(psi.begin(), psi.end(), scratch.begin());
    fftw_execute_dft(forward, as_fftw(scratch.data()), as_fftw(scratch.data()));
    // Gaussian window: a hard cutoff rings off the wall, which sits close to
    // the lower edge.
    const double e_cut = 0.5 * k_cut * k_cut;
    for (std::size_t i = 0; i < n; ++i) scratch[i] *= std::exp(-kinetic[i] / e_cut);
    fftw_execute_dft(backward, as_fftw(scratch.data()), as_fftw(scratch.data()));
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, std::norm(scratch[i]));
    if (peak == 0.0) return 0.0;
    return std::sqrt(std::max(std::norm(scratch.front()), std::norm(scratch.back())) / peak);
  }
};

SplitStepPropagator::SplitStepPropagator(const Grid& grid, const PotentialModel& potential)
    : impl_(std::make_unique<Impl>(grid, potential)) {}
SplitStepPropagator::~SplitStepPropagator() = default;
SplitStepPropagator::SplitStepPropagator(SplitStepPropagator&&) noexcept = default;
SplitStepPropagator& SplitStepPropagator::operator=(SplitStepPropagator&&) noexcept = default;

const Grid& SplitStepPropagator::grid() const noexcept { return impl_->grid; }
const PotentialModel& SplitStepPropagator::potential() const noexcept { return impl_->potential; }

void SplitStepPropagator::advance(std::span<cplx> psi, double t, double dt, std::size_t steps) {
  impl_->advance(psi, t, dt, steps);
}

EnergyMoments SplitStepPropagator::energy(std::span<const cplx> psi, double t) const {
  return impl_->energy(psi, t);
}

double SplitStepPropagator::edge_ratio(std::span<const cplx> psi, double k_cut) const {
  return impl_->edge_ratio(psi, k_cut);
}

// ---------------------------------------------------------------------------
// evolve

double max_stable_dt(const PotentialModel& potential, const EnergyMoments& e) {
  const double v_max = e.mean + 6.0 * e.spread;
  double dt = 0.02 / v_max;
  if (potential.modulated() && potential.frequency > 0.0) {
    dt = std::min(dt, 0.05 * 2.0 * std::numbers::pi / potential.frequency);
  }
  return dt;
}

void check_grid_headroom(const Grid& grid, const PotentialModel& potential, double e_max) {
  const double lower = potential.lower_turning_point(e_max);
  const double apex = e_max;  // the mirror term is negligible at the apex
  if (grid.z_min > lower - 5.0 / potential.kappa) {
    throw ValidationError("grid z_min = " + std::to_string(grid.z_min) +
                          " leaves less than 5/kappa below the mirror turning point " +
                          std::to_string(lower) + "; need z_min <= " +
                          std::to_string(lower - 5.0 / potential.kappa));
  }
  if (grid.z_max < 1.2 * apex) {
    throw ValidationError("grid z_max = " + std::to_string(grid.z_max) +
                          " leaves less than 20% headroom above the apex " +
                          std::to_string(apex) + "; need z_max >= " + std::to_string(1.2 * apex));
  }
}

Grid default_grid(const PotentialModel& potential, double z0, std::size_t points) {
  potential.validate();
  Grid g{-10.0 / potential.kappa, 2.5 * z0, points};
  const double e_max = z0 + 6.0;  // generous: packets here carry dE ~ 1
  const double lower = potential.lower_turning_point(e_max);
  // Split-step lets a faint tail seep into a steep barrier; two length units
  // of barrier hold it well below the boundary tolerance.
  g.z_min = std::min(g.z_min, lower - std::max(6.0 / potential.kappa, 2.0));
  g.z_max = std::max(g.z_max, 1.25 * e_max);
  // Beyond the point where the mirror reaches the potential cap the barrier
  // is finite; keep enough cells there that nothing tunnels round the
  // periodic box.
  for (int pass = 0; pass < 3; ++pass) {
    const double dz = (g.z_max - g.z_min) / static_cast<double>(points);
    const double v_cap = 0.5 * (std::numbers::pi / dz) * (std::numbers::pi / dz);
    const double z_cap = std::log(potential.v0 / v_cap) / potential.kappa - potential.amplitude;
    g.z_min = std::min(g.z_min, z_cap - 16.0 * dz);
  }
  return g;
}

namespace {

cplx overlap(std::span<const cplx> a, std::span<const cplx> b, double dz) {
  cplx acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc * dz;
}

}  // namespace

EvolutionResult evolve(const GridWavepacket& initial, const PotentialModel& potential,
                       double t_final, double dt, std::size_t sample_stride,
                       const EvolutionOptions& options) {
  potential.validate();
  if (!(t_final >= 0.0)) throw ValidationError("t_final must be non-negative");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (sample_stride == 0) throw ValidationError("sample stride must be positive");

  const Grid& grid = initial.grid();
  SplitStepPropagator prop(grid, potential);
  const EnergyMoments e0 = prop.energy(initial.amplitudes(), 0.0);
  check_grid_headroom(grid, potential, e0.mean + 6.0 * e0.spread);
  const double dt_max = max_stable_dt(potential, e0);
  if (options.enforce_dt_rule && dt > dt_max * (1.0 + 1e-12)) {
    throw ValidationError("dt = " + std::to_string(dt) + " violates the stability rule dt <= " +
                          std::to_string(dt_max));
  }

  const auto total_steps = static_cast<std::size_t>(std::llround(t_final / dt));
  const std::span<const cplx> psi0 = initial.amplitudes();
  std::vector<cplx> psi(psi0.begin(), psi0.end());
  const double dz = grid.dz();
  const double norm0 = initial.norm();

  EvolutionResult out{AutocorrSignal{}, {}, {}, 0.0, 0.0, 0.0, initial};
  out.initial_energy = e0.mean;
  const bool track_energy = options.track_energy && !potential.modulated();
  const double k_cut = 2.0 * std::sqrt(2.0 * (e0.mean + 6.0 * e0.spread));

  auto sample = [&](std::size_t step) {
    const double t = static_cast<double>(step) * dt;
    double norm = 0.0, first = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const double p = std::norm(psi[i]);
      norm += p;
      first += p * grid.z(i);
    }
    const double edge = prop.edge_ratio(psi, k_cut);
    if (edge > options.boundary_tolerance) {
      throw NumericalError("wave packet reached the grid boundary at t = " + std::to_string(t) +
                           " (edge/peak amplitude " + std::to_string(edge) + "); widen the grid");
    }
    out.autocorr.push(t, overlap(psi0, psi, dz));
    out.mean_position.push_back(first / norm);
    out.norm.push_back(norm * dz);
    out.norm_drift = std::max(out.norm_drift, std::abs(norm * dz - norm0));
    if (track_energy) {
      const double e = prop.energy(psi, t).mean;
      out.energy_drift = std::max(out.energy_drift, std::abs(e - e0.mean) / std::abs(e0.mean));
    }
  };

  sample(0);
  std::size_t done = 0;
  while (done < total_steps) {
    const std::size_t chunk = std::min(sample_stride, total_steps - done);
    prop.advance(psi, static_cast<double>(done) * dt, dt, chunk);
    done += chunk;
    if (done % sample_stride == 0 || done == total_steps) sample(done);
  }
  out.final_state = GridWavepacket(grid, std::move(psi));
  return out;
}

CrossValidation cross_validate(const GridWavepacket& initial, const PotentialModel& potential,
                               const Spectrum& spectrum, double t_final, double dt,
                               std::size_t sample_stride, double min_kappa) {
  if (potential.modulated()) throw ValidationError("cross validation needs a static mirror");
  if (potential.kappa < min_kappa) {
    throw ValidationError("kappa = " + std::to_string(potential.kappa) +
                          " is too soft for the triangular-well comparison (need >= " +
                          std::to_string(min_kappa) + ")");
  }
  CrossValidation cv;
  EvolutionResult grid_run = evolve(initial, potential, t_final, dt, sample_stride);
  cv.grid = std::move(grid_run.autocorr);
  const EigenCoefficients coeffs = project(initial, spectrum);
  cv.analytic = analytic_autocorrelation(coeffs, spectrum, cv.grid.times);
  for (std::size_t i = 0; i < cv.grid.size(); ++i) {
    cv.max_deviation =
        std::max(cv.max_deviation, std::abs(cv.grid.magnitude2[i] - cv.analytic.magnitude2[i]));
  }
  return cv;
}

// ---------------------------------------------------------------------------
// checkpoints

namespace {

constexpr char kMagic[8] = {'R', 'T', 'M', 'P', 'S', 'I', '1', '\0'};

template <class T>
void write_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  os.write(reinterpret_cast<const char*>(&bits), 8);
}

template <class T>
T read_le(std::istream& is) {
  std::uint64_t bits = 0;
  is.read(reinterpret_cast<char*>(&bits), 8);
  if (!is) throw ValidationError("checkpoint truncated");
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const GridWavepacket& packet, double time) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, sizeof kMagic);
  const Grid& g = packet.grid();
  write_le<std::uint64_t>(os, g.size);
  write_le(os, g.z_min);
  write_le(os, g.z_max);
  write_le(os, time);
  for (const cplx& a : packet.amplitudes()) {
    write_le(os, a.real());
    write_le(os, a.imag());
  }
  if (!os) throw Error("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open checkpoint: " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ValidationError("not an RTMPSI1 checkpoint: " + path.string());
  }
  Grid g;
  g.size = read_le<std::uint64_t>(is);
  g.z_min = read_le<double>(is);
  g.z_max = read_le<double>(is);
  const double time = read_le<double>(is);
  g.validate();
  std::vector<cplx> amps(g.size);
  for (cplx& a : amps) {
    const double re = read_le<double>(is);
    const double im = read_le<double>(is);
    a = {re, im};
  }
  return {GridWavepacket(g, std::move(amps)), time};
}

}  // namespace rtm

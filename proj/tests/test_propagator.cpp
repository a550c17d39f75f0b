#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "rtm/errors.hpp"
#include "rtm/propagator.hpp"

using namespace rtm;

namespace {

// Small bouncer: drop from z0 = 15 over a steep mirror.
constexpr double kZ0 = 15.0;
constexpr double kWidth = 1.0;
const PotentialModel kMirror{100.0 * kZ0, 3.0, 0.0, 0.0};

GridWavepacket small_packet(std::size_t points = 512) {
  return make_gaussian(kZ0, kWidth, 0.0, default_grid(kMirror, kZ0, points));
}

double default_dt(const GridWavepacket& p, const PotentialModel& pot) {
  SplitStepPropagator prop(p.grid(), pot);
  return max_stable_dt(pot, prop.energy(p.amplitudes(), 0.0));
}

double rms_difference(std::span<const cplx> a, std::span<const cplx> b, double dz) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
  return std::sqrt(acc * dz);
}

}  // namespace

TEST_CASE("potential model validation") {
  CHECK_THROWS_AS((PotentialModel{0.0, 1.0, 0.0, 0.0}).validate(), ValidationError);
  CHECK_THROWS_AS((PotentialModel{1.0, 0.0, 0.0, 0.0}).validate(), ValidationError);
  CHECK_THROWS_AS((PotentialModel{1.0, 1.0, -1.0, 0.0}).validate(), ValidationError);
  CHECK_THROWS_AS((PotentialModel{1.0, 10.0, 0.6, 1.0}).validate(), ValidationError);
  CHECK_NOTHROW((PotentialModel{1.0, 10.0, 0.4, 1.0}).validate());
  const PotentialModel m{100.0, 2.0, 0.0, 0.0};
  CHECK(m.value(1.0, 0.0) == doctest::Approx(1.0 + 100.0 * std::exp(-2.0)));
  const double zt = m.lower_turning_point(20.0);
  CHECK(m.value(zt, 0.0) == doctest::Approx(20.0).epsilon(1e-10));
}

TEST_CASE("semiclassical period tends to the hard-wall bounce") {
  for (double e : {10.0, 70.5}) {
    const double hard = 2.0 * std::sqrt(2.0 * e);
    const PotentialModel steep{100.0 * e, 1000.0, 0.0, 0.0};
    CHECK(semiclassical_period(steep, e) == doctest::Approx(hard).epsilon(2e-3));
    const double hard_t2 = 16.0 * e * e / std::numbers::pi;
    CHECK(semiclassical_revival_time(steep, e) == doctest::Approx(hard_t2).epsilon(1e-2));
    // a softer wall shortens the flight
    const PotentialModel soft{100.0 * e, 1.0, 0.0, 0.0};
    CHECK(semiclassical_period(soft, e) < semiclassical_period(steep, e));
  }
}

TEST_CASE("zero-length evolution is the identity") {
  const GridWavepacket p = small_packet();
  const EvolutionResult r = evolve(p, kMirror, 0.0, default_dt(p, kMirror), 1);
  REQUIRE(r.autocorr.size() == 1);
  CHECK(std::abs(r.autocorr.values[0] - 1.0) < 1e-12);
  CHECK(r.mean_position[0] == doctest::Approx(kZ0).epsilon(1e-10));
}

TEST_CASE("free fall before the first impact") {
  const GridWavepacket p = small_packet();
  const double dt = default_dt(p, kMirror);
  const double t_impact = std::sqrt(2.0 * kZ0);
  const EvolutionResult r = evolve(p, kMirror, 0.6 * t_impact, dt, 50);
  for (std::size_t i = 0; i < r.autocorr.size(); ++i) {
    const double t = r.autocorr.times[i];
    const double expected = kZ0 - 0.5 * t * t;
    REQUIRE(std::abs(r.mean_position[i] - expected) < 0.005 * kZ0);
  }
}

TEST_CASE("unitarity and energy conservation over two bounces") {
  const GridWavepacket p = small_packet();
  const double dt = default_dt(p, kMirror);
  const EvolutionResult r = evolve(p, kMirror, 2.0 * 2.0 * std::sqrt(2.0 * kZ0), dt, 20);
  for (std::size_t i = 1; i < r.norm.size(); ++i) {
    REQUIRE(std::abs(r.norm[i] - r.norm[i - 1]) < 1e-12);
  }
  CHECK(r.norm_drift < 1e-9);
  CHECK(r.energy_drift < 1e-6);
}

TEST_CASE("time reversal") {
  const GridWavepacket p = small_packet();
  const double dt = default_dt(p, kMirror);
  SplitStepPropagator prop(p.grid(), kMirror);
  std::vector<cplx> psi(p.amplitudes().begin(), p.amplitudes().end());
  const std::size_t steps = static_cast<std::size_t>(8.0 / dt);
  prop.advance(psi, 0.0, dt, steps);
  prop.advance(psi, static_cast<double>(steps) * dt, -dt, steps);
  CHECK(rms_difference(psi, p.amplitudes(), p.grid().dz()) < 1e-8);
}

TEST_CASE("second-order convergence") {
  const GridWavepacket p = small_packet();
  const double t_final = 6.0;  // through the first impact
  // dt0 divides t_final so every run ends on the same time
  const double dt0 = t_final / std::ceil(t_final / (2.0 * default_dt(p, kMirror)));
  EvolutionOptions options;
  options.enforce_dt_rule = false;
  options.track_energy = false;
  auto final_state = [&](double dt) {
    return evolve(p, kMirror, t_final, dt, 1u << 30, options).final_state;
  };
  const GridWavepacket ref = final_state(dt0 / 16.0);
  const double dz = p.grid().dz();
  const double e1 = rms_difference(final_state(dt0).amplitudes(), ref.amplitudes(), dz);
  const double e2 = rms_difference(final_state(dt0 / 2.0).amplitudes(), ref.amplitudes(), dz);
  const double factor = e1 / e2;
  CAPTURE(e1);
  CAPTURE(e2);
  CHECK(factor > 3.4);
  CHECK(factor < 4.6);
}

TEST_CASE("a zero-amplitude modulation is the static propagator") {
  const GridWavepacket p = small_packet();
  const PotentialModel still{kMirror.v0, kMirror.kappa, 0.0, 2.0};
  const double dt = default_dt(p, kMirror);
  const EvolutionResult a = evolve(p, kMirror, 3.0, dt, 10);
  const EvolutionResult b = evolve(p, still, 3.0, dt, 10);
  REQUIRE(a.autocorr.size() == b.autocorr.size());
  for (std::size_t i = 0; i < a.autocorr.size(); ++i) {
    REQUIRE(std::abs(a.autocorr.values[i] - b.autocorr.values[i]) < 1e-13);
  }
}

TEST_CASE("modulated mirror runs and keeps the norm") {
  const GridWavepacket p = small_packet();
  const PotentialModel shaking{kMirror.v0, kMirror.kappa, 0.02, 3.0};
  SplitStepPropagator prop(p.grid(), shaking);
  const double dt = max_stable_dt(shaking, prop.energy(p.amplitudes(), 0.0));
  CHECK(dt <= 0.05 * 2.0 * std::numbers::pi / 3.0);
  const EvolutionResult r = evolve(p, shaking, 12.0, dt, 20);
  CHECK(r.norm_drift < 1e-9);
  CHECK(r.energy_drift == 0.0);  // not tracked for a moving mirror
}

TEST_CASE("stability rule and grid checks") {
  const GridWavepacket p = small_packet();
  const double dt = default_dt(p, kMirror);
  CHECK_THROWS_AS(evolve(p, kMirror, 1.0, 2.0 * dt, 1), ValidationError);
  CHECK_THROWS_AS(evolve(p, kMirror, -1.0, dt, 1), ValidationError);
  CHECK_THROWS_AS(evolve(p, kMirror, 1.0, dt, 0), ValidationError);

  const Grid cramped{0.0, 40.0, 2048};  // no room below the turning point
  CHECK_THROWS_AS(check_grid_headroom(cramped, kMirror, kZ0 + 3.0), ValidationError);
  const Grid low{-1.0, 16.0, 2048};  // no headroom above the apex
  CHECK_THROWS_AS(check_grid_headroom(low, kMirror, kZ0 + 3.0), ValidationError);
}

TEST_CASE("a packet reaching the edge aborts") {
  // the Gaussian tail at the edges sits far above a vanishing tolerance
  const GridWavepacket p = small_packet();
  EvolutionOptions options;
  options.boundary_tolerance = 1e-30;
  CHECK_THROWS_AS(evolve(p, kMirror, 1.0, default_dt(p, kMirror), 10, options), NumericalError);
}

TEST_CASE("engines converge as the wall steepens") {
  const double z0 = 10.0;
  const Spectrum s = Spectrum::triangular_well(80);
  const double period = 2.0 * std::sqrt(2.0 * z0);
  double previous = 1.0;
  for (double kappa : {10.0, 20.0, 40.0}) {
    const PotentialModel wall{100.0 * z0, kappa, 0.0, 0.0};
    const GridWavepacket p = make_gaussian(z0, 1.0, 0.0, default_grid(wall, z0, 2048));
    // keep k_max^2 dt / 2 near pi so the steep wall does not alias
    const double k_max = std::numbers::pi / p.grid().dz();
    const double dt = std::min(default_dt(p, wall), 6.0 / (k_max * k_max));
    const CrossValidation cv = cross_validate(p, wall, s, period, dt, 200);
    CAPTURE(kappa);
    CAPTURE(cv.max_deviation);
    CHECK(cv.max_deviation < previous);
    previous = cv.max_deviation;
  }
  const PotentialModel soft{1e3, 5.0, 0.0, 0.0};
  const GridWavepacket p = make_gaussian(z0, 1.0, 0.0, default_grid(soft, z0, 2048));
  CHECK_THROWS_AS(cross_validate(p, soft, s, 1.0, default_dt(p, soft), 50), ValidationError);
}

TEST_CASE("checkpoint round trip") {
  const GridWavepacket p = small_packet(256);
  const auto path = std::filesystem::temp_directory_path() / "rtm_checkpoint_test.bin";
  save_checkpoint(path, p, 1.25);
  const Checkpoint c = load_checkpoint(path);
  std::filesystem::remove(path);
  CHECK(c.time == 1.25);
  CHECK(c.packet.grid().z_min == p.grid().z_min);
  CHECK(c.packet.grid().z_max == p.grid().z_max);
  REQUIRE(c.packet.grid().size == p.grid().size);
  for (std::size_t i = 0; i < p.grid().size; ++i) {
    REQUIRE(c.packet.amplitudes()[i] == p.amplitudes()[i]);
  }
  CHECK_THROWS_AS(load_checkpoint(path), ValidationError);
}

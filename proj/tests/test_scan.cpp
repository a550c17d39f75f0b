#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "rtm/config.hpp"
#include "rtm/errors.hpp"
#include "rtm/scan.hpp"

using namespace rtm;
namespace fs = std::filesystem;

namespace {

const fs::path kData = RTM_TEST_DATA;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

SurfaceProfile flat(std::size_t n, double dx = 1e-6) {
  SurfaceProfile p;
  p.name = "flat";
  for (std::size_t i = 0; i < n; ++i) p.samples.push_back({dx * i, 0.0});
  return p;
}

}  // namespace

TEST_CASE("profile parsing") {
  SUBCASE("flat two-sample file") {
    const SurfaceProfile p = parse_profile("0,0\n1e-6,0\n");
    REQUIRE(p.samples.size() == 2);
    CHECK(p.samples[1].x == 1e-6);
    CHECK(p.samples[0].h == 0.0);
    CHECK(p.samples[1].h == 0.0);
  }
  SUBCASE("step with header and comments") {
    const SurfaceProfile p =
        parse_profile("# a 50 nm step\nx_m,h_m\n0,0\n1e-6,0\n2e-6,5e-8\n3e-6, 5e-8\n");
    REQUIRE(p.samples.size() == 4);
    CHECK(p.samples[0].h == 0.0);
    CHECK(p.samples[2].h == 5e-8);
    CHECK(p.samples[3].h == 5e-8);
  }
  SUBCASE("unsorted rows name the line") {
    try {
      parse_profile("x_m,h_m\n0,0\n2e-6,0\n1e-6,0\n");
      FAIL("no error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
  }
  SUBCASE("duplicates, junk, non-finite values and tall features") {
    CHECK_THROWS_AS(parse_profile("0,0\n0,1e-9\n"), ValidationError);
    CHECK_THROWS_AS(parse_profile("0,0\n1e-6,abc\n"), ValidationError);
    CHECK_THROWS_AS(parse_profile("0,0\n1e-6,nan\n"), ValidationError);
    CHECK_THROWS_AS(parse_profile("0,0,0\n"), ValidationError);
    CHECK_THROWS_AS(parse_profile("0,3e-6\n", "p", 20.1e-6), ValidationError);
    CHECK_NOTHROW(parse_profile("0,1e-6\n", "p", 20.1e-6));
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_profile("/nonexistent/profile.csv"), ValidationError);
  }
}

TEST_CASE("profile write and reload keep 12 digits") {
  SurfaceProfile p;
  p.samples = {{0.0, 1.234567890123e-8}, {1.000000000001e-6, -9.87654321098e-9}};
  const fs::path path = fs::temp_directory_path() / "rtm_profile_roundtrip.csv";
  write_profile(p, path);
  const SurfaceProfile q = load_profile(path);
  fs::remove(path);
  REQUIRE(q.samples.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(q.samples[i].x == doctest::Approx(p.samples[i].x).epsilon(1e-12));
    CHECK(q.samples[i].h == doctest::Approx(p.samples[i].h).epsilon(1e-12));
  }
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(parse_format("csv") == ReportFormat::csv);
  CHECK_THROWS_AS(parse_format("xml"), ValidationError);
}

TEST_CASE("empty report is a header") {
  const ScanResult empty;
  CHECK(format_report(empty, ReportFormat::csv) ==
        "x_m,h_input_m,T2_s,T2_uncertainty_s,E_J,h_m,P_sp,P_sp_flag,status\n");
  const std::string json = format_report(empty, ReportFormat::json);
  CHECK(json.find("\"points\": []") != std::string::npos);
}

TEST_CASE("config parsing") {
  SUBCASE("defaults") {
    const RunConfig c = config_from_json_text("{}");
    CHECK(c.mass == constants::cs133_mass);
    CHECK(c.engine == Engine::analytic);
    CHECK(c.mirror_strength(20.1e-6) ==
          doctest::Approx(100.0 * c.mass * c.gravity * 20.1e-6).epsilon(1e-15));
  }
  SUBCASE("sections") {
    const RunConfig c = config_from_json_text(R"({
      "atom": {"mass": 1.44e-25}, "gravity": 9.81,
      "mirror": {"V0": 1e-27, "kappa": 2e6},
      "packet": {"z0": 1e-5, "width": 2e-7},
      "scan": {"engine": "grid", "jobs": 2, "h_ref": 1e-5},
      "modulation": {"amplitude": 2.3e-8}
    })");
    CHECK(c.mass == 1.44e-25);
    CHECK(c.gravity == 9.81);
    CHECK(c.mirror_strength(1.0) == 1e-27);
    CHECK(c.engine == Engine::grid);
    CHECK(c.jobs == 2);
    CHECK(c.modulation_amplitude == 2.3e-8);
  }
  SUBCASE("round trip") {
    RunConfig c;
    c.v0 = 3e-27;
    c.r = 0.4;
    c.engine = Engine::grid;
    const RunConfig d = config_from_json_text(config_to_json_text(c));
    CHECK(d.v0 == c.v0);
    CHECK(d.r == c.r);
    CHECK(d.engine == Engine::grid);
    CHECK(d.kappa == c.kappa);
    CHECK(config_to_json_text(d) == config_to_json_text(c));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(config_from_json_text("{"), ValidationError);
    CHECK_THROWS_AS(config_from_json_text(R"({"mirorr": {}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json_text(R"({"mirror": {"kapa": 1}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json_text(R"({"gravity": "high"})"), ValidationError);
    CHECK_THROWS_AS(config_from_json_text(R"({"packet": {"width": -1}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json_text(R"({"atom": "rb87"})"), ValidationError);
    CHECK_THROWS_AS(config_from_json_text(R"({"scan": {"engine": "magic"}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json_text(R"({"revival": {"window_frac": 1.2}})"), ValidationError);
  }
  SUBCASE("profile path is relative to the config file") {
    const fs::path dir = fs::temp_directory_path() / "rtm_config_test";
    fs::create_directories(dir);
    std::ofstream(dir / "c.json") << R"({"scan": {"profile": "p.csv"}})";
    const RunConfig c = load_config(dir / "c.json");
    CHECK(*c.profile == dir / "p.csv");
    fs::remove_all(dir);
  }
}

TEST_CASE("scaled experiment settings") {
  const RunConfig c;
  const ExperimentSettings s = experiment_settings(c, c.h_ref);
  CHECK(s.width == doctest::Approx(0.980327).epsilon(1e-5));
  CHECK(s.kappa == doctest::Approx(0.519307).epsilon(1e-5));
  CHECK(s.v0 == doctest::Approx(100.0 * 70.3735).epsilon(1e-5));
}

TEST_CASE("periodicity of a sampled sinusoid") {
  SurfaceProfile p;
  const double a = 23e-9, period = 1e-9, phase = 0.7;
  for (int i = 0; i < 64; ++i) {
    const double x = i * period / 8.0;
    p.samples.push_back({x, 2e-9 + a * std::sin(2.0 * std::numbers::pi * x / period + phase)});
  }
  const Periodicity per = profile_periodicity(p);
  CHECK(per.amplitude == doctest::Approx(a).epsilon(1e-9));
  CHECK(per.period == doctest::Approx(period).epsilon(1e-9));
  CHECK(per.mean == doctest::Approx(2e-9).epsilon(1e-9));
  CHECK(std::remainder(per.phase - phase, 2.0 * std::numbers::pi) == doctest::Approx(0.0).scale(1.0));

  CHECK(profile_periodicity(flat(16)).amplitude == 0.0);

  SurfaceProfile step = flat(16);
  for (std::size_t i = 8; i < 16; ++i) step.samples[i].h = 1e-7;
  CHECK_THROWS_AS(profile_periodicity(step), ValidationError);
  SurfaceProfile uneven = flat(8);
  uneven.samples[3].x += 1e-7;
  CHECK_THROWS_AS(profile_periodicity(uneven), ValidationError);
}

TEST_CASE("flat static scan against the golden report") {
  RunConfig c;
  c.jobs = 2;
  const ScanResult r = run_static_scan(flat(3), c);
  for (const PointResult& p : r.per_point) {
    CHECK(p.status == "ok");
    CHECK(std::abs(p.h) < 2e-9);
  }
  const std::string report = format_report(r, ReportFormat::csv);
  CHECK(report == format_report(run_static_scan(flat(3), c), ReportFormat::csv));

  const fs::path golden = kData / "flat_scan_golden.csv";
  if (std::getenv("RTM_WRITE_GOLDEN")) std::ofstream(golden, std::ios::binary) << report;
  const auto want = csv_rows(read_file(golden));
  const auto got = csv_rows(report);
  REQUIRE(want.size() == got.size());
  CHECK(want[0] == got[0]);
  for (std::size_t i = 1; i < want.size(); ++i) {
    REQUIRE(want[i].size() == got[i].size());
    for (std::size_t j = 0; j < want[i].size(); ++j) {
      CAPTURE(i);
      CAPTURE(j);
      char* end = nullptr;
      const double w = std::strtod(want[i][j].c_str(), &end);
      if (*end != '\0' || want[i][j].empty()) {
        CHECK(want[i][j] == got[i][j]);
        continue;
      }
      const double g = std::strtod(got[i][j].c_str(), nullptr);
      // heights are differences of nearly equal drops: compare them absolutely
      CHECK(g == doctest::Approx(w).epsilon(1e-9).scale(j == 5 ? 1e-6 : 1.0));
    }
  }
}

TEST_CASE("calibration removes a constant offset") {
  RunConfig c;
  SurfaceProfile base = flat(2);
  base.samples[1].h = 30e-9;
  SurfaceProfile shifted = base;
  for (auto& s : shifted.samples) s.h += 200e-9;
  const ScanResult a = run_static_scan(base, c);
  const ScanResult b = run_static_scan(shifted, c);
  CHECK(a.per_point[0].h == 0.0);
  CHECK(b.per_point[0].h == 0.0);
  CHECK(std::abs(a.per_point[1].h - b.per_point[1].h) < 2e-9);
}

TEST_CASE("scan preconditions") {
  RunConfig c;
  SurfaceProfile tall = flat(2);
  tall.samples[1].h = 3e-6;
  CHECK_THROWS_AS(run_static_scan(tall, c), ValidationError);
  RunConfig low;
  low.h_ref = 1e-6;  // n0 well below 20
  CHECK_THROWS_AS(run_static_scan(flat(2), low), ValidationError);
  CHECK(run_static_scan(SurfaceProfile{}, c).per_point.empty());
}

TEST_CASE("a scan where most points fail aborts") {
  RunConfig c;
  c.window_frac = 0.001;  // window too narrow to hold the revival envelope
  CHECK_THROWS_AS(run_static_scan(flat(2), c), NumericalError);
}

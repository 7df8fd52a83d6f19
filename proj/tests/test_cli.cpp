#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "lwr/config.hpp"
#include "lwr/ring.hpp"

namespace fs = std::filesystem;
using namespace lwr;

namespace {

const std::string kCli = LWR_CLI_PATH;
const std::string kScenarios = std::string(LWR_SOURCE_DIR) + "/scenarios/";

struct Result {
  int code;
  std::string out;
};

Result run_cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / ("lwr_cli_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = kCli + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(log);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lwr_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double field(const std::string& text, const std::string& pattern) {
  std::smatch m;
  if (!std::regex_search(text, m, std::regex(pattern))) {
    ADD_FAILURE() << "no match for " << pattern << " in\n" << text;
    return 0.0;
  }
  return std::stod(m[1].str());
}

/// Rows of the last snapshot in a snapshots CSV: density per cell.
std::vector<double> last_snapshot(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<double, double>> rows;  // (t, rho)
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string t, cell, x, rho;
    std::getline(ls, t, ',');
    std::getline(ls, cell, ',');
    std::getline(ls, x, ',');
    std::getline(ls, rho, ',');
    rows.emplace_back(std::stod(t), std::stod(rho));
  }
  std::vector<double> last;
  for (const auto& [t, rho] : rows) {
    if (t == rows.back().first) last.push_back(rho);
  }
  return last;
}

}  // namespace

TEST(Cli, VerifySucceeds) {
  auto r = run_cli("verify --seed 1 --trials 0");
  EXPECT_EQ(r.code, 0) << r.out;
  r = run_cli("verify --seed 1 --trials 20");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS boundary flux = min{D1, S2}"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST(Cli, RiemannCaseTwo) {
  const auto dir = fresh_dir("riemann");
  const auto r = run_cli("riemann --config " + kScenarios + "riemann_case2.yaml --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rep = slurp(dir / "riemann_report.txt");
  EXPECT_NE(rep.find("summary: backward rarefaction / forward rarefaction, q=C\n"), std::string::npos) << rep;
  EXPECT_NEAR(field(rep, R"(boundary flux: ([0-9.]+) veh/s)"), 1.0, 1e-4);
  const auto csv = slurp(dir / "riemann_profile.csv");
  EXPECT_EQ(csv.rfind("xi_m_s,rho_veh_km,q_veh_s,D_veh_s,S_veh_s\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 242);
}

TEST(Cli, RiemannTieReportsStationaryShock) {
  const auto dir = fresh_dir("tie");
  const auto r = run_cli("riemann --config " + kScenarios + "riemann_tie.yaml --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("stationary shock at x=0: rho 1.0000 -> 3.0000 veh/km"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("interior upstream: family"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(dir / "riemann_profile.csv"));
}

TEST(Cli, SimulateRingFindsShockAndIsDeterministic) {
  const auto a = fresh_dir("sim_a");
  const auto b = fresh_dir("sim_b");
  const std::string cfg = kScenarios + "ring_rho28_coarse.yaml";
  ASSERT_EQ(run_cli("simulate --config " + cfg + " --out " + a.string()).code, 0);
  ASSERT_EQ(run_cli("simulate --config " + cfg + " --out " + b.string()).code, 0);
  const auto csv = slurp(a / "snapshots.csv");
  EXPECT_EQ(csv, slurp(b / "snapshots.csv"));
  EXPECT_EQ(csv.rfind("t,cell,x_km,rho_veh_km,v_m_s,q_veh_s\n", 0), 0u);

  const auto rho = last_snapshot(csv);
  ASSERT_EQ(rho.size(), 600u);
  std::size_t jump = 0;
  double biggest = 0.0;
  for (std::size_t i = 100; i + 1 < rho.size(); ++i) {
    if (rho[i + 1] - rho[i] > biggest) {
      biggest = rho[i + 1] - rho[i];
      jump = i;
    }
  }
  const auto spec = config::load_config(cfg).ring_spec();
  const double l2_cells = *predict(spec).shock_position / 0.028;
  EXPECT_NEAR(static_cast<double>(jump) + 1.0, l2_cells, 2.0);

  const auto rep = slurp(a / "simulation_report.txt");
  EXPECT_NEAR(field(rep, R"(initial vehicles: ([0-9.]+) veh)"), spec.vehicles, 1e-4);
  EXPECT_NEAR(field(rep, R"(final vehicles: ([0-9.]+) veh)"), spec.vehicles, 1e-4);
  EXPECT_NE(rep.find("interior states: 1\n"), std::string::npos) << rep;
}

TEST(Cli, RingReportRoundTrip) {
  const auto dir = fresh_dir("ring");
  const std::string cfg = kScenarios + "ring_rho28.yaml";
  const auto r = run_cli("ring-predict --config " + cfg + " --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rep = slurp(dir / "ring_report.txt");
  const auto spec = config::load_config(cfg).ring_spec();
  const auto p = predict(spec);
  const auto th = thresholds(spec);
  EXPECT_NEAR(field(rep, R"(\bq: ([0-9.]+) veh/s)"), p.flux, 5e-5);
  EXPECT_NEAR(field(rep, R"(L2: ([0-9.]+) km)"), *p.shock_position, 5e-5);
  EXPECT_NEAR(field(rep, R"(N1: ([0-9.]+) veh)"), th.uc_limit, 5e-5);
  EXPECT_NEAR(field(rep, R"(N3: ([0-9.]+) veh)"), th.soc_onset, 5e-5);
  EXPECT_NEAR(field(rep, R"(\bN: ([0-9.]+) veh)"), spec.vehicles, 5e-5);
  EXPECT_NE(rep.find("scenario: b "), std::string::npos) << rep;
  const auto csv = slurp(dir / "ring_profile.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Cli, ErrorsExitWithTwo) {
  const auto dir = fresh_dir("err");
  auto r = run_cli("simulate --config " + kScenarios + "ring_rho28_dt_too_large.yaml --out " + dir.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("CFL number 1.59"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::is_empty(dir));
  r = run_cli("simulate --config /nonexistent.yaml");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("cannot open config file"), std::string::npos) << r.out;
  r = run_cli("simulate");
  EXPECT_EQ(r.code, 2);
  r = run_cli("frobnicate");
  EXPECT_EQ(r.code, 2);
  r = run_cli("riemann --config " + kScenarios + "ring_rho28.yaml --out " + dir.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("riemann section"), std::string::npos) << r.out;
}

TEST(Cli, OverrideFlagAllowsCflUpToOne) {
  const auto dir = fresh_dir("override");
  const auto cfg = dir / "tight.yaml";
  std::ofstream(cfg) << R"(
diagrams:
  g: {family: greenshields, free_speed: 1 km/s, jam_density: 4 veh/km}
road:
  topology: ring
  segments: [{diagram: g, length: 1 km}]
initial:
  sinusoid: {rho0: 1 veh/km, amplitude: 0.5 veh/km}
numerics: {dx: 100 m, dt: 0.098 s, duration: 1 s}
)";
  EXPECT_EQ(run_cli("simulate --config " + cfg.string() + " --out " + dir.string()).code, 2);
  EXPECT_EQ(run_cli("simulate --override-cfl --config " + cfg.string() + " --out " + dir.string()).code, 0);
}

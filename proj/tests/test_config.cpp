#include <gtest/gtest.h>

#include "lwr/config.hpp"
#include "lwr/ring.hpp"

using namespace lwr;
using namespace lwr::config;

namespace {

const std::string kRing = R"(
diagrams:
  a: {family: greenshields, free_speed: 1 km/s, jam_density: 4 veh/km}
  b: {family: greenshields, free_speed: 1 km/s, jam_density: 8 veh/km}
road:
  topology: ring
  segments:
    - {diagram: a, length: 1 km}
    - {diagram: b, length: 2 km}
initial:
  sinusoid: {rho0: 1 veh/km}
numerics: {dx: 100 m, dt: 0.05 s, duration: 1 s}
)";

std::vector<std::string> errors_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigErrorList& e) {
    return e.errors();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& errs, const std::string& needle) {
  for (const auto& e : errs) {
    if (e.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Units, Factors) {
  EXPECT_DOUBLE_EQ(*unit_factor("m", Dim::Length), 1e-3);
  EXPECT_DOUBLE_EQ(*unit_factor("km/h", Dim::Speed), 1.0 / 3600.0);
  EXPECT_DOUBLE_EQ(*unit_factor("veh/h", Dim::Flux), 1.0 / 3600.0);
  EXPECT_FALSE(unit_factor("m", Dim::Time).has_value());
}

TEST(Parse, MinimalRing) {
  const auto cfg = parse_config(kRing);
  ASSERT_TRUE(cfg.numerics);
  EXPECT_DOUBLE_EQ(cfg.numerics->dx, 0.1);
  EXPECT_DOUBLE_EQ(cfg.road_length(), 3.0);
  ASSERT_TRUE(cfg.cfl);
  EXPECT_NEAR(*cfg.cfl, 0.5, 1e-12);
  const auto g = cfg.build_grid();
  EXPECT_EQ(g.size(), 30u);
  EXPECT_TRUE(g.is_ring());
  EXPECT_DOUBLE_EQ(g.density(0), 1.0);   // one lane on link a
  EXPECT_DOUBLE_EQ(g.density(29), 1.0);  // no lane factor for Greenshields
  const auto spec = cfg.ring_spec();
  EXPECT_DOUBLE_EQ(spec.link1_length, 1.0);
  EXPECT_NEAR(spec.vehicles, 3.0, 1e-12);
}

TEST(Parse, FineRingFile) {
  const auto cfg = load_config(std::string(LWR_SOURCE_DIR) + "/scenarios/ring_rho28.yaml");
  ASSERT_TRUE(cfg.cfl);
  EXPECT_NEAR(*cfg.cfl, 0.795, 0.001);
  EXPECT_DOUBLE_EQ(cfg.numerics->duration, 24000.0);
  const auto spec = cfg.ring_spec();
  EXPECT_NEAR(spec.vehicles, 858.3893, 0.05);
  EXPECT_EQ(predict(spec, cfg.predict).scenario, RingScenario::CriticalWithShock);
  const auto g = cfg.build_grid();
  EXPECT_EQ(g.size(), 4800u);
  EXPECT_NEAR(g.total_vehicles(), spec.vehicles, 1e-8);
}

TEST(Parse, DoubledTimeStepIsRejected) {
  try {
    load_config(std::string(LWR_SOURCE_DIR) + "/scenarios/ring_rho28_dt_too_large.yaml");
    FAIL() << "expected a CFL error";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("CFL number 1.59"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line "), std::string::npos) << msg;
  }
}

TEST(Parse, OverrideCfl) {
  std::string text = kRing;
  text.replace(text.find("dt: 0.05 s"), 10, "dt: 0.098 s");
  EXPECT_TRUE(any_contains(errors_of(text), "override_cfl allows up to 1"));
  EXPECT_NO_THROW(parse_config(text, {true}));
  text.replace(text.find("dt: 0.098 s"), 11, "dt: 0.11 s");
  EXPECT_THROW(parse_config(text, {true}), ConfigError);
}

TEST(Parse, ReportsEveryErrorWithLines) {
  const std::string text = R"(diagrams:
  a: {family: greenshields, free_speed: 1 km/s, jam_density: 4}
  b: {family: hyperbolic}
road:
  topology: ring
  segments:
    - {diagram: c, length: 2 s}
numerics: {dx: 1 km, dt: 1 s, duration: 1 s, colour: red}
)";
  const auto errs = errors_of(text);
  EXPECT_GE(errs.size(), 5u);
  EXPECT_TRUE(any_contains(errs, "line 2: 'jam_density': missing unit"));
  EXPECT_TRUE(any_contains(errs, "line 3:"));
  EXPECT_TRUE(any_contains(errs, "unknown family 'hyperbolic'"));
  EXPECT_TRUE(any_contains(errs, "unknown diagram 'c'"));
  EXPECT_TRUE(any_contains(errs, "unit 's' does not measure length"));
  EXPECT_TRUE(any_contains(errs, "line 8: unknown key 'colour'"));
}

TEST(Parse, UnknownTopLevelKey) {
  const auto errs = errors_of("diagrams: {}\nsimulation: {}\n");
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_EQ(errs[0], "line 2: unknown key 'simulation' in configuration");
}

TEST(Parse, YamlSyntaxError) {
  const auto errs = errors_of("diagrams: {a: [\n");
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_EQ(errs[0].rfind("line ", 0), 0u);
}

TEST(Parse, OpenRoadNeedsBoundary) {
  std::string text = kRing;
  text.replace(text.find("topology: ring"), 14, "topology: open");
  EXPECT_TRUE(any_contains(errors_of(text), "needs a boundary section"));
  text += "boundary:\n  left_demand: 0.5 veh/s\n  right_supply:\n    - {from: 0 s, value: 1 veh/s}\n    - {from: 10 s, value: 0.2 veh/s}\n";
  const auto cfg = parse_config(text);
  const auto& bc = std::get<Open>(*cfg.topology).boundary;
  EXPECT_DOUBLE_EQ(bc.left_demand.at(3.0), 0.5);
  EXPECT_DOUBLE_EQ(bc.right_supply.at(5.0), 1.0);
  EXPECT_DOUBLE_EQ(bc.right_supply.at(10.0), 0.2);
}

TEST(Parse, SegmentsMustBeWholeCells) {
  std::string text = kRing;
  text.replace(text.find("length: 1 km"), 12, "length: 1.05 km");
  EXPECT_TRUE(any_contains(errors_of(text), "whole number of cells"));
}

TEST(Parse, RiemannStates) {
  const auto cfg = parse_config(R"(
diagrams:
  g: {family: greenshields, free_speed: 1 km/s, jam_density: 4 veh/km}
riemann:
  upstream: {diagram: g, density: 3 veh/km}
  downstream: {diagram: g, demand: 0.75 veh/s, supply: 1 veh/s}
)");
  ASSERT_TRUE(cfg.riemann);
  EXPECT_DOUBLE_EQ(cfg.riemann->upstream.state.supply, 0.75);
  EXPECT_DOUBLE_EQ(cfg.riemann->downstream.state.demand, 0.75);
  EXPECT_TRUE(any_contains(errors_of(R"(
diagrams:
  g: {family: greenshields, free_speed: 1 km/s, jam_density: 4 veh/km}
riemann:
  upstream: {diagram: g, demand: 0.5 veh/s, supply: 0.9 veh/s}
  downstream: {diagram: g, density: 9 veh/km}
)"),
                           "density outside"));
}

TEST(Parse, KernerKonhauserDefaults) {
  const auto cfg = parse_config("diagrams:\n  k: {family: kerner-konhauser, lanes: 2}\n");
  EXPECT_NEAR(cfg.diagram("k").capacity(), 2 * 0.7091, 1e-3);
}

TEST(Load, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/scenario.yaml"), ConfigError);
}

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "lwr/supply_demand.hpp"

using namespace lwr;

namespace {
FundamentalDiagram gs14() { return FundamentalDiagram(Greenshields{1.0, 4.0}); }
}  // namespace

TEST(FromDensity, Values) {
  const auto fd = gs14();
  const auto crit = from_density(fd, 2.0);
  EXPECT_DOUBLE_EQ(crit.demand, 1.0);
  EXPECT_DOUBLE_EQ(crit.supply, 1.0);
  const auto free = from_density(fd, 1.0);
  EXPECT_DOUBLE_EQ(free.demand, 0.75);
  EXPECT_DOUBLE_EQ(free.supply, 1.0);
  const auto jammed = from_density(fd, 3.0);
  EXPECT_DOUBLE_EQ(jammed.demand, 1.0);
  EXPECT_DOUBLE_EQ(jammed.supply, 0.75);
  EXPECT_THROW(from_density(fd, 5.0), DomainError);
}

TEST(ToDensity, Values) {
  const auto fd = gs14();
  // Inverting at the peak is square-root sensitive.
  EXPECT_NEAR(to_density(fd, {1.0, 1.0}), 2.0, 1e-7);
  EXPECT_NEAR(to_density(fd, {0.75, 1.0}), 1.0, 1e-9);
  EXPECT_NEAR(to_density(fd, {1.0, 0.75}), 3.0, 1e-9);
  const FundamentalDiagram k1(KernerKonhauser{1.0});
  const FundamentalDiagram k2(KernerKonhauser{2.0});
  EXPECT_NEAR(to_density(k2, {k2.capacity(), k1.capacity()}), 118.3550, 0.01);
}

TEST(ToDensity, InconsistentStateIsStateError) {
  const auto fd = gs14();
  EXPECT_THROW(to_density(fd, {0.5, 0.9}), StateError);
  EXPECT_THROW(to_density(fd, {1.0, -0.2}), StateError);
}

TEST(FluxOf, Min) {
  EXPECT_DOUBLE_EQ(flux_of({1.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(flux_of({0.75, 1.0}), 0.75);
  EXPECT_DOUBLE_EQ(flux_of({1.0, 0.75}), 0.75);
}

TEST(GammaOf, Values) {
  EXPECT_DOUBLE_EQ(gamma_of({1.0, 1.0}).value(), 1.0);
  EXPECT_DOUBLE_EQ(gamma_of({0.5, 1.0}).value(), 0.5);
  EXPECT_TRUE(gamma_of({1.0, 0.0}).is_infinite());
  EXPECT_THROW(gamma_of({0.0, 0.0}), StateError);
}

TEST(GammaOf, ReproducesFlux) {
  std::mt19937_64 rng(3);
  const FundamentalDiagram fd(KernerKonhauser{2.0});
  std::uniform_real_distribution<double> rho(1e-3, fd.rho_jam() - 1e-3);
  for (int i = 0; i < 1000; ++i) {
    const auto u = from_density(fd, rho(rng));
    const double g = gamma_of(u).value();
    EXPECT_NEAR(std::min(g, 1.0 / g) * fd.capacity(), flux_of(u), 1e-12 * fd.capacity());
  }
}

TEST(Classify, Trichotomy) {
  EXPECT_EQ(classify({1.0, 1.0}), Classification::Critical);
  EXPECT_EQ(classify({0.5, 1.0}), Classification::StrictlyUnderCritical);
  EXPECT_EQ(classify({1.0, 0.5}), Classification::StrictlyOverCritical);
  EXPECT_EQ(classify({1.0 - 5e-10, 1.0}), Classification::Critical);  // inside the flux tolerance
  EXPECT_TRUE(is_under_critical({1.0, 1.0}));
  EXPECT_TRUE(is_over_critical({1.0, 1.0}));
  EXPECT_TRUE(is_under_critical({0.5, 1.0}));
  EXPECT_FALSE(is_over_critical({0.5, 1.0}));
  EXPECT_TRUE(is_strictly_over_critical({1.0, 0.5}));
}

TEST(Properties, RoundTrip) {
  std::mt19937_64 rng(11);
  for (const auto& fd : {gs14(), FundamentalDiagram(Triangular::from_critical(0.03, 150.0, 30.0)),
                         FundamentalDiagram(KernerKonhauser{1.0})}) {
    std::uniform_real_distribution<double> rho(0.0, fd.rho_jam());
    for (int i = 0; i < 1000; ++i) {
      const double r = rho(rng);
      const auto u = from_density(fd, r);
      EXPECT_NEAR(u.capacity(), fd.capacity(), 1e-9);
      EXPECT_NEAR(to_density(fd, u), r, 1e-8 * fd.rho_jam());
      const auto back = from_density(fd, to_density(fd, u));
      EXPECT_TRUE(approx_equal(back, u));
    }
  }
}

TEST(Properties, DiagramShapeIsForgotten) {
  // A Greenshields diagram rescaled to the Kerner-Konhauser capacity maps onto the
  // same set {(d, C)} u {(C, s)}.
  const FundamentalDiagram k(KernerKonhauser{1.0});
  const double c = k.capacity();
  const FundamentalDiagram g(Greenshields{4.0 * c / 100.0, 100.0});
  ASSERT_NEAR(g.capacity(), c, 1e-12);
  for (const auto* fd : {&k, &g}) {
    for (int i = 0; i <= 2000; ++i) {
      const auto u = from_density(*fd, fd->rho_jam() * i / 2000.0);
      const bool on_uc_branch = std::abs(u.supply - c) <= 1e-9 && u.demand >= -1e-9 && u.demand <= c + 1e-9;
      const bool on_oc_branch = std::abs(u.demand - c) <= 1e-9 && u.supply >= -1e-9 && u.supply <= c + 1e-9;
      EXPECT_TRUE(on_uc_branch || on_oc_branch);
    }
  }
  // Both images cover both branches densely: every flux level is hit on each branch.
  for (int j = 0; j <= 50; ++j) {
    const double q = c * j / 50.0;
    for (const auto* fd : {&k, &g}) {
      EXPECT_NEAR(from_density(*fd, fd->inv_demand(q)).demand, q, 1e-9);
      EXPECT_NEAR(from_density(*fd, fd->inv_supply(q)).supply, q, 1e-9);
    }
  }
}

TEST(Validate, CapacityMismatch) {
  EXPECT_THROW(validate({0.5, 0.8}, 1.0), StateError);
  EXPECT_NO_THROW(validate({0.5, 1.0}, 1.0));
}

TEST(Printing, StateAndClassification) {
  std::ostringstream os;
  os << SDState{0.5, 1.0};
  EXPECT_EQ(os.str(), "(D=0.5, S=1)");
  EXPECT_EQ(to_string(Classification::StrictlyOverCritical), "SOC");
}

#pragma once

// Randomised property checks over all modules, driven by one seed.
//
// The homogeneous case table here is an oracle written from densities alone:
// it never calls the supply-demand solver, so agreement between the two is
// evidence rather than tautology.

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "lwr/fundamental_diagram.hpp"
#include "lwr/godunov.hpp"
#include "lwr/riemann.hpp"
#include "lwr/ring.hpp"
#include "lwr/supply_demand.hpp"

namespace lwr::verify {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// One random diagram of each family with physically plausible scales.
inline std::vector<FundamentalDiagram> random_diagrams(Rng& rng) {
  std::vector<FundamentalDiagram> out;
  out.emplace_back(Greenshields{uniform(rng, 0.01, 0.04), uniform(rng, 100.0, 300.0)});
  const double rj = uniform(rng, 100.0, 300.0);
  const auto tri = Triangular::from_critical(uniform(rng, 0.01, 0.04), rj, uniform(rng, 0.15, 0.4) * rj);
  if (uniform(rng, 0.0, 1.0) < 0.5) {
    out.emplace_back(tri);
  } else {
    // Trapezoid: clip the apex.
    out.emplace_back(Triangular{tri.v_free, tri.v_cong, tri.rho_jam,
                                uniform(rng, 0.6, 0.95) * tri.v_free * tri.v_cong * rj / (tri.v_free + tri.v_cong)});
  }
  out.emplace_back(KernerKonhauser{std::round(uniform(rng, 1.0, 3.0))});
  return out;
}

/// The six homogeneous configurations, numbered as in the usual case analysis:
/// 1 SUC|UC, 2 OC|UC, 3 OC|SOC, 4 SUC|OC with q1<q2, 5 SUC|SOC with q1>q2, 6 SUC|SOC with q1=q2.
struct CaseExpectation {
  int number = 0;
  double flux = 0.0;
  double rho_stat_up = 0.0;
  double rho_stat_down = 0.0;
  WaveKind up_kind = WaveKind::None;
  WaveDirection up_direction = WaveDirection::Zero;
  WaveKind down_kind = WaveKind::None;
  WaveDirection down_direction = WaveDirection::Zero;
};

/// Expected solution of a homogeneous Riemann problem from the densities only.
inline CaseExpectation homogeneous_case(const FundamentalDiagram& fd, double r1, double r2, double tie = 1e-9) {
  const double rc = fd.rho_crit();
  const double c = fd.capacity();
  const double q1 = fd.flux(r1);
  const double q2 = fd.flux(r2);
  const bool suc1 = r1 < rc && q1 < c - tie;
  const bool uc2 = r2 <= rc || q2 >= c - tie;
  const bool soc2 = r2 > rc && q2 < c - tie;
  CaseExpectation e;
  const auto set_up = [&](WaveKind k) {
    e.up_kind = k;
    e.up_direction = k == WaveKind::None ? WaveDirection::Zero : WaveDirection::Backward;
  };
  const auto set_down = [&](WaveKind k) {
    e.down_kind = k;
    e.down_direction = k == WaveKind::None ? WaveDirection::Zero : WaveDirection::Forward;
  };
  const auto compare = [&](double a, double b, WaveKind lt, WaveKind gt) {
    if (std::abs(a - b) <= 1e-12 * fd.rho_jam()) return WaveKind::None;
    return a < b ? lt : gt;
  };
  if (suc1 && uc2) {
    e.number = 1;
    e.flux = q1;
    e.rho_stat_up = e.rho_stat_down = r1;
    set_down(compare(r1, r2, WaveKind::Shock, WaveKind::Rarefaction));
  } else if (!suc1 && uc2) {
    e.number = 2;
    e.flux = c;
    e.rho_stat_up = e.rho_stat_down = rc;
    set_up(r1 > rc && q1 < c - tie ? WaveKind::Rarefaction : WaveKind::None);
    set_down(r2 < rc && q2 < c - tie ? WaveKind::Rarefaction : WaveKind::None);
  } else if (!suc1 && soc2) {
    e.number = 3;
    e.flux = q2;
    e.rho_stat_up = e.rho_stat_down = r2;
    set_up(compare(r1, r2, WaveKind::Shock, WaveKind::Rarefaction));
  } else if (std::abs(q1 - q2) <= tie) {
    e.number = 6;
    e.flux = q1;
    e.rho_stat_up = r1;
    e.rho_stat_down = r2;
  } else if (q1 < q2) {
    e.number = 4;
    e.flux = q1;
    e.rho_stat_up = e.rho_stat_down = r1;
    set_down(WaveKind::Shock);
  } else {
    e.number = 5;
    e.flux = q2;
    e.rho_stat_up = e.rho_stat_down = r2;
    set_up(WaveKind::Shock);
  }
  return e;
}

/// Densities (rho1, rho2) realising case `number` on `fd`.
inline std::pair<double, double> sample_case(int number, const FundamentalDiagram& fd, Rng& rng) {
  const double rc = fd.rho_crit();
  const double rr = fd.rho_crit_right();
  const double rj = fd.rho_jam();
  const auto below = [&] { return uniform(rng, 0.02, 0.98) * rc; };
  const auto above = [&] { return rr + uniform(rng, 0.02, 0.98) * (rj - rr); };
  switch (number) {
    case 1: return {below(), uniform(rng, 0.0, 1.0) < 0.2 ? rc : below()};
    case 2: return {uniform(rng, 0.0, 1.0) < 0.2 ? rc : above(), uniform(rng, 0.0, 1.0) < 0.2 ? rc : below()};
    case 3: return {uniform(rng, 0.0, 1.0) < 0.2 ? rc : above(), above()};
    case 4:
    case 5: {
      const double qa = uniform(rng, 0.02, 0.48) * fd.capacity();
      const double qb = uniform(rng, 0.52, 0.98) * fd.capacity();
      return number == 4 ? std::pair{fd.inv_demand(qa), fd.inv_supply(qb)}
                         : std::pair{fd.inv_demand(qb), fd.inv_supply(qa)};
    }
    default: {
      const double q = uniform(rng, 0.05, 0.95) * fd.capacity();
      return {fd.inv_demand(q), fd.inv_supply(q)};
    }
  }
}

struct PropertyResult {
  std::string name;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::string first_failure;

  explicit PropertyResult(std::string n) : name(std::move(n)) {}

  void check(bool ok, const std::function<std::string()>& detail) {
    ++checks;
    if (!ok) {
      if (failures == 0) first_failure = detail();
      ++failures;
    }
  }
};

struct Summary {
  std::vector<PropertyResult> results;
  bool passed() const {
    for (const auto& r : results) {
      if (r.failures > 0) return false;
    }
    return true;
  }
};

inline SDState random_state(const FundamentalDiagram& fd, Rng& rng) {
  return from_density(fd, uniform(rng, 0.0, fd.rho_jam()));
}

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Every property, `trials` rounds each, on diagrams drawn from `seed`.
inline Summary run_all(std::uint64_t seed, std::size_t trials) {
  Rng rng(seed);
  PropertyResult sd_cap{"max{D,S} = C"};
  PropertyResult eo{"D + g = C and S + h = C"};
  PropertyResult inverse{"inverse demand/supply round trip"};
  PropertyResult osher{"sd_flux = osher_flux (1e-12 relative)"};
  PropertyResult min_rule{"boundary flux = min{D1, S2}"};
  PropertyResult indep{"solution independent of S1 and D2"};
  PropertyResult stable{"stationary states are stationary"};
  PropertyResult waves{"upstream waves backward, downstream forward"};
  PropertyResult table{"homogeneous six-case table"};
  PropertyResult first{"first interface flux = boundary flux for any dt"};
  PropertyResult conserve{"ring conserves vehicles and density bounds"};
  PropertyResult ring_count{"ring prediction reproduces N"};

  for (std::size_t t = 0; t < trials; ++t) {
    const auto fds = random_diagrams(rng);
    for (const auto& fd : fds) {
      const auto name = to_string(fd.family());
      for (int k = 0; k < 20; ++k) {
        const double r = uniform(rng, 0.0, fd.rho_jam());
        const auto u = from_density(fd, r);
        sd_cap.check(std::abs(u.capacity() - fd.capacity()) <= kFluxTol,
                     [&] { return name + " rho=" + std::to_string(r); });
        const auto split = fd.eo_split(r);
        eo.check(std::abs(u.demand + split.g - fd.capacity()) <= kFluxTol &&
                     std::abs(u.supply + split.h - fd.capacity()) <= kFluxTol,
                 [&] { return name + " rho=" + std::to_string(r); });
        const double back_d = fd.inv_demand(u.demand);
        const double back_s = fd.inv_supply(u.supply);
        const bool on_plateau = r > fd.rho_crit() && r < fd.rho_crit_right();
        inverse.check(on_plateau || (std::abs(back_d - std::min(r, fd.rho_crit())) <= 1e-8 * fd.rho_jam() &&
                                     std::abs(back_s - std::max(r, fd.rho_crit_right())) <= 1e-8 * fd.rho_jam()),
                      [&] { return name + " rho=" + std::to_string(r); });
        const double rl = uniform(rng, 0.0, fd.rho_jam());
        const double rr = uniform(rng, 0.0, fd.rho_jam());
        const double a = sd_flux(fd, rl, fd, rr);
        const double b = osher_flux(fd, rl, rr);
        osher.check(close_rel(a, b, 1e-12) || std::abs(a - b) <= 1e-12 * std::max(a, b), [&] {
          return name + " rho_l=" + std::to_string(rl) + " rho_r=" + std::to_string(rr) + " sd=" +
                 std::to_string(a) + " osher=" + std::to_string(b);
        });
      }
      for (int c = 1; c <= 6; ++c) {
        const auto [r1, r2] = sample_case(c, fd, rng);
        const auto want = homogeneous_case(fd, r1, r2);
        const auto sol = solve(RiemannProblem::from_densities(fd, r1, fd, r2));
        const bool ok = want.number == c && approx_equal(sol.boundary_flux, want.flux, 1e-9) &&
                        std::abs(to_density(fd, sol.stat_up) - want.rho_stat_up) <= 1e-6 * fd.rho_jam() &&
                        std::abs(to_density(fd, sol.stat_down) - want.rho_stat_down) <= 1e-6 * fd.rho_jam() &&
                        sol.wave_up.kind == want.up_kind && sol.wave_up.direction == want.up_direction &&
                        sol.wave_down.kind == want.down_kind && sol.wave_down.direction == want.down_direction;
        table.check(ok, [&] {
          return name + " case " + std::to_string(c) + " (oracle says " + std::to_string(want.number) +
                 ") rho1=" + std::to_string(r1) + " rho2=" + std::to_string(r2) + " got " +
                 describe(sol.wave_up) + " / " + describe(sol.wave_down);
        });
      }
    }

    for (int k = 0; k < 20; ++k) {
      const auto& up = fds[std::uniform_int_distribution<std::size_t>(0, fds.size() - 1)(rng)];
      const auto& down = fds[std::uniform_int_distribution<std::size_t>(0, fds.size() - 1)(rng)];
      const RiemannProblem p{up, down, random_state(up, rng), random_state(down, rng)};
      RiemannSolution sol;
      try {
        sol = solve(p);
        waves.check(sol.wave_up.speed_max <= kSpeedTol && sol.wave_down.speed_min >= -kSpeedTol,
                    [] { return std::string("wave on the wrong side"); });
      } catch (const std::logic_error& e) {
        waves.check(false, [&] { return std::string(e.what()); });
        continue;
      }
      min_rule.check(sol.boundary_flux == std::min(p.u1.demand, p.u2.supply), [] { return std::string("flux"); });

      auto q = p;
      if (is_over_critical(p.u1)) q.u1.supply = uniform(rng, 0.0, up.capacity());
      if (is_under_critical(p.u2)) q.u2.demand = uniform(rng, 0.0, down.capacity());
      const auto sq = solve(q);
      indep.check(sq.boundary_flux == sol.boundary_flux && approx_equal(sq.stat_up, sol.stat_up) &&
                      approx_equal(sq.stat_down, sol.stat_down),
                  [] { return std::string("perturbing S1/D2 changed the solution"); });

      const auto again = solve(RiemannProblem{up, down, sol.stat_up, sol.stat_down});
      stable.check(approx_equal(again.stat_up, sol.stat_up) && approx_equal(again.stat_down, sol.stat_down) &&
                       again.wave_up.kind == WaveKind::None && again.wave_down.kind == WaveKind::None,
                   [] { return std::string("stationary states moved"); });

      // Two cells, closed ends: the only flux is the one across the shared interface.
      const double r1 = to_density(up, p.u1);
      const double r2 = to_density(down, p.u2);
      const double dx = 0.01;
      const double fastest = std::max(up.max_wave_speed(), down.max_wave_speed());
      bool same = true;
      for (const double frac : {0.009, 0.09, 0.9}) {
        SimGrid g({up, down}, {0, 1}, {r1, r2}, dx,
                  Open{{StepFunction::constant(0.0), StepFunction::constant(0.0)}});
        const double dt = frac * dx / fastest;
        const double f = interface_fluxes(g, FluxRule::SupplyDemand, 0.0)[1];
        const double before = g.density(0);
        advance(g, {dt}, 0.0);
        const double from_update = (before - g.density(0)) * dx / dt;
        // The grid holds densities, so the states come back through the inverse.
        const double tol = 1e-9 * std::max(up.capacity(), down.capacity());
        same = same && std::abs(f - sol.boundary_flux) <= tol && std::abs(from_update - f) <= tol;
      }
      first.check(same, [] { return std::string("interface flux depends on dt"); });
    }

    {
      RingSpec spec{uniform(rng, 1.0, 5.0), 0.0, fds[2], FundamentalDiagram(KernerKonhauser{fds[2].lanes() + 1.0}),
                    0.0};
      spec.link1_length = uniform(rng, 0.1, 0.9) * spec.length;
      spec.vehicles = uniform(rng, 0.0, 1.0) * spec.max_vehicles();
      const auto pred = predict(spec);
      ring_count.check(close_rel(pred.vehicles(), spec.vehicles, 1e-6) || std::abs(pred.vehicles() - spec.vehicles) < 1e-6,
                       [&] { return "N=" + std::to_string(spec.vehicles); });
    }

    {
      const auto& fd = fds[std::uniform_int_distribution<std::size_t>(0, fds.size() - 1)(rng)];
      const std::size_t n = 50;
      std::vector<double> rho(n);
      for (auto& r : rho) r = uniform(rng, 0.0, fd.rho_jam());
      SimGrid g({fd}, std::vector<std::size_t>(n, 0), rho, 0.05, Ring{});
      const StepConfig cfg{0.9 * 0.05 / fd.max_wave_speed()};
      const double n0 = g.total_vehicles();
      bool bounded = true;
      for (int s = 0; s < 200; ++s) {
        advance(g, cfg, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          bounded = bounded && g.density(i) >= -kDensitySlack && g.density(i) <= fd.rho_jam() + kDensitySlack;
        }
      }
      conserve.check(bounded && close_rel(g.total_vehicles(), n0, 1e-12),
                     [&] { return "drift " + std::to_string(g.total_vehicles() - n0); });
    }
  }
  return {{sd_cap, eo, inverse, osher, min_rule, indep, stable, waves, table, first, conserve, ring_count}};
}

inline void print(std::ostream& os, const Summary& s) {
  for (const auto& r : s.results) {
    os << (r.failures == 0 ? "PASS " : "FAIL ") << r.name << " (" << r.checks << " checks";
    if (r.failures > 0) os << ", " << r.failures << " failed; first: " << r.first_failure;
    os << ")\n";
  }
  os << (s.passed() ? "all properties passed\n" : "property failures\n");
}

}  // namespace lwr::verify

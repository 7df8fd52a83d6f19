#pragma once

// Asymptotic stationary states of a two-link ring road whose first link is a
// bottleneck (C1 < C2): scenario selection by vehicle count, flux, shock
// position and the sites where interior states can appear.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lwr/errors.hpp"
#include "lwr/fundamental_diagram.hpp"
#include "lwr/godunov.hpp"
#include "lwr/riemann.hpp"
#include "lwr/root_finding.hpp"
#include "lwr/supply_demand.hpp"

namespace lwr {

/// Ring of length L: link 1 on [0, L1], link 2 on [L1, L]; traffic moves towards
/// increasing x and wraps from L back to 0.
struct RingSpec {
  double length;        // L, km
  double link1_length;  // L1, km
  FundamentalDiagram fd1;
  FundamentalDiagram fd2;
  double vehicles = 0.0;  // N

  double link2_length() const { return length - link1_length; }

  /// R1(inf) L1 + R2(inf) (L - L1).
  double max_vehicles() const { return fd1.rho_jam() * link1_length + fd2.rho_jam() * link2_length(); }

  void validate_geometry() const {
    if (!(length > 0.0 && link1_length >= 0.0 && link1_length <= length)) {
      throw DomainError("ring needs 0 <= L1 <= L");
    }
  }

  void validate() const {
    validate_geometry();
    if (!(fd1.capacity() < fd2.capacity())) {
      throw DomainError("link 1 must be the bottleneck: capacity(fd1) < capacity(fd2)");
    }
    if (!(vehicles >= -1e-9 && vehicles <= max_vehicles() + 1e-9)) {
      throw DomainError("vehicle count " + std::to_string(vehicles) + " outside [0, " +
                        std::to_string(max_vehicles()) + "]");
    }
  }
};

enum class RingScenario {
  BothUC,             // (a) both links under-critical
  CriticalWithShock,  // (b) link 1 critical, stationary shock on link 2
  CriticalWithSOC,    // (c) link 1 critical, link 2 strictly over-critical
  BothSOC,            // (d) both links strictly over-critical
};

enum class SiteSide { Minus, Plus };

/// Where an interior state may sit: just upstream (x-) or downstream (x+) of a position.
struct InteriorSite {
  double position;  // km, in [0, L)
  SiteSide side;
};

struct ProfileSegment {
  double start;    // km
  double end;      // km
  double density;  // veh/km
  SDState state;
};

struct RingPrediction {
  RingScenario scenario;
  double flux;                           // q, veh/s
  std::optional<double> shock_position;  // L2, km (scenario b)
  std::vector<ProfileSegment> profile;
  std::vector<InteriorSite> interior_sites;
  bool at_threshold = false;  // N within tolerance of a scenario boundary

  double vehicles() const {
    double n = 0.0;
    for (const auto& s : profile) {
      n += s.density * (s.end - s.start);
    }
    return n;
  }

  /// Average predicted density over [a, b].
  double average_density(double a, double b) const {
    double n = 0.0;
    for (const auto& s : profile) {
      const double lo = std::max(a, s.start);
      const double hi = std::min(b, s.end);
      if (hi > lo) {
        n += s.density * (hi - lo);
      }
    }
    return n / (b - a);
  }
};

struct Thresholds {
  double uc_limit;   // N1 = R1(1) L1 + R2(C1/C2)(L - L1): largest count with both links UC
  double soc_onset;  // N3 = R1(1) L1 + R2(C2/C1)(L - L1): link 2 uniformly SOC
};

inline Thresholds thresholds(const RingSpec& spec) {
  spec.validate_geometry();
  const double c1 = spec.fd1.capacity();
  const double c2 = spec.fd2.capacity();
  const double crit1 = spec.fd1.rho_of_gamma(Ratio(1.0)) * spec.link1_length;
  return {crit1 + spec.fd2.rho_of_gamma(Ratio(c1 / c2)) * spec.link2_length(),
          crit1 + spec.fd2.rho_of_gamma(Ratio(c2 / c1)) * spec.link2_length()};
}

struct PredictOptions {
  /// |N - threshold| at or below this many vehicles is the boundary case.
  double boundary_tol = 1e-6;
};

inline std::string to_string(RingScenario s) {
  switch (s) {
    case RingScenario::BothUC: return "a";
    case RingScenario::CriticalWithShock: return "b";
    case RingScenario::CriticalWithSOC: return "c";
    case RingScenario::BothSOC: return "d";
  }
  return "?";
}

inline std::string describe(RingScenario s) {
  switch (s) {
    case RingScenario::BothUC: return "both links under-critical";
    case RingScenario::CriticalWithShock: return "link 1 critical, stationary shock on link 2";
    case RingScenario::CriticalWithSOC: return "link 1 critical, link 2 strictly over-critical";
    case RingScenario::BothSOC: return "both links strictly over-critical";
  }
  return "?";
}

inline RingPrediction predict(const RingSpec& spec, const PredictOptions& opt = {}) {
  spec.validate();
  const auto& fd1 = spec.fd1;
  const auto& fd2 = spec.fd2;
  const double c1 = fd1.capacity();
  const double c2 = fd2.capacity();
  const double l = spec.length;
  const double l1 = spec.link1_length;
  const double n = spec.vehicles;
  const auto th = thresholds(spec);

  RingPrediction p{};
  const auto two_links = [&](double q, SDState s1, SDState s2) {
    p.flux = q;
    p.profile = {{0.0, l1, to_density(fd1, s1), s1}, {l1, l, to_density(fd2, s2), s2}};
  };

  if (n <= th.uc_limit + opt.boundary_tol) {
    p.scenario = RingScenario::BothUC;
    const auto count = [&](double q) {
      return fd1.rho_of_gamma(Ratio(q / c1)) * l1 + fd2.rho_of_gamma(Ratio(q / c2)) * (l - l1);
    };
    const double q = n >= th.uc_limit ? c1 : numeric::solve_increasing(count, n, 0.0, c1);
    two_links(q, under_critical(q, c1), under_critical(q, c2));
    if (std::abs(n - th.uc_limit) <= opt.boundary_tol) {
      p.at_threshold = true;
      p.interior_sites.push_back({0.0, SiteSide::Minus});
    }
  } else if (n < th.soc_onset - opt.boundary_tol) {
    p.scenario = RingScenario::CriticalWithShock;
    p.flux = c1;
    const double rho_crit1 = fd1.rho_of_gamma(Ratio(1.0));
    const double rho_free2 = fd2.rho_of_gamma(Ratio(c1 / c2));
    const double rho_cong2 = fd2.rho_of_gamma(Ratio(c2 / c1));
    const double l2 = (n - (rho_crit1 - rho_free2) * l1 - rho_cong2 * l) / (rho_free2 - rho_cong2);
    p.shock_position = l2;
    p.profile = {{0.0, l1, rho_crit1, {c1, c1}},
                 {l1, l2, rho_free2, under_critical(c1, c2)},
                 {l2, l, rho_cong2, over_critical(c1, c2)}};
    p.interior_sites = {{l2, SiteSide::Minus}, {l2, SiteSide::Plus}};
  } else if (n <= th.soc_onset + opt.boundary_tol) {
    p.scenario = RingScenario::CriticalWithSOC;
    p.at_threshold = true;
    two_links(c1, {c1, c1}, over_critical(c1, c2));
    p.interior_sites.push_back({l1, SiteSide::Plus});
  } else {
    p.scenario = RingScenario::BothSOC;
    const auto count = [&](double q) {
      const Ratio g1 = q > 0.0 ? Ratio(c1 / q) : Ratio::infinite();
      const Ratio g2 = q > 0.0 ? Ratio(c2 / q) : Ratio::infinite();
      return fd1.rho_of_gamma(g1) * l1 + fd2.rho_of_gamma(g2) * (l - l1);
    };
    const double q = numeric::solve_decreasing(count, n, 0.0, c1);
    two_links(q, over_critical(q, c1), over_critical(q, c2));
  }
  return p;
}

/// Vehicles in rho(x) = a(x) (rho0 + amplitude sin(2 pi x / L)) on [0, L], with
/// a(x) given piecewise-smooth between `breakpoints` (sorted, inside (0, L)).
/// Composite Simpson, 10^4 panels per piece.
inline double vehicles_of_profile(double length, double rho0, double amplitude,
                                  const std::function<double(double)>& lanes,
                                  const std::vector<double>& breakpoints = {}, std::size_t panels = 10000) {
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), breakpoints.begin(), breakpoints.end());
  edges.push_back(length);
  double n = 0.0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double a = edges[k];
    const double b = edges[k + 1];
    // Lanes are sampled strictly inside the piece so a jump at a breakpoint is never hit.
    const double eps = 1e-12 * (b - a);
    const auto piece = [&](double x) {
      return lanes(std::clamp(x, a + eps, b - eps)) *
             (rho0 + amplitude * std::sin(2.0 * std::numbers::pi * x / length));
    };
    n += numeric::simpson(piece, a, b, panels);
  }
  return n;
}

/// Vehicles for the sinusoidal initial condition a(x)(rho0 + amplitude sin(2 pi x / L)),
/// with a(x) the lane count of each link's diagram. Closed form.
inline double vehicles_of_initial(const RingSpec& spec, double rho0, double amplitude) {
  spec.validate_geometry();
  const double l = spec.length;
  const double l1 = spec.link1_length;
  const double w = 2.0 * std::numbers::pi / l;
  const double a1 = spec.fd1.lanes();
  const double a2 = spec.fd2.lanes();
  constexpr int kChecks = 10000;
  for (int i = 0; i <= kChecks; ++i) {
    const double x = l * i / kChecks;
    const bool on1 = x <= l1;
    const double a = on1 ? a1 : a2;
    const double jam = on1 ? spec.fd1.rho_jam() : spec.fd2.rho_jam();
    const double r = a * (rho0 + amplitude * std::sin(w * x));
    if (r < -kDensitySlack || r > jam + kDensitySlack) {
      throw DomainError("initial density " + std::to_string(r) + " veh/km at x=" + std::to_string(x) +
                        " km outside [0, " + std::to_string(jam) + "]");
    }
  }
  const double sin_integral_1 = (1.0 - std::cos(w * l1)) / w;  // of sin(wx) over [0, L1]
  return a1 * (rho0 * l1 + amplitude * sin_integral_1) + a2 * (rho0 * (l - l1) - amplitude * sin_integral_1);
}

/// Ring grid with exact cell averages of the sinusoidal initial condition.
/// L1 must fall on a cell edge.
inline SimGrid ring_grid(const RingSpec& spec, std::size_t cells, double rho0, double amplitude) {
  spec.validate_geometry();
  vehicles_of_initial(spec, rho0, amplitude);  // range check
  const double dx = spec.length / static_cast<double>(cells);
  const double link1_cells = spec.link1_length / dx;
  const auto n1 = static_cast<std::size_t>(std::llround(link1_cells));
  if (std::abs(link1_cells - static_cast<double>(n1)) > 1e-6) {
    throw ConfigError("link 1 length is not a whole number of cells");
  }
  std::vector<std::size_t> index(cells, 1);
  std::fill(index.begin(), index.begin() + static_cast<long>(n1), 0);
  std::vector<double> rho(cells);
  const double w = 2.0 * std::numbers::pi / spec.length;
  for (std::size_t i = 0; i < cells; ++i) {
    const double xl = static_cast<double>(i) * dx;
    const double xr = xl + dx;
    const double a = i < n1 ? spec.fd1.lanes() : spec.fd2.lanes();
    rho[i] = a * (rho0 + amplitude * (std::cos(w * xl) - std::cos(w * xr)) / (w * dx));
  }
  return SimGrid({spec.fd1, spec.fd2}, std::move(index), std::move(rho), dx, Ring{});
}

enum class LinkRegime { UC, SOC, SS };

inline std::string to_string(LinkRegime r) {
  switch (r) {
    case LinkRegime::UC: return "UC";
    case LinkRegime::SOC: return "SOC";
    case LinkRegime::SS: return "SS";
  }
  return "?";
}

struct FeasibilityCell {
  LinkRegime link1;
  LinkRegime link2;
  bool feasible = false;
  std::optional<RingScenario> scenario;
  std::string reason;
};

struct FeasibilityTable {
  std::array<FeasibilityCell, 9> cells;  // row-major: link 1 regime, then link 2 regime

  const FeasibilityCell& at(LinkRegime r1, LinkRegime r2) const {
    return cells[static_cast<std::size_t>(r1) * 3 + static_cast<std::size_t>(r2)];
  }
  int feasible_count() const {
    int k = 0;
    for (const auto& c : cells) k += c.feasible ? 1 : 0;
    return k;
  }
};

/// Which pairs of link regimes can form a stationary ring.
///
/// Each combination is tested by building the implied states at both link
/// boundaries for a range of common fluxes q in (0, C1] and asking the Riemann
/// solver whether those states are their own stationary states.
inline FeasibilityTable feasibility_table(const RingSpec& spec) {
  spec.validate_geometry();
  const double c1 = spec.fd1.capacity();
  const double c2 = spec.fd2.capacity();
  if (!(c1 < c2)) {
    throw DomainError("feasibility table assumes link 1 is the bottleneck");
  }
  struct Ends {
    SDState upstream_end;
    SDState downstream_end;
  };
  const auto ends = [](LinkRegime r, double q, double c) -> Ends {
    switch (r) {
      case LinkRegime::UC: return {{q, c}, {q, c}};
      case LinkRegime::SOC: return {{c, q}, {c, q}};
      case LinkRegime::SS: return {{q, c}, {c, q}};
    }
    return {};
  };
  const auto stationary = [](const FundamentalDiagram& up, const SDState& a, const FundamentalDiagram& down,
                             const SDState& b) {
    const auto sol = solve(RiemannProblem{up, down, a, b});
    return approx_equal(sol.stat_up, a) && approx_equal(sol.stat_down, b);
  };
  const auto boundaries_hold = [&](LinkRegime r1, LinkRegime r2, double q) {
    const auto e1 = ends(r1, q, c1);
    const auto e2 = ends(r2, q, c2);
    const bool inner1 = r1 != LinkRegime::SS || stationary(spec.fd1, e1.upstream_end, spec.fd1, e1.downstream_end);
    const bool inner2 = r2 != LinkRegime::SS || stationary(spec.fd2, e2.upstream_end, spec.fd2, e2.downstream_end);
    return inner1 && inner2 && stationary(spec.fd1, e1.downstream_end, spec.fd2, e2.upstream_end) &&
           stationary(spec.fd2, e2.downstream_end, spec.fd1, e1.upstream_end);
  };
  // SOC and SS need strictly sub-capacity flux on their own link.
  const auto regime_allows = [&](LinkRegime r, double q, double c) { return r == LinkRegime::UC || q < c - kFluxTol; };

  FeasibilityTable table{};
  constexpr int kFluxSamples = 64;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      auto& cell = table.cells[i * 3 + j];
      cell.link1 = static_cast<LinkRegime>(i);
      cell.link2 = static_cast<LinkRegime>(j);
      for (int k = 1; k <= kFluxSamples && !cell.feasible; ++k) {
        const double q = c1 * k / kFluxSamples;
        if (regime_allows(cell.link1, q, c1) && regime_allows(cell.link2, q, c2) &&
            boundaries_hold(cell.link1, cell.link2, q)) {
          cell.feasible = true;
        }
      }
      if (cell.feasible) {
        using R = LinkRegime;
        if (cell.link1 == R::UC && cell.link2 == R::UC) cell.scenario = RingScenario::BothUC;
        if (cell.link1 == R::UC && cell.link2 == R::SS) cell.scenario = RingScenario::CriticalWithShock;
        if (cell.link1 == R::UC && cell.link2 == R::SOC) cell.scenario = RingScenario::CriticalWithSOC;
        if (cell.link1 == R::SOC && cell.link2 == R::SOC) cell.scenario = RingScenario::BothSOC;
      } else if (boundaries_hold(cell.link1, cell.link2, c1)) {
        cell.reason = "q=C1 contradicts q<C1";
      } else {
        cell.reason = "no common flux makes both boundaries stationary";
      }
    }
  }
  return table;
}

}  // namespace lwr

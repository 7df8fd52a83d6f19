#pragma once

// Riemann problem at a linear boundary between two homogeneous links, solved in
// supply-demand space: boundary flux, stationary states, interior states and the
// wave each link carries.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lwr/errors.hpp"
#include "lwr/fundamental_diagram.hpp"
#include "lwr/supply_demand.hpp"

namespace lwr {

/// Speeds closer to zero than this (km/s) count as zero when checking wave directions.
inline constexpr double kSpeedTol = 1e-8;

struct RiemannProblem {
  FundamentalDiagram fd_up;    // link 1, x < 0
  FundamentalDiagram fd_down;  // link 2, x > 0
  SDState u1;                  // initial upstream state
  SDState u2;                  // initial downstream state

  /// Builds the problem from initial densities on each link.
  static RiemannProblem from_densities(const FundamentalDiagram& up, double rho1,
                                       const FundamentalDiagram& down, double rho2) {
    return {up, down, from_density(up, rho1), from_density(down, rho2)};
  }

  void validate() const {
    lwr::validate(u1, fd_up.capacity());
    lwr::validate(u2, fd_down.capacity());
  }
};

enum class WaveKind { None, Shock, Rarefaction };
enum class WaveDirection { Backward, Zero, Forward };
enum class LinkSide { Upstream, Downstream };

struct Wave {
  WaveKind kind = WaveKind::None;
  WaveDirection direction = WaveDirection::Zero;
  // km/s. Shock: both equal the Rankine-Hugoniot speed. Rarefaction: characteristic
  // speeds at the left and right end states.
  double speed_min = 0.0;
  double speed_max = 0.0;
  double rho_left = 0.0;
  double rho_right = 0.0;
};

/// Interior state at the boundary on one link: unique, or a one-parameter family
/// bounded below in D and S (only when upstream demand equals downstream supply).
struct InteriorSet {
  bool unique = true;
  SDState representative;  // always admissible; the stationary state itself
  double min_demand = 0.0;
  double min_supply = 0.0;
  double capacity = 0.0;

  static InteriorSet single(const SDState& u) { return {true, u, u.demand, u.supply, u.capacity()}; }
  static InteriorSet family(const SDState& representative, double min_d, double min_s, double capacity) {
    return {false, representative, min_d, min_s, capacity};
  }

  bool contains(const SDState& u) const {
    if (unique) {
      return approx_equal(u, representative);
    }
    return approx_equal(u.capacity(), capacity) && u.demand >= min_demand - kFluxTol &&
           u.supply >= min_supply - kFluxTol;
  }
};

struct RiemannSolution {
  double boundary_flux = 0.0;
  SDState stat_up;
  SDState stat_down;
  InteriorSet interior_up;
  InteriorSet interior_down;
  Wave wave_up;
  Wave wave_down;
  // When D1 = S2 the stationary states may differ in density across x = 0: a
  // zero-speed shock sitting at the boundary, reported with the downstream link.
  std::optional<Wave> boundary_shock;
};

/// q_{1->2} = min{D1, S2}.
inline double boundary_flux(const RiemannProblem& p) { return std::min(p.u1.demand, p.u2.supply); }

/// Wave connecting two states of one homogeneous link.
///
/// Kinds follow the supply-demand case analysis: a density increase across the
/// wave is a shock, a decrease a rarefaction. Upstream-link waves may not travel
/// forward and downstream-link waves may not travel backward; a violation means
/// the caller produced an inadmissible stationary state and throws logic_error.
inline Wave classify_wave(const FundamentalDiagram& fd, const SDState& left, const SDState& right,
                          LinkSide side) {
  Wave w;
  if (approx_equal(left, right)) {
    return w;
  }
  const double rl = to_density(fd, left);
  const double rr = to_density(fd, right);
  w.rho_left = rl;
  w.rho_right = rr;
  if (rl == rr) {
    return w;
  }
  if (rl < rr) {
    w.kind = WaveKind::Shock;
    const double sigma = (fd.flux(rr) - fd.flux(rl)) / (rr - rl);
    w.speed_min = w.speed_max = sigma;
  } else {
    w.kind = WaveKind::Rarefaction;
    w.speed_min = fd.slope(rl, Side::Left);
    w.speed_max = fd.slope(rr, Side::Right);
  }
  if (w.speed_max <= kSpeedTol && w.speed_min >= -kSpeedTol) {
    w.direction = WaveDirection::Zero;
  } else if (w.speed_max <= kSpeedTol) {
    w.direction = WaveDirection::Backward;
  } else if (w.speed_min >= -kSpeedTol) {
    w.direction = WaveDirection::Forward;
  } else {
    throw std::logic_error("classify_wave: transonic rarefaction spans the boundary");
  }
  if (side == LinkSide::Upstream && w.direction == WaveDirection::Forward) {
    throw std::logic_error("classify_wave: forward wave on the upstream link");
  }
  if (side == LinkSide::Downstream && w.direction == WaveDirection::Backward) {
    throw std::logic_error("classify_wave: backward wave on the downstream link");
  }
  return w;
}

/// Upstream stationary state: (D1, C1), or (C1, S) with S < D1.
inline bool admissible_stationary_up(const SDState& u1, const SDState& cand) {
  const double c1 = u1.capacity();
  if (approx_equal(cand, SDState{u1.demand, c1})) {
    return true;
  }
  return approx_equal(cand.demand, c1) && cand.supply < u1.demand - kFluxTol && cand.supply >= -kFluxTol;
}

/// Downstream stationary state: (C2, S2), or (D, C2) with D < S2.
inline bool admissible_stationary_down(const SDState& u2, const SDState& cand) {
  const double c2 = u2.capacity();
  if (approx_equal(cand, SDState{c2, u2.supply})) {
    return true;
  }
  return approx_equal(cand.supply, c2) && cand.demand < u2.supply - kFluxTol && cand.demand >= -kFluxTol;
}

/// Upstream interior state: equal to a SOC stationary state, or for a UC
/// stationary state any state of the same diagram with S >= stat.D.
inline bool admissible_interior_up(const SDState& stat, const SDState& cand) {
  if (!approx_equal(cand.capacity(), stat.capacity())) {
    return false;
  }
  if (is_strictly_over_critical(stat)) {
    return approx_equal(cand, stat);
  }
  return cand.supply >= stat.demand - kFluxTol;
}

/// Downstream interior state: equal to a SUC stationary state, or for an OC
/// stationary state any state of the same diagram with D >= stat.S.
inline bool admissible_interior_down(const SDState& stat, const SDState& cand) {
  if (!approx_equal(cand.capacity(), stat.capacity())) {
    return false;
  }
  if (is_strictly_under_critical(stat)) {
    return approx_equal(cand, stat);
  }
  return cand.demand >= stat.supply - kFluxTol;
}

/// Boundary flux implied by the interior states: min{D(0-), S(0+)}.
inline double entropy_flux(const SDState& interior_up, const SDState& interior_down) {
  return std::min(interior_up.demand, interior_down.supply);
}

enum class StationaryPair { BothUC, BothOC, UpUcDownOc, Forbidden };

/// Possible pairs of stationary states across a linear boundary. A SOC upstream
/// link feeding a SUC downstream link cannot be stationary.
inline StationaryPair stationary_pair_check(const SDState& stat_up, const SDState& stat_down) {
  if (!approx_equal(flux_of(stat_up), flux_of(stat_down))) {
    throw StateError("stationary states carry different fluxes");
  }
  if (is_strictly_over_critical(stat_up) && is_strictly_under_critical(stat_down)) {
    return StationaryPair::Forbidden;
  }
  if (is_under_critical(stat_up) && is_under_critical(stat_down)) {
    return StationaryPair::BothUC;
  }
  if (is_under_critical(stat_up) && is_over_critical(stat_down)) {
    return StationaryPair::UpUcDownOc;
  }
  return StationaryPair::BothOC;
}

/// Stationary states, interior states, boundary flux and waves.
inline RiemannSolution solve(const RiemannProblem& p) {
  p.validate();
  const double c1 = p.fd_up.capacity();
  const double c2 = p.fd_down.capacity();
  const double d1 = p.u1.demand;
  const double s2 = p.u2.supply;

  RiemannSolution sol;
  sol.boundary_flux = boundary_flux(p);
  if (approx_equal(d1, s2)) {
    sol.stat_up = {d1, c1};
    sol.stat_down = {c2, s2};
    sol.interior_up = InteriorSet::family(sol.stat_up, d1, d1, c1);
    sol.interior_down = InteriorSet::family(sol.stat_down, s2, s2, c2);
    if (approx_equal(d1, c1)) {
      sol.interior_up = InteriorSet::single(sol.stat_up);
    }
    if (approx_equal(s2, c2)) {
      sol.interior_down = InteriorSet::single(sol.stat_down);
    }
  } else if (d1 < s2) {
    sol.stat_up = {d1, c1};
    sol.stat_down = {d1, c2};
    sol.interior_up = InteriorSet::single(sol.stat_up);
    sol.interior_down = InteriorSet::single(sol.stat_down);
  } else {
    sol.stat_up = {c1, s2};
    sol.stat_down = {c2, s2};
    sol.interior_up = InteriorSet::single(sol.stat_up);
    sol.interior_down = InteriorSet::single(sol.stat_down);
  }
  sol.wave_up = classify_wave(p.fd_up, p.u1, sol.stat_up, LinkSide::Upstream);
  sol.wave_down = classify_wave(p.fd_down, sol.stat_down, p.u2, LinkSide::Downstream);
  if (approx_equal(d1, s2)) {
    const double rl = to_density(p.fd_up, sol.stat_up);
    const double rr = to_density(p.fd_down, sol.stat_down);
    if (std::abs(rl - rr) > kDensitySlack) {
      sol.boundary_shock = Wave{WaveKind::Shock, WaveDirection::Zero, 0.0, 0.0, rl, rr};
    }
  }
  return sol;
}

/// Density of the self-similar solution at xi = x / t (km/s).
inline double self_similar_density(const RiemannProblem& p, const RiemannSolution& sol, double xi) {
  const auto on_link = [](const FundamentalDiagram& fd, const Wave& w, const SDState& far,
                          const SDState& near, bool upstream, double x) {
    const double rho_far = to_density(fd, far);
    const double rho_near = to_density(fd, near);
    const double rho_left = upstream ? rho_far : rho_near;
    const double rho_right = upstream ? rho_near : rho_far;
    switch (w.kind) {
      case WaveKind::None: return rho_near;
      case WaveKind::Shock: return x < w.speed_min ? rho_left : rho_right;
      case WaveKind::Rarefaction:
        if (x <= w.speed_min) return rho_left;
        if (x >= w.speed_max) return rho_right;
        // Fan: characteristic speed Q'(rho) = xi, Q' decreasing from rho_right to rho_left.
        return numeric::bisect_boundary([&](double r) { return fd.slope(r) <= x; }, rho_right, rho_left);
    }
    return rho_near;
  };
  if (xi < 0.0) {
    return on_link(p.fd_up, sol.wave_up, p.u1, sol.stat_up, true, xi);
  }
  return on_link(p.fd_down, sol.wave_down, p.u2, sol.stat_down, false, xi);
}

inline std::string to_string(WaveKind k) {
  switch (k) {
    case WaveKind::None: return "none";
    case WaveKind::Shock: return "shock";
    case WaveKind::Rarefaction: return "rarefaction";
  }
  return "?";
}

inline std::string to_string(WaveDirection d) {
  switch (d) {
    case WaveDirection::Backward: return "backward";
    case WaveDirection::Zero: return "zero-speed";
    case WaveDirection::Forward: return "forward";
  }
  return "?";
}

inline std::string to_string(StationaryPair s) {
  switch (s) {
    case StationaryPair::BothUC: return "both UC";
    case StationaryPair::BothOC: return "both OC";
    case StationaryPair::UpUcDownOc: return "upstream UC, downstream OC";
    case StationaryPair::Forbidden: return "forbidden (SOC upstream, SUC downstream)";
  }
  return "?";
}

inline std::string describe(const Wave& w) {
  if (w.kind == WaveKind::None) {
    return "no wave";
  }
  return to_string(w.direction) + " " + to_string(w.kind);
}

}  // namespace lwr

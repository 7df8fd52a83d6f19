#pragma once

// Text reports (4 decimals, units spelled out) and CSV tables (6 significant digits).

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <ostream>
#include <string>
#include <vector>

#include "lwr/godunov.hpp"
#include "lwr/riemann.hpp"
#include "lwr/ring.hpp"
#include "lwr/supply_demand.hpp"
#include "lwr/units.hpp"

namespace lwr::report {

inline std::string state_line(const FundamentalDiagram& fd, const SDState& u) {
  return fmt::format("D={:.4f} veh/s  S={:.4f} veh/s  rho={:.4f} veh/km  class={}", u.demand, u.supply,
                     to_density(fd, u), to_string(classify(u)));
}

inline std::string interior_line(const InteriorSet& s) {
  if (s.unique) return "unique (the stationary state)";
  return fmt::format("family with D >= {:.4f} veh/s, S >= {:.4f} veh/s, max{{D,S}} = {:.4f} veh/s", s.min_demand,
                     s.min_supply, s.capacity);
}

inline std::string wave_line(const Wave& w) {
  if (w.kind == WaveKind::None) return "no wave";
  if (w.kind == WaveKind::Shock) {
    return fmt::format("{}, speed {:.4f} m/s, rho {:.4f} -> {:.4f} veh/km", describe(w),
                       units::m_per_s_from_km_per_s(w.speed_min), w.rho_left, w.rho_right);
  }
  return fmt::format("{}, speeds [{:.4f}, {:.4f}] m/s, rho {:.4f} -> {:.4f} veh/km", describe(w),
                     units::m_per_s_from_km_per_s(w.speed_min), units::m_per_s_from_km_per_s(w.speed_max),
                     w.rho_left, w.rho_right);
}

/// "C" when the flux equals a common capacity, "C1"/"C2" for one link's capacity.
inline std::string flux_label(double q, double c1, double c2) {
  const bool at1 = approx_equal(q, c1);
  const bool at2 = approx_equal(q, c2);
  if (at1 && at2) return "C";
  if (at1) return "C1";
  if (at2) return "C2";
  return fmt::format("{:.4f} veh/s", q);
}

inline void write_riemann_report(std::ostream& os, const RiemannProblem& p, const RiemannSolution& s) {
  const double c1 = p.fd_up.capacity();
  const double c2 = p.fd_down.capacity();
  fmt::print(os, "riemann problem\n");
  fmt::print(os, "  upstream diagram: {} (C1={:.4f} veh/s)\n", to_string(p.fd_up.family()), c1);
  fmt::print(os, "  downstream diagram: {} (C2={:.4f} veh/s)\n", to_string(p.fd_down.family()), c2);
  fmt::print(os, "  initial upstream: {}\n", state_line(p.fd_up, p.u1));
  fmt::print(os, "  initial downstream: {}\n", state_line(p.fd_down, p.u2));
  fmt::print(os, "boundary flux: {:.4f} veh/s\n", s.boundary_flux);
  fmt::print(os, "stationary upstream: {}\n", state_line(p.fd_up, s.stat_up));
  fmt::print(os, "stationary downstream: {}\n", state_line(p.fd_down, s.stat_down));
  fmt::print(os, "interior upstream: {}\n", interior_line(s.interior_up));
  fmt::print(os, "interior downstream: {}\n", interior_line(s.interior_down));
  fmt::print(os, "wave upstream: {}\n", wave_line(s.wave_up));
  fmt::print(os, "wave downstream: {}\n", wave_line(s.wave_down));
  if (s.boundary_shock) {
    fmt::print(os, "stationary shock at x=0: rho {:.4f} -> {:.4f} veh/km\n", s.boundary_shock->rho_left,
               s.boundary_shock->rho_right);
  }
  fmt::print(os, "summary: {} / {}, q={}\n", describe(s.wave_up), describe(s.wave_down),
             flux_label(s.boundary_flux, c1, c2));
}

/// xi = x/t samples of the self-similar solution.
inline void write_riemann_profile_csv(std::ostream& os, const RiemannProblem& p, const RiemannSolution& s,
                                      double xi_min, double xi_max, std::size_t samples) {
  fmt::print(os, "xi_m_s,rho_veh_km,q_veh_s,D_veh_s,S_veh_s\n");
  for (std::size_t i = 0; i < samples; ++i) {
    const double xi = xi_min + (xi_max - xi_min) * static_cast<double>(i) / static_cast<double>(samples - 1);
    const auto& fd = xi < 0.0 ? p.fd_up : p.fd_down;
    const double rho = self_similar_density(p, s, xi);
    const auto u = from_density(fd, rho);
    fmt::print(os, "{:.6g},{:.6g},{:.6g},{:.6g},{:.6g}\n", units::m_per_s_from_km_per_s(xi), rho, fd.flux(rho),
               u.demand, u.supply);
  }
}

inline void write_snapshots_csv(std::ostream& os, const SimRecord& rec) {
  fmt::print(os, "t,cell,x_km,rho_veh_km,v_m_s,q_veh_s\n");
  const auto& g = rec.final_grid;
  for (const auto& snap : rec.snapshots) {
    for (std::size_t i = 0; i < snap.density.size(); ++i) {
      fmt::print(os, "{:.6g},{},{:.6g},{:.6g},{:.6g},{:.6g}\n", snap.time, i, g.x_center(i), snap.density[i],
                 units::m_per_s_from_km_per_s(snap.speed[i]), snap.flux[i]);
    }
  }
}

/// Detection result: the cells, or why detection was not attempted.
struct Detection {
  std::vector<InteriorCell> cells;
  std::string skipped;  // non-empty when the run had not settled
};

inline Detection detect(const SimRecord& rec, const DetectOptions& opt) {
  try {
    return {detect_interior_states(rec, opt), ""};
  } catch (const StateError& e) {
    return {{}, e.what()};
  }
}

inline void write_simulation_report(std::ostream& os, const SimRecord& rec, double cfl, const Detection& det) {
  const auto& g = rec.final_grid;
  fmt::print(os, "simulation\n");
  fmt::print(os, "  topology: {}\n", g.is_ring() ? "ring" : "open");
  fmt::print(os, "  cells: {}  dx: {:.4f} m  dt: {:.4f} s  steps: {}  CFL: {:.4f}\n", g.size(),
             units::m_from_km(g.dx()), rec.dt, rec.steps, cfl);
  fmt::print(os, "  final time: {:.4f} s\n", rec.dt * static_cast<double>(rec.steps));
  fmt::print(os, "conservation\n");
  fmt::print(os, "  initial vehicles: {:.4f} veh\n", rec.initial_vehicles);
  fmt::print(os, "  inflow: {:.4f} veh\n", rec.cumulative_inflow);
  fmt::print(os, "  outflow: {:.4f} veh\n", rec.cumulative_outflow);
  fmt::print(os, "  final vehicles: {:.4f} veh\n", rec.final_vehicles);
  fmt::print(os, "  residual: {:.4e} veh\n", rec.conservation_residual());
  fmt::print(os, "convergence: last max per-step change {:.4e} veh/km\n", rec.convergence);
  if (!det.skipped.empty()) {
    fmt::print(os, "interior states: not evaluated ({})\n", det.skipped);
    return;
  }
  fmt::print(os, "interior states: {}\n", det.cells.size());
  for (const auto& c : det.cells) {
    fmt::print(os, "  cell {}  x={:.4f} km  rho={:.4f} veh/km  q={:.4f} veh/s\n", c.cell, c.x_km, c.density, c.flux);
  }
}

inline std::string site_label(const InteriorSite& s, const RingSpec& spec) {
  const char* side = s.side == SiteSide::Minus ? "-" : "+";
  if (s.position == 0.0 && s.side == SiteSide::Minus) return "x=0- (=L-)";
  if (std::abs(s.position - spec.link1_length) < 1e-12) return std::string("x=L1") + side;
  return fmt::format("x={:.4f} km{}", s.position, side);
}

inline void write_ring_report(std::ostream& os, const RingSpec& spec, const RingPrediction& p) {
  const auto th = thresholds(spec);
  fmt::print(os, "ring road\n");
  fmt::print(os, "  L: {:.4f} km  L1: {:.4f} km\n", spec.length, spec.link1_length);
  fmt::print(os, "  C1: {:.4f} veh/s  C2: {:.4f} veh/s\n", spec.fd1.capacity(), spec.fd2.capacity());
  fmt::print(os, "  N: {:.4f} veh\n", spec.vehicles);
  fmt::print(os, "  N1: {:.4f} veh  N3: {:.4f} veh  Nmax: {:.4f} veh\n", th.uc_limit, th.soc_onset,
             spec.max_vehicles());
  fmt::print(os, "scenario: {} ({}){}\n", to_string(p.scenario), describe(p.scenario),
             p.at_threshold ? ", at threshold" : "");
  fmt::print(os, "q: {:.4f} veh/s\n", p.flux);
  if (p.shock_position) {
    fmt::print(os, "L2: {:.4f} km\n", *p.shock_position);
  }
  for (const auto& s : p.profile) {
    fmt::print(os, "  [{:.4f}, {:.4f}] km: rho={:.4f} veh/km  D={:.4f} veh/s  S={:.4f} veh/s\n", s.start, s.end,
               s.density, s.state.demand, s.state.supply);
  }
  fmt::print(os, "interior-state sites:");
  if (p.interior_sites.empty()) fmt::print(os, " none");
  for (const auto& s : p.interior_sites) fmt::print(os, " {}", site_label(s, spec));
  fmt::print(os, "\n");
}

inline void write_ring_profile_csv(std::ostream& os, const RingPrediction& p) {
  fmt::print(os, "x_start_km,x_end_km,rho_veh_km,q_veh_s,D_veh_s,S_veh_s\n");
  for (const auto& s : p.profile) {
    fmt::print(os, "{:.6g},{:.6g},{:.6g},{:.6g},{:.6g},{:.6g}\n", s.start, s.end, s.density, flux_of(s.state),
               s.state.demand, s.state.supply);
  }
}

}  // namespace lwr::report

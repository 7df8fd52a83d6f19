#pragma once

// First-order Godunov finite-volume simulator for homogeneous and
// inhomogeneous roads, open or periodic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lwr/errors.hpp"
#include "lwr/fundamental_diagram.hpp"
#include "lwr/root_finding.hpp"
#include "lwr/supply_demand.hpp"

namespace lwr {

enum class FluxRule { SupplyDemand, Osher };

/// Piecewise-constant function of time: value of the last breakpoint with t_start <= t.
struct StepFunction {
  std::vector<std::pair<double, double>> steps;  // (t_start s, value)

  static StepFunction constant(double v) { return {{{0.0, v}}}; }

  double at(double t) const {
    double v = steps.empty() ? 0.0 : steps.front().second;
    for (const auto& [start, value] : steps) {
      if (start <= t) {
        v = value;
      }
    }
    return v;
  }
};

/// Open-road boundary data: demand entering at the left, supply available at the right (veh/s).
struct BoundarySpec {
  StepFunction left_demand;
  StepFunction right_supply;
};

struct Ring {};
struct Open {
  BoundarySpec boundary;
};
using Topology = std::variant<Ring, Open>;

/// Homogeneous stretch of road.
struct Segment {
  FundamentalDiagram fd;
  double length;  // km
};

class SimGrid {
 public:
  SimGrid(std::vector<FundamentalDiagram> diagrams, std::vector<std::size_t> cell_diagram,
          std::vector<double> rho, double dx, Topology topology)
      : diagrams_(std::move(diagrams)),
        cell_diagram_(std::move(cell_diagram)),
        rho_(std::move(rho)),
        dx_(dx),
        topology_(std::move(topology)) {
    if (rho_.size() < 2 || rho_.size() != cell_diagram_.size()) {
      throw ConfigError("grid needs at least two cells and one diagram index per cell");
    }
    if (!(dx_ > 0.0)) {
      throw ConfigError("grid spacing must be positive");
    }
    for (std::size_t i = 0; i < rho_.size(); ++i) {
      if (cell_diagram_[i] >= diagrams_.size()) {
        throw ConfigError("cell " + std::to_string(i) + " refers to a missing diagram");
      }
      rho_[i] = diagram(i).checked(rho_[i]);
    }
  }

  /// Lays segments end to end; every segment length must be a whole number of cells.
  /// Densities start at zero.
  static SimGrid from_segments(const std::vector<Segment>& segments, double dx, Topology topology) {
    std::vector<FundamentalDiagram> diagrams;
    std::vector<std::size_t> index;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const double cells = segments[s].length / dx;
      const auto n = static_cast<std::size_t>(std::llround(cells));
      if (n == 0 || std::abs(cells - static_cast<double>(n)) > 1e-6) {
        throw ConfigError("segment " + std::to_string(s) + " length " +
                          std::to_string(segments[s].length) +
                          " km is not a whole number of cells of " + std::to_string(dx) + " km");
      }
      diagrams.push_back(segments[s].fd);
      index.insert(index.end(), n, s);
    }
    std::vector<double> rho(index.size(), 0.0);
    return SimGrid(std::move(diagrams), std::move(index), std::move(rho), dx, std::move(topology));
  }

  std::size_t size() const { return rho_.size(); }
  double dx() const { return dx_; }
  double length() const { return dx_ * static_cast<double>(rho_.size()); }
  double x_center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx_; }

  const std::vector<double>& densities() const { return rho_; }
  double density(std::size_t i) const { return rho_[i]; }
  void set_density(std::size_t i, double rho) { rho_[i] = diagram(i).checked(rho); }
  /// Raw write used by the stepper; no clamping so that the update stays conservative.
  double& density_ref(std::size_t i) { return rho_[i]; }

  const FundamentalDiagram& diagram(std::size_t i) const { return diagrams_[cell_diagram_[i]]; }
  std::size_t diagram_index(std::size_t i) const { return cell_diagram_[i]; }
  const std::vector<FundamentalDiagram>& diagrams() const { return diagrams_; }

  const Topology& topology() const { return topology_; }
  bool is_ring() const { return std::holds_alternative<Ring>(topology_); }

  /// Sum of rho_i dx (veh), compensated summation.
  double total_vehicles() const {
    double sum = 0.0;
    double comp = 0.0;
    for (double r : rho_) {
      const double y = r * dx_ - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    return sum;
  }

  double max_wave_speed() const {
    double v = 0.0;
    for (const auto& fd : diagrams_) {
      v = std::max(v, fd.max_wave_speed());
    }
    return v;
  }

 private:
  std::vector<FundamentalDiagram> diagrams_;
  std::vector<std::size_t> cell_diagram_;
  std::vector<double> rho_;
  double dx_;
  Topology topology_;
};

struct StepConfig {
  double dt = 0.0;  // s
  FluxRule flux_rule = FluxRule::SupplyDemand;
  bool override_cfl = false;
};

/// Guard applied unless StepConfig::override_cfl is set; CFL above 1 is always rejected.
inline constexpr double kCflGuard = 0.95;

/// max |Q'| dt / dx over the diagrams on the grid.
inline double cfl_number(const SimGrid& grid, double dt) { return grid.max_wave_speed() * dt / grid.dx(); }

inline void check_cfl(const SimGrid& grid, const StepConfig& cfg) {
  if (!(cfg.dt > 0.0)) {
    throw ConfigError("time step must be positive");
  }
  const double cfl = cfl_number(grid, cfg.dt);
  const double limit = cfg.override_cfl ? 1.0 : kCflGuard;
  if (cfl > limit + 1e-12) {
    std::ostringstream os;
    os << "CFL number " << cfl << " exceeds " << limit;
    if (!cfg.override_cfl && cfl <= 1.0) {
      os << " (pass --override-cfl to allow up to 1)";
    }
    throw ConfigError(os.str());
  }
}

/// Supply-demand flux min{D_left(rho_left), S_right(rho_right)}.
inline double sd_flux(const FundamentalDiagram& fd_left, double rho_left, const FundamentalDiagram& fd_right,
                      double rho_right) {
  return std::min(fd_left.demand(rho_left), fd_right.supply(rho_right));
}

/// Osher's form of the Godunov flux for one diagram: the minimum of Q over
/// [rho_l, rho_r] when rho_l < rho_r, the maximum over [rho_r, rho_l] otherwise.
/// Evaluated by brute force (a dense scan refined around the best sample), using
/// nothing but Q itself.
inline double osher_flux(const FundamentalDiagram& fd, double rho_left, double rho_right,
                         std::size_t samples = 10000) {
  rho_left = fd.checked(rho_left);
  rho_right = fd.checked(rho_right);
  if (rho_left == rho_right) {
    return fd.raw_flux(rho_left);
  }
  const bool minimise = rho_left < rho_right;
  const double lo = std::min(rho_left, rho_right);
  const double hi = std::max(rho_left, rho_right);
  const double sign = minimise ? -1.0 : 1.0;
  const auto objective = [&](double r) { return sign * fd.raw_flux(std::clamp(r, lo, hi)); };
  const auto at = [&](std::size_t i) {
    return i == samples ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples);
  };
  std::size_t best = 0;
  double best_value = objective(lo);
  for (std::size_t i = 1; i <= samples; ++i) {
    const double v = objective(at(i));
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  // An extremum within one step of an end still needs the refinement.
  const auto refined =
      numeric::golden_section_max(objective, at(best == 0 ? 0 : best - 1), at(std::min(best + 1, samples)), 0.0);
  best_value = std::max(best_value, refined.value);
  return sign * best_value;
}

/// Engquist-Osher flux in density form: C - g(k_left) - h(k_right) for one diagram.
/// Agrees with the Godunov flux except across a transonic shock (rho_l < rho_c < rho_r).
inline double eo_flux(const FundamentalDiagram& fd, double rho_left, double rho_right) {
  return fd.capacity() - fd.eo_split(rho_left).g - fd.eo_split(rho_right).h;
}

/// Interface fluxes for the current state (veh/s).
///
/// Open road: n + 1 values, entry i is the interface on the left of cell i and
/// entry n the right boundary. Ring: n values, entry 0 joins cell n-1 to cell 0.
inline std::vector<double> interface_fluxes(const SimGrid& grid, FluxRule rule, double t) {
  const std::size_t n = grid.size();
  std::vector<double> demand(n);
  std::vector<double> supply(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& fd = grid.diagram(i);
    const double r = fd.checked(grid.density(i));
    const double q = fd.raw_flux(r);
    demand[i] = r < fd.rho_crit() ? q : fd.capacity();
    supply[i] = r > fd.rho_crit_right() ? q : fd.capacity();
  }
  const auto between = [&](std::size_t l, std::size_t r) {
    if (rule == FluxRule::Osher && grid.diagram_index(l) == grid.diagram_index(r)) {
      return osher_flux(grid.diagram(l), grid.density(l), grid.density(r));
    }
    return std::min(demand[l], supply[r]);
  };
  std::vector<double> f;
  if (grid.is_ring()) {
    f.resize(n);
    f[0] = between(n - 1, 0);
    for (std::size_t i = 1; i < n; ++i) {
      f[i] = between(i - 1, i);
    }
  } else {
    const auto& bc = std::get<Open>(grid.topology()).boundary;
    f.resize(n + 1);
    f[0] = std::min(bc.left_demand.at(t), supply[0]);
    for (std::size_t i = 1; i < n; ++i) {
      f[i] = between(i - 1, i);
    }
    f[n] = std::min(demand[n - 1], bc.right_supply.at(t));
  }
  return f;
}

struct StepStats {
  double max_change = 0.0;  // max_i |rho_i^{j+1} - rho_i^j|, veh/km
  double inflow = 0.0;      // veh entering through the left boundary (open road)
  double outflow = 0.0;     // veh leaving through the right boundary (open road)
};

/// One conservative update in place. The CFL check is the caller's job (see run()).
inline StepStats advance(SimGrid& grid, const StepConfig& cfg, double t) {
  const auto f = interface_fluxes(grid, cfg.flux_rule, t);
  const std::size_t n = grid.size();
  const double ratio = cfg.dt / grid.dx();
  StepStats stats;
  for (std::size_t i = 0; i < n; ++i) {
    const double out = grid.is_ring() ? f[(i + 1) % n] : f[i + 1];
    const double change = ratio * (f[i] - out);
    grid.density_ref(i) += change;
    stats.max_change = std::max(stats.max_change, std::abs(change));
  }
  if (!grid.is_ring()) {
    stats.inflow = f[0] * cfg.dt;
    stats.outflow = f[n] * cfg.dt;
  }
  return stats;
}

/// rho^{j+1} = rho^j - dt/dx (q_{i+1/2} - q_{i-1/2}) after checking the CFL condition.
inline SimGrid step(SimGrid grid, const StepConfig& cfg, double t = 0.0) {
  check_cfl(grid, cfg);
  advance(grid, cfg, t);
  return grid;
}

struct Snapshot {
  double time;                  // s
  std::vector<double> density;  // veh/km
  std::vector<double> speed;    // km/s
  std::vector<double> flux;     // veh/s
  double max_change;            // last per-step change before this snapshot
};

struct SimRecord {
  std::vector<Snapshot> snapshots;
  SimGrid final_grid;
  double dt = 0.0;
  std::size_t steps = 0;
  double initial_vehicles = 0.0;
  double final_vehicles = 0.0;
  double cumulative_inflow = 0.0;
  double cumulative_outflow = 0.0;
  /// max per-cell |delta rho| of the final step (veh/km); zero when no step ran.
  double convergence = 0.0;

  /// initial + inflow - outflow - final, veh.
  double conservation_residual() const {
    return initial_vehicles + cumulative_inflow - cumulative_outflow - final_vehicles;
  }
};

inline Snapshot snapshot_of(const SimGrid& grid, double t, double max_change) {
  Snapshot s{t, grid.densities(), {}, {}, max_change};
  s.speed.resize(grid.size());
  s.flux.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& fd = grid.diagram(i);
    const double r = fd.checked(grid.density(i));
    s.flux[i] = fd.raw_flux(r);
    s.speed[i] = fd.speed(r);
  }
  return s;
}

/// Steps for `duration` seconds, snapshotting every `record_every` seconds
/// (<= 0 keeps only the first and last states).
inline SimRecord run(SimGrid grid, const StepConfig& cfg, double duration, double record_every) {
  check_cfl(grid, cfg);
  if (duration < 0.0) {
    throw ConfigError("duration must be nonnegative");
  }
  const auto steps = static_cast<std::size_t>(std::ceil(duration / cfg.dt - 1e-9));
  const std::size_t every =
      record_every > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(record_every / cfg.dt)))
                         : std::numeric_limits<std::size_t>::max();
  SimRecord rec{{}, grid, cfg.dt, steps, grid.total_vehicles(), 0.0, 0.0, 0.0, 0.0};
  rec.snapshots.push_back(snapshot_of(grid, 0.0, 0.0));
  double last_change = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    const double t = static_cast<double>(j) * cfg.dt;
    const auto stats = advance(grid, cfg, t);
    last_change = stats.max_change;
    rec.cumulative_inflow += stats.inflow;
    rec.cumulative_outflow += stats.outflow;
    const std::size_t done = j + 1;
    if (done % every == 0 || done == steps) {
      rec.snapshots.push_back(snapshot_of(grid, static_cast<double>(done) * cfg.dt, last_change));
    }
  }
  rec.final_vehicles = grid.total_vehicles();
  rec.convergence = last_change;
  rec.final_grid = std::move(grid);
  return rec;
}

struct InteriorCell {
  std::size_t cell;
  double x_km;     // cell centre
  double flux;     // veh/s
  double density;  // veh/km
};

struct DetectOptions {
  double steady_tol = 1e-10;  // max per-step density change, veh/km
  double jump = 0.5;          // minimum difference from both neighbours, veh/km
  std::size_t run_length = 3;
  double run_tol = 1e-3;      // spread allowed within each neighbouring run, veh/km
};

/// Single cells whose density stands apart from both neighbours while the
/// neighbouring runs of cells are uniform: the numerical trace of an interior state.
inline std::vector<InteriorCell> detect_interior_states(const SimRecord& record, const DetectOptions& opt = {}) {
  if (record.steps > 0 && !(record.convergence <= opt.steady_tol)) {
    std::ostringstream os;
    os << "simulation not converged: last per-step change " << record.convergence << " veh/km exceeds "
       << opt.steady_tol;
    throw StateError(os.str());
  }
  const SimGrid& g = record.final_grid;
  const std::size_t n = g.size();
  const bool ring = g.is_ring();
  const auto cell = [&](long k) -> std::optional<double> {
    if (ring) {
      const long m = static_cast<long>(n);
      return g.density(static_cast<std::size_t>(((k % m) + m) % m));
    }
    if (k < 0 || k >= static_cast<long>(n)) return std::nullopt;
    return g.density(static_cast<std::size_t>(k));
  };
  const auto uniform_run = [&](long from, long dir) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t s = 0; s < opt.run_length; ++s) {
      const auto v = cell(from + dir * static_cast<long>(s));
      if (!v) return false;
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
    return hi - lo <= opt.run_tol;
  };
  std::vector<InteriorCell> found;
  for (std::size_t i = 0; i < n; ++i) {
    const long k = static_cast<long>(i);
    const auto left = cell(k - 1);
    const auto right = cell(k + 1);
    if (!left || !right) continue;
    const double r = g.density(i);
    if (std::abs(r - *left) <= opt.jump || std::abs(r - *right) <= opt.jump) continue;
    if (!uniform_run(k - 1, -1) || !uniform_run(k + 1, +1)) continue;
    found.push_back({i, g.x_center(i), g.diagram(i).flux(g.diagram(i).checked(r)), r});
  }
  return found;
}

}  // namespace lwr

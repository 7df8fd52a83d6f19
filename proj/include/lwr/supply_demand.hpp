#pragma once

// Traffic states in supply-demand coordinates U = (D, S).

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "lwr/errors.hpp"
#include "lwr/fundamental_diagram.hpp"

namespace lwr {

enum class Classification {
  UnderCritical,
  StrictlyUnderCritical,
  OverCritical,
  StrictlyOverCritical,
  Critical,
};

struct SDState {
  double demand = 0.0;  // veh/s
  double supply = 0.0;  // veh/s

  /// max{D, S}; equals the capacity of the owning diagram for valid states.
  double capacity() const { return std::max(demand, supply); }
};

inline bool approx_equal(double a, double b, double tol = kFluxTol) { return std::abs(a - b) <= tol; }

inline bool approx_equal(const SDState& a, const SDState& b, double tol = kFluxTol) {
  return approx_equal(a.demand, b.demand, tol) && approx_equal(a.supply, b.supply, tol);
}

/// Exactly one of Critical, StrictlyUnderCritical, StrictlyOverCritical.
inline Classification classify(const SDState& u) {
  if (u.demand < u.supply - kFluxTol) return Classification::StrictlyUnderCritical;
  if (u.supply < u.demand - kFluxTol) return Classification::StrictlyOverCritical;
  return Classification::Critical;
}

/// UC: S = C, equivalently D <= S.
inline bool is_under_critical(const SDState& u) { return u.demand <= u.supply + kFluxTol; }
/// OC: D = C, equivalently S <= D.
inline bool is_over_critical(const SDState& u) { return u.supply <= u.demand + kFluxTol; }
inline bool is_strictly_under_critical(const SDState& u) {
  return classify(u) == Classification::StrictlyUnderCritical;
}
inline bool is_strictly_over_critical(const SDState& u) {
  return classify(u) == Classification::StrictlyOverCritical;
}

/// Throws StateError unless u is a state of a diagram with the given capacity.
inline void validate(const SDState& u, double capacity) {
  if (!(u.demand >= -kFluxTol && u.supply >= -kFluxTol)) {
    throw StateError("supply-demand state has a negative component");
  }
  if (!approx_equal(u.capacity(), capacity)) {
    throw StateError("supply-demand state (" + std::to_string(u.demand) + ", " +
                     std::to_string(u.supply) + ") inconsistent with capacity " +
                     std::to_string(capacity) + ": max{D,S} must equal C");
  }
}

inline SDState from_density(const FundamentalDiagram& fd, double rho) {
  return {fd.demand(rho), fd.supply(rho)};
}

/// D^{-1}(D) when D <= S, S^{-1}(S) otherwise.
inline double to_density(const FundamentalDiagram& fd, const SDState& u) {
  validate(u, fd.capacity());
  // Exactly critical: skip the inverse, which is square-root sensitive at the peak.
  if (u.demand >= fd.capacity() && u.supply >= fd.capacity()) {
    return fd.rho_crit();
  }
  if (u.demand <= u.supply) {
    return fd.inv_demand(std::min(u.demand, fd.capacity()));
  }
  return fd.inv_supply(std::min(u.supply, fd.capacity()));
}

/// q(U) = min{D, S}.
inline double flux_of(const SDState& u) { return std::min(u.demand, u.supply); }

/// gamma = D / S; infinite for a jammed state (S = 0 < D).
inline Ratio gamma_of(const SDState& u) {
  if (u.demand <= 0.0 && u.supply <= 0.0) {
    throw StateError("supply-demand ratio undefined for D = S = 0");
  }
  if (u.supply <= 0.0) {
    return Ratio::infinite();
  }
  return Ratio(u.demand / u.supply);
}

/// Under-critical state carrying flux q on a diagram of capacity C: (q, C).
inline SDState under_critical(double q, double capacity) { return {q, capacity}; }
/// Over-critical state carrying flux q on a diagram of capacity C: (C, q).
inline SDState over_critical(double q, double capacity) { return {capacity, q}; }

inline std::string to_string(Classification c) {
  switch (c) {
    case Classification::UnderCritical: return "UC";
    case Classification::StrictlyUnderCritical: return "SUC";
    case Classification::OverCritical: return "OC";
    case Classification::StrictlyOverCritical: return "SOC";
    case Classification::Critical: return "critical";
  }
  return "?";
}

inline std::ostream& operator<<(std::ostream& os, const SDState& u) {
  return os << "(D=" << u.demand << ", S=" << u.supply << ")";
}

}  // namespace lwr

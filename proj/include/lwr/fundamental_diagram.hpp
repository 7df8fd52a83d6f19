#pragma once

// Unimodal flux-density laws and the demand/supply transforms built on them.
//
// Units: density veh/km, flux veh/s, speed km/s (use lwr::units to convert).

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>

#include "lwr/errors.hpp"
#include "lwr/root_finding.hpp"

namespace lwr {

/// Slack accepted on densities beyond [0, rho_jam] before they are rejected.
inline constexpr double kDensitySlack = 1e-9;
/// Absolute tolerance for comparing fluxes (veh/s) wherever case logic depends on it.
inline constexpr double kFluxTol = 1e-9;

/// Q(rho) = v_free * rho * (1 - rho / rho_jam).
struct Greenshields {
  double v_free;   // km/s
  double rho_jam;  // veh/km
};

/// Q(rho) = min{v_free * rho, v_cong * (rho_jam - rho), q_max}.
///
/// With q_max below the triangle apex the diagram is a trapezoid; its critical
/// density is the left plateau edge.
struct Triangular {
  double v_free;   // km/s
  double v_cong;   // km/s, absolute value of the congested wave speed
  double rho_jam;  // veh/km
  double q_max = std::numeric_limits<double>::infinity();  // veh/s

  /// Builds the diagram from the apex density of the triangle:
  /// v_cong = v_free * rho_apex / (rho_jam - rho_apex).
  static Triangular from_critical(double v_free, double rho_jam, double rho_apex,
                                  double q_max = std::numeric_limits<double>::infinity()) {
    if (!(rho_apex > 0.0 && rho_apex < rho_jam)) {
      throw DomainError("triangular diagram: critical density must lie in (0, rho_jam)");
    }
    return {v_free, v_free * rho_apex / (rho_jam - rho_apex), rho_jam, q_max};
  }
};

/// Kerner-Konhauser speed law scaled by a lane count:
/// V(rho) = 5.0461 [(1 + exp{[rho / (lanes rho_jam_lane) - 0.25] / 0.06})^-1 - 3.72e-6] l / tau.
struct KernerKonhauser {
  double lanes = 1.0;
  double rho_jam_lane = 180.0;  // veh/km/lane
  double tau = 5.0;             // s
  double unit_length = 0.028;   // km

  double speed(double rho) const {
    const double z = (rho / (lanes * rho_jam_lane) - 0.25) / 0.06;
    return 5.0461 * (1.0 / (1.0 + std::exp(z)) - 3.72e-6) * unit_length / tau;
  }

  /// Density at which V vanishes; a hair above lanes * rho_jam_lane because of
  /// the 3.72e-6 offset in the law.
  double zero_speed_density() const {
    const double z = std::log(1.0 / 3.72e-6 - 1.0);
    return lanes * rho_jam_lane * (0.25 + 0.06 * z);
  }
};

enum class Family { Greenshields, Triangular, KernerKonhauser };

/// Which one-sided slope to report at a kink of a piecewise-linear diagram.
enum class Side { Left, Central, Right };

/// Demand/supply ratio gamma = D / S on [0, inf]. The infinite value is the jam
/// sentinel and compares above every finite ratio.
class Ratio {
 public:
  constexpr Ratio() = default;
  constexpr explicit Ratio(double value) : value_(value) {}
  static constexpr Ratio infinite() { return Ratio(std::numeric_limits<double>::infinity()); }

  constexpr double value() const { return value_; }
  constexpr bool is_infinite() const { return value_ == std::numeric_limits<double>::infinity(); }
  constexpr auto operator<=>(const Ratio&) const = default;

 private:
  double value_ = 0.0;
};

/// Engquist-Osher split of the flux in k = rho_crit - rho coordinates.
struct EoSplit {
  double g;  // f(max{k, 0}), nondecreasing in k
  double h;  // f(min{k, 0}), nonincreasing in k
};

struct CriticalPoint {
  double rho_crit;
  double capacity;
  double bracket_width;
};

class FundamentalDiagram {
 public:
  using Params = std::variant<Greenshields, Triangular, KernerKonhauser>;

  explicit FundamentalDiagram(Params params) : params_(params) { initialise(); }

  Family family() const { return static_cast<Family>(params_.index()); }
  const Params& params() const { return params_; }

  double rho_jam() const { return rho_jam_; }
  /// Critical density; the left plateau edge for a trapezoid.
  double rho_crit() const { return rho_crit_; }
  /// Right plateau edge; equals rho_crit() unless the diagram is a trapezoid.
  double rho_crit_right() const { return rho_crit_right_; }
  double capacity() const { return capacity_; }
  /// Width of the bracket that located the critical point (zero for closed forms).
  double critical_bracket() const { return bracket_; }
  /// Maximum characteristic speed |Q'| over [0, rho_jam], km/s.
  double max_wave_speed() const { return max_wave_speed_; }
  /// Lane multiplier; 1 for families that carry no lane count.
  double lanes() const {
    if (const auto* kk = std::get_if<KernerKonhauser>(&params_)) {
      return kk->lanes;
    }
    return 1.0;
  }

  /// Q(rho). Throws DomainError outside [0, rho_jam] (beyond kDensitySlack).
  double flux(double rho) const { return raw_flux(checked(rho)); }

  /// Q(rho) without range checks, for inner loops on densities already validated.
  double raw_flux(double rho) const {
    return std::visit(
        [rho](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Greenshields>) {
            return p.v_free * rho * (1.0 - rho / p.rho_jam);
          } else if constexpr (std::is_same_v<T, Triangular>) {
            return std::min({p.v_free * rho, p.v_cong * (p.rho_jam - rho), p.q_max});
          } else {
            return rho * p.speed(rho);
          }
        },
        params_);
  }

  /// V(rho) = Q(rho) / rho with V(0) the free-flow speed, km/s.
  double speed(double rho) const {
    rho = checked(rho);
    if (rho > 0.0) {
      return raw_flux(rho) / rho;
    }
    return slope(0.0, Side::Right);
  }

  /// dQ/drho, km/s. Exact for Greenshields and the piecewise-linear family
  /// (one-sided at kinks as requested), central difference with step
  /// 1e-6 rho_jam for Kerner-Konhauser.
  double slope(double rho, Side side = Side::Central) const {
    rho = checked(rho);
    if (const auto* g = std::get_if<Greenshields>(&params_)) {
      return g->v_free * (1.0 - 2.0 * rho / g->rho_jam);
    }
    if (const auto* t = std::get_if<Triangular>(&params_)) {
      const auto piece = [&](double r) {
        if (r < rho_crit_) return t->v_free;
        if (r > rho_crit_right_) return -t->v_cong;
        return rho_crit_ < rho_crit_right_ ? 0.0 : 0.5 * (t->v_free - t->v_cong);
      };
      const double eps = 1e-12 * rho_jam_;
      const bool at_left_kink = std::abs(rho - rho_crit_) <= eps;
      const bool at_right_kink = std::abs(rho - rho_crit_right_) <= eps;
      if (at_left_kink || at_right_kink) {
        if (side == Side::Left) return piece(rho - 2.0 * eps);
        if (side == Side::Right) return piece(rho + 2.0 * eps);
        return 0.5 * (piece(rho - 2.0 * eps) + piece(rho + 2.0 * eps));
      }
      return piece(rho);
    }
    const double h = 1e-6 * rho_jam_;
    const double lo = std::max(0.0, rho - h);
    const double hi = std::min(rho_jam_, rho + h);
    return (raw_flux(hi) - raw_flux(lo)) / (hi - lo);
  }

  /// D(rho) = Q(min{rho, rho_crit}).
  double demand(double rho) const {
    rho = checked(rho);
    return rho < rho_crit_ ? raw_flux(rho) : capacity_;
  }

  /// S(rho) = Q(max{rho, rho_crit}).
  double supply(double rho) const {
    rho = checked(rho);
    return rho > rho_crit_right_ ? raw_flux(rho) : capacity_;
  }

  /// Unique rho in [0, rho_crit] with D(rho) = d.
  double inv_demand(double d) const {
    d = checked_flux(d, "inv_demand");
    if (const auto* t = std::get_if<Triangular>(&params_)) {
      return std::min(d / t->v_free, rho_crit_);
    }
    return numeric::solve_increasing([this](double r) { return raw_flux(r); }, d, 0.0, rho_crit_);
  }

  /// Unique rho in [rho_crit, rho_jam] with S(rho) = s; the right plateau edge for s = C.
  double inv_supply(double s) const {
    s = checked_flux(s, "inv_supply");
    if (const auto* t = std::get_if<Triangular>(&params_)) {
      return std::max(t->rho_jam - s / t->v_cong, rho_crit_right_);
    }
    // Largest density whose flux still reaches s.
    const double r = numeric::bisect_boundary([&](double x) { return raw_flux(x) < s; },
                                              rho_crit_right_, rho_jam_);
    return s <= 0.0 ? rho_jam_ : r;
  }

  /// Inverse flux-density relation R(gamma): inv_demand(C gamma) for gamma <= 1,
  /// inv_supply(C / gamma) above.
  double rho_of_gamma(Ratio gamma) const {
    if (!(gamma.value() >= 0.0)) {
      throw DomainError("rho_of_gamma: negative or NaN supply-demand ratio");
    }
    if (gamma.is_infinite()) {
      return rho_jam_;
    }
    if (gamma.value() <= 1.0) {
      return inv_demand(capacity_ * gamma.value());
    }
    return inv_supply(capacity_ / gamma.value());
  }

  /// Engquist-Osher functions g, h at the density: with k = rho_crit - rho and
  /// f(k) = C - Q(rho_crit - k), g = f(max{k,0}) and h = f(min{k,0}).
  EoSplit eo_split(double rho) const {
    rho = checked(rho);
    const double k = rho_crit_ - rho;
    const auto f = [this](double kk) {
      // On a trapezoid plateau f vanishes; Q there equals capacity exactly.
      const double r = std::clamp(rho_crit_ - kk, 0.0, rho_jam_);
      return capacity_ - raw_flux(r);
    };
    return {f(std::max(k, 0.0)), f(std::min(k, 0.0))};
  }

  /// Clamps densities within kDensitySlack of [0, rho_jam]; throws beyond.
  double checked(double rho) const {
    if (!(rho >= -kDensitySlack && rho <= rho_jam_ + kDensitySlack)) {
      throw DomainError("density " + std::to_string(rho) + " veh/km outside [0, " +
                        std::to_string(rho_jam_) + "]");
    }
    return std::clamp(rho, 0.0, rho_jam_);
  }

 private:
  double checked_flux(double q, const char* what) const {
    if (!(q >= -kFluxTol && q <= capacity_ + kFluxTol)) {
      throw DomainError(std::string(what) + ": flux " + std::to_string(q) +
                        " veh/s outside [0, capacity " + std::to_string(capacity_) + "]");
    }
    return std::clamp(q, 0.0, capacity_);
  }

  void initialise() {
    std::visit(
        [this](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Greenshields>) {
            if (!(p.v_free > 0.0 && p.rho_jam > 0.0)) {
              throw DomainError("Greenshields diagram needs v_free > 0 and rho_jam > 0");
            }
            rho_jam_ = p.rho_jam;
            rho_crit_ = rho_crit_right_ = p.rho_jam / 2.0;
            capacity_ = p.v_free * p.rho_jam / 4.0;
            max_wave_speed_ = p.v_free;
          } else if constexpr (std::is_same_v<T, Triangular>) {
            if (!(p.v_free > 0.0 && p.v_cong > 0.0 && p.rho_jam > 0.0 && p.q_max > 0.0)) {
              throw DomainError("triangular diagram needs positive v_free, v_cong, rho_jam, q_max");
            }
            rho_jam_ = p.rho_jam;
            const double apex = p.v_cong * p.rho_jam / (p.v_free + p.v_cong);
            capacity_ = std::min(p.q_max, p.v_free * apex);
            rho_crit_ = std::min(apex, capacity_ / p.v_free);
            rho_crit_right_ = std::max(apex, p.rho_jam - capacity_ / p.v_cong);
            max_wave_speed_ = std::max(p.v_free, p.v_cong);
          } else {
            if (!(p.lanes > 0.0 && p.rho_jam_lane > 0.0 && p.tau > 0.0 && p.unit_length > 0.0)) {
              throw DomainError("Kerner-Konhauser diagram needs positive lanes, rho_jam, tau, l");
            }
            rho_jam_ = p.zero_speed_density();
            const auto peak =
                numeric::locate_critical([this](double r) { return raw_flux(r); }, rho_jam_);
            rho_crit_ = rho_crit_right_ = peak.argmax;
            capacity_ = peak.value;
            bracket_ = peak.bracket_width;
            double fastest = 0.0;
            constexpr int kSamples = 2000;
            for (int i = 0; i <= kSamples; ++i) {
              fastest = std::max(fastest, std::abs(slope(rho_jam_ * i / kSamples)));
            }
            max_wave_speed_ = fastest;
          }
        },
        params_);
  }

  Params params_;
  double rho_jam_ = 0.0;
  double rho_crit_ = 0.0;
  double rho_crit_right_ = 0.0;
  double capacity_ = 0.0;
  double bracket_ = 0.0;
  double max_wave_speed_ = 0.0;
};

/// Locates the critical point of any diagram numerically (golden section on
/// [0, rho_jam] after a 1000-point unimodality check). Throws ModelError on a
/// non-unimodal sample profile.
inline CriticalPoint find_critical(const FundamentalDiagram& fd) {
  const auto m = numeric::locate_critical([&fd](double r) { return fd.raw_flux(r); }, fd.rho_jam());
  return {m.argmax, m.value, m.bracket_width};
}

inline std::string to_string(Family f) {
  switch (f) {
    case Family::Greenshields: return "greenshields";
    case Family::Triangular: return "triangular";
    case Family::KernerKonhauser: return "kerner-konhauser";
  }
  return "unknown";
}

}  // namespace lwr

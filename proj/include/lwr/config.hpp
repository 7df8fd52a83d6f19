#pragma once

// Scenario files: YAML with a quantity-with-unit string for every dimensional
// field ("3.5 m", "0.1 s", "28 veh/km"). The grammar is documented in README.md.
//
// parse_config reports every problem it finds, each prefixed with its line.

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "lwr/errors.hpp"
#include "lwr/fundamental_diagram.hpp"
#include "lwr/godunov.hpp"
#include "lwr/ring.hpp"
#include "lwr/supply_demand.hpp"

namespace lwr::config {

enum class Dim { Density, Speed, Length, Time, Flux, Vehicles };

inline std::string to_string(Dim d) {
  switch (d) {
    case Dim::Density: return "density (veh/km, veh/m)";
    case Dim::Speed: return "speed (km/s, m/s, km/h)";
    case Dim::Length: return "length (km, m)";
    case Dim::Time: return "time (s, min, h)";
    case Dim::Flux: return "flux (veh/s, veh/min, veh/h)";
    case Dim::Vehicles: return "vehicle count (veh)";
  }
  return "?";
}

/// Factor taking a value in `unit` to the internal unit of `d`; nullopt if the unit
/// does not measure `d`.
inline std::optional<double> unit_factor(const std::string& unit, Dim d) {
  static const std::map<std::pair<Dim, std::string>, double> table{
      {{Dim::Density, "veh/km"}, 1.0},   {{Dim::Density, "veh/m"}, 1000.0},
      {{Dim::Speed, "km/s"}, 1.0},       {{Dim::Speed, "m/s"}, 1e-3},
      {{Dim::Speed, "km/h"}, 1.0 / 3600.0},
      {{Dim::Length, "km"}, 1.0},        {{Dim::Length, "m"}, 1e-3},
      {{Dim::Time, "s"}, 1.0},           {{Dim::Time, "min"}, 60.0},
      {{Dim::Time, "h"}, 3600.0},
      {{Dim::Flux, "veh/s"}, 1.0},       {{Dim::Flux, "veh/min"}, 1.0 / 60.0},
      {{Dim::Flux, "veh/h"}, 1.0 / 3600.0},
      {{Dim::Vehicles, "veh"}, 1.0},
  };
  const auto it = table.find({d, unit});
  if (it == table.end()) return std::nullopt;
  return it->second;
}

struct Sinusoid {
  double rho0;       // veh/km per lane
  double amplitude;  // veh/km per lane
};

/// Absolute density on [from, to).
struct Piece {
  double from;     // km
  double to;       // km
  double density;  // veh/km
};

using InitialCondition = std::variant<Sinusoid, std::vector<Piece>>;

struct Numerics {
  double dx = 0.0;            // km
  double dt = 0.0;            // s
  double duration = 0.0;      // s
  double record_every = 0.0;  // s; 0 keeps first and last snapshot only
  FluxRule flux_rule = FluxRule::SupplyDemand;
  bool override_cfl = false;
};

struct RiemannSide {
  std::string diagram;
  SDState state;
};

struct RiemannDef {
  RiemannSide upstream;
  RiemannSide downstream;
  // Self-similar profile sampled on xi = x/t in [xi_min, xi_max] (km/s).
  double xi_min = 0.0;
  double xi_max = 0.0;
  std::size_t samples = 0;
};

struct SegmentDef {
  std::string diagram;
  double length;  // km
};

struct Outputs {
  std::string csv;
  std::string report;
};

struct ScenarioConfig {
  std::map<std::string, FundamentalDiagram> diagrams;
  std::vector<SegmentDef> segments;
  std::optional<Topology> topology;
  std::optional<InitialCondition> initial;
  std::optional<Numerics> numerics;
  std::optional<RiemannDef> riemann;
  std::optional<double> ring_vehicles;  // overrides the count implied by `initial`
  PredictOptions predict;
  DetectOptions detection;
  Outputs outputs;
  std::optional<double> cfl;  // set when road and numerics are both present

  const FundamentalDiagram& diagram(const std::string& name) const { return diagrams.at(name); }

  double road_length() const {
    double l = 0.0;
    for (const auto& s : segments) l += s.length;
    return l;
  }

  /// Grid for `simulate`, initial densities filled in as exact cell averages.
  SimGrid build_grid() const {
    if (segments.empty() || !topology || !numerics || !initial) {
      throw ConfigError("simulate needs road, initial and numerics sections");
    }
    std::vector<Segment> segs;
    for (const auto& s : segments) segs.push_back({diagram(s.diagram), s.length});
    SimGrid grid = SimGrid::from_segments(segs, numerics->dx, *topology);
    const double dx = grid.dx();
    const double length = grid.length();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double xl = static_cast<double>(i) * dx;
      const double xr = xl + dx;
      double rho = 0.0;
      if (const auto* s = std::get_if<Sinusoid>(&*initial)) {
        const double w = 2.0 * std::numbers::pi / length;
        rho = grid.diagram(i).lanes() * (s->rho0 + s->amplitude * (std::cos(w * xl) - std::cos(w * xr)) / (w * dx));
      } else {
        for (const auto& p : std::get<std::vector<Piece>>(*initial)) {
          const double lo = std::max(xl, p.from);
          const double hi = std::min(xr, p.to);
          if (hi > lo) rho += p.density * (hi - lo) / dx;
        }
      }
      const auto& fd = grid.diagram(i);
      if (rho < -kDensitySlack || rho > fd.rho_jam() + kDensitySlack) {
        std::ostringstream os;
        os << "initial density " << rho << " veh/km in cell " << i << " outside [0, " << fd.rho_jam() << "]";
        throw ConfigError(os.str());
      }
      grid.set_density(i, std::clamp(rho, 0.0, fd.rho_jam()));
    }
    return grid;
  }

  /// Two-segment ring for `ring-predict`.
  RingSpec ring_spec() const {
    if (segments.size() != 2 || !topology || !std::holds_alternative<Ring>(*topology)) {
      throw ConfigError("ring-predict needs a ring road with exactly two segments");
    }
    RingSpec spec{road_length(), segments[0].length, diagram(segments[0].diagram), diagram(segments[1].diagram), 0.0};
    if (ring_vehicles) {
      spec.vehicles = *ring_vehicles;
    } else if (initial) {
      if (const auto* s = std::get_if<Sinusoid>(&*initial)) {
        spec.vehicles = vehicles_of_initial(spec, s->rho0, s->amplitude);
      } else {
        double n = 0.0;
        for (const auto& p : std::get<std::vector<Piece>>(*initial)) n += p.density * (p.to - p.from);
        spec.vehicles = n;
      }
    } else {
      throw ConfigError("ring-predict needs ring.vehicles or an initial condition");
    }
    return spec;
  }
};

/// All problems found in one file.
class ConfigErrorList : public ConfigError {
 public:
  explicit ConfigErrorList(std::vector<std::string> errors)
      : ConfigError(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::string s;
    for (const auto& e : errors) {
      if (!s.empty()) s += '\n';
      s += e;
    }
    return s;
  }
  std::vector<std::string> errors_;
};

struct ParseOptions {
  bool override_cfl = false;  // same effect as numerics.override_cfl: true
};

namespace detail {

class Parser {
 public:
  std::vector<std::string> errors;

  void error(const YAML::Node& at, const std::string& msg) {
    std::ostringstream os;
    if (at.IsDefined() && at.Mark().line >= 0) {
      os << "line " << at.Mark().line + 1 << ": ";
    }
    os << msg;
    errors.push_back(os.str());
  }

  /// Flags keys of `map` not in `allowed`. Returns false if `map` is not a mapping.
  bool expect_map(const YAML::Node& map, const std::string& where, const std::set<std::string>& allowed) {
    if (!map.IsMap()) {
      error(map, where + " must be a mapping");
      return false;
    }
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.contains(key)) {
        error(kv.first, "unknown key '" + key + "' in " + where);
      }
    }
    return true;
  }

  std::optional<double> quantity(const YAML::Node& parent, const std::string& key, Dim d, bool required = true) {
    const YAML::Node n = parent[key];
    if (!n) {
      if (required) error(parent, "missing '" + key + "' (" + to_string(d) + ")");
      return std::nullopt;
    }
    if (!n.IsScalar()) {
      error(n, "'" + key + "' must be a quantity such as \"3.5 m\"");
      return std::nullopt;
    }
    static const std::regex re(R"(^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z/]*)\s*$)");
    const auto text = n.Scalar();
    std::smatch m;
    if (!std::regex_match(text, m, re)) {
      error(n, "'" + key + "': cannot read quantity '" + text + "'");
      return std::nullopt;
    }
    const std::string unit = m[2].str();
    if (unit.empty()) {
      error(n, "'" + key + "': missing unit, expected " + to_string(d));
      return std::nullopt;
    }
    const auto f = unit_factor(unit, d);
    if (!f) {
      error(n, "'" + key + "': unit '" + unit + "' does not measure " + to_string(d));
      return std::nullopt;
    }
    return std::stod(m[1].str()) * *f;
  }

  template <class T>
  std::optional<T> plain(const YAML::Node& parent, const std::string& key, bool required = false) {
    const YAML::Node n = parent[key];
    if (!n) {
      if (required) error(parent, "missing '" + key + "'");
      return std::nullopt;
    }
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      error(n, "'" + key + "' has the wrong type");
      return std::nullopt;
    }
  }

  std::optional<FundamentalDiagram> diagram(const std::string& name, const YAML::Node& n) {
    const auto family = plain<std::string>(n, "family", true);
    if (!family) return std::nullopt;
    const std::string where = "diagram '" + name + "'";
    std::optional<FundamentalDiagram::Params> params;
    if (*family == "greenshields") {
      expect_map(n, where, {"family", "free_speed", "jam_density"});
      const auto v = quantity(n, "free_speed", Dim::Speed);
      const auto rj = quantity(n, "jam_density", Dim::Density);
      if (v && rj) params = Greenshields{*v, *rj};
    } else if (*family == "triangular") {
      expect_map(n, where, {"family", "free_speed", "congested_speed", "jam_density", "capacity"});
      const auto v = quantity(n, "free_speed", Dim::Speed);
      const auto w = quantity(n, "congested_speed", Dim::Speed);
      const auto rj = quantity(n, "jam_density", Dim::Density);
      const auto cap = quantity(n, "capacity", Dim::Flux, false);
      if (v && w && rj) params = Triangular{*v, *w, *rj, cap.value_or(std::numeric_limits<double>::infinity())};
    } else if (*family == "kerner-konhauser") {
      expect_map(n, where, {"family", "lanes", "jam_density_per_lane", "relaxation_time", "unit_length"});
      KernerKonhauser kk;
      kk.lanes = plain<double>(n, "lanes").value_or(kk.lanes);
      kk.rho_jam_lane = quantity(n, "jam_density_per_lane", Dim::Density, false).value_or(kk.rho_jam_lane);
      kk.tau = quantity(n, "relaxation_time", Dim::Time, false).value_or(kk.tau);
      kk.unit_length = quantity(n, "unit_length", Dim::Length, false).value_or(kk.unit_length);
      params = kk;
    } else {
      error(n["family"], where + ": unknown family '" + *family +
                             "' (greenshields, triangular, kerner-konhauser)");
      return std::nullopt;
    }
    if (!params) return std::nullopt;
    try {
      return FundamentalDiagram(*params);
    } catch (const std::exception& e) {
      error(n, where + ": " + e.what());
      return std::nullopt;
    }
  }

  std::optional<StepFunction> step_function(const YAML::Node& parent, const std::string& key) {
    const YAML::Node n = parent[key];
    if (!n) {
      error(parent, "missing '" + key + "'");
      return std::nullopt;
    }
    if (n.IsScalar()) {
      const auto v = quantity(parent, key, Dim::Flux);
      if (!v) return std::nullopt;
      return StepFunction::constant(*v);
    }
    if (!n.IsSequence() || n.size() == 0) {
      error(n, "'" + key + "' must be a flux or a list of {from, value}");
      return std::nullopt;
    }
    StepFunction f;
    double last = -std::numeric_limits<double>::infinity();
    for (const auto& item : n) {
      if (!expect_map(item, key + " entry", {"from", "value"})) continue;
      const auto from = quantity(item, "from", Dim::Time);
      const auto v = quantity(item, "value", Dim::Flux);
      if (!from || !v) continue;
      if (*from <= last) error(item, key + ": 'from' times must increase");
      if (*v < 0.0) error(item, key + ": flux must be nonnegative");
      last = *from;
      f.steps.emplace_back(*from, *v);
    }
    return f;
  }

  std::optional<RiemannSide> riemann_side(const YAML::Node& n, const std::string& where,
                                          const std::map<std::string, FundamentalDiagram>& diagrams) {
    if (!expect_map(n, where, {"diagram", "density", "demand", "supply"})) return std::nullopt;
    const auto name = plain<std::string>(n, "diagram", true);
    if (!name) return std::nullopt;
    const auto it = diagrams.find(*name);
    if (it == diagrams.end()) {
      error(n["diagram"], where + ": unknown diagram '" + *name + "'");
      return std::nullopt;
    }
    const auto& fd = it->second;
    if (n["density"]) {
      if (n["demand"] || n["supply"]) error(n, where + ": give either density or demand/supply, not both");
      const auto rho = quantity(n, "density", Dim::Density);
      if (!rho) return std::nullopt;
      if (*rho < -kDensitySlack || *rho > fd.rho_jam() + kDensitySlack) {
        error(n["density"], where + ": density outside [0, " + std::to_string(fd.rho_jam()) + "] veh/km");
        return std::nullopt;
      }
      return RiemannSide{*name, from_density(fd, std::clamp(*rho, 0.0, fd.rho_jam()))};
    }
    const auto d = quantity(n, "demand", Dim::Flux);
    const auto s = quantity(n, "supply", Dim::Flux);
    if (!d || !s) return std::nullopt;
    const SDState u{*d, *s};
    try {
      validate(u, fd.capacity());
    } catch (const StateError& e) {
      error(n, where + ": " + e.what());
      return std::nullopt;
    }
    return RiemannSide{*name, u};
  }
};

}  // namespace detail

inline ScenarioConfig parse_config(const std::string& text, const ParseOptions& opt = {}) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigErrorList({"line " + std::to_string(e.mark.line + 1) + ": " + e.msg});
  }
  detail::Parser p;
  ScenarioConfig cfg;
  if (!root || root.IsNull()) {
    throw ConfigErrorList({"empty configuration"});
  }
  if (!p.expect_map(root, "configuration",
                    {"diagrams", "road", "initial", "boundary", "numerics", "riemann", "ring", "detection",
                     "outputs"})) {
    throw ConfigErrorList(p.errors);
  }

  if (const auto ds = root["diagrams"]) {
    if (ds.IsMap()) {
      for (const auto& kv : ds) {
        const auto name = kv.first.as<std::string>();
        if (!kv.second.IsMap()) {
          p.error(kv.second, "diagram '" + name + "' must be a mapping");
          continue;
        }
        if (auto fd = p.diagram(name, kv.second)) cfg.diagrams.emplace(name, *fd);
      }
    } else {
      p.error(ds, "diagrams must be a mapping of name to definition");
    }
  }
  const auto known_diagram = [&](const YAML::Node& at, const std::string& name) {
    if (cfg.diagrams.contains(name)) return true;
    p.error(at, "unknown diagram '" + name + "'");
    return false;
  };

  if (const auto road = root["road"]; road && p.expect_map(road, "road", {"topology", "segments"})) {
    const auto topo = p.plain<std::string>(road, "topology", true);
    if (topo && *topo != "ring" && *topo != "open") {
      p.error(road["topology"], "topology must be 'ring' or 'open'");
    }
    const auto segs = road["segments"];
    if (!segs || !segs.IsSequence() || segs.size() == 0) {
      p.error(segs ? segs : road, "road needs a nonempty 'segments' list");
    } else {
      for (const auto& s : segs) {
        if (!p.expect_map(s, "segment", {"diagram", "length"})) continue;
        const auto name = p.plain<std::string>(s, "diagram", true);
        const auto len = p.quantity(s, "length", Dim::Length);
        if (len && !(*len > 0.0)) p.error(s["length"], "segment length must be positive");
        if (name && known_diagram(s["diagram"], *name) && len) cfg.segments.push_back({*name, *len});
      }
    }
    if (topo == "ring") {
      cfg.topology = Ring{};
      if (root["boundary"]) p.error(root["boundary"], "a ring road takes no boundary section");
    } else if (topo == "open") {
      const auto b = root["boundary"];
      if (!b) {
        p.error(road, "an open road needs a boundary section with left_demand and right_supply");
      } else if (p.expect_map(b, "boundary", {"left_demand", "right_supply"})) {
        const auto ld = p.step_function(b, "left_demand");
        const auto rs = p.step_function(b, "right_supply");
        if (ld && rs) cfg.topology = Open{BoundarySpec{*ld, *rs}};
      }
    }
  } else if (root["boundary"]) {
    p.error(root["boundary"], "boundary section without a road");
  }

  if (const auto ini = root["initial"]; ini && p.expect_map(ini, "initial", {"sinusoid", "pieces"})) {
    if (ini["sinusoid"] && ini["pieces"]) {
      p.error(ini, "initial: give either sinusoid or pieces");
    } else if (const auto s = ini["sinusoid"]) {
      if (p.expect_map(s, "sinusoid", {"rho0", "amplitude"})) {
        const auto r0 = p.quantity(s, "rho0", Dim::Density);
        const auto a = p.quantity(s, "amplitude", Dim::Density, false);
        if (r0) cfg.initial = Sinusoid{*r0, a.value_or(0.0)};
      }
    } else if (const auto ps = ini["pieces"]) {
      if (!ps.IsSequence() || ps.size() == 0) {
        p.error(ps, "pieces must be a nonempty list");
      } else {
        std::vector<Piece> pieces;
        for (const auto& item : ps) {
          if (!p.expect_map(item, "piece", {"from", "to", "density"})) continue;
          const auto from = p.quantity(item, "from", Dim::Length);
          const auto to = p.quantity(item, "to", Dim::Length);
          const auto rho = p.quantity(item, "density", Dim::Density);
          if (from && to && rho) {
            if (!(*to > *from)) p.error(item, "piece needs from < to");
            pieces.push_back({*from, *to, *rho});
          }
        }
        cfg.initial = pieces;
      }
    } else {
      p.error(ini, "initial needs sinusoid or pieces");
    }
  }

  if (const auto num = root["numerics"];
      num && p.expect_map(num, "numerics", {"dx", "dt", "duration", "record_every", "flux_rule", "override_cfl"})) {
    Numerics n;
    const auto dx = p.quantity(num, "dx", Dim::Length);
    const auto dt = p.quantity(num, "dt", Dim::Time);
    const auto dur = p.quantity(num, "duration", Dim::Time);
    n.record_every = p.quantity(num, "record_every", Dim::Time, false).value_or(0.0);
    n.override_cfl = p.plain<bool>(num, "override_cfl").value_or(false) || opt.override_cfl;
    if (const auto rule = p.plain<std::string>(num, "flux_rule")) {
      if (*rule == "supply-demand") {
        n.flux_rule = FluxRule::SupplyDemand;
      } else if (*rule == "osher") {
        n.flux_rule = FluxRule::Osher;
      } else {
        p.error(num["flux_rule"], "flux_rule must be 'supply-demand' or 'osher'");
      }
    }
    if (dx && !(*dx > 0.0)) p.error(num["dx"], "dx must be positive");
    if (dt && !(*dt > 0.0)) p.error(num["dt"], "dt must be positive");
    if (dur && *dur < 0.0) p.error(num["duration"], "duration must be nonnegative");
    if (dx && dt && dur) {
      n.dx = *dx;
      n.dt = *dt;
      n.duration = *dur;
      cfg.numerics = n;
    }
  }

  if (const auto r = root["riemann"];
      r && p.expect_map(r, "riemann", {"upstream", "downstream", "profile"})) {
    RiemannDef def;
    std::optional<RiemannSide> up, down;
    if (r["upstream"]) up = p.riemann_side(r["upstream"], "riemann.upstream", cfg.diagrams);
    else p.error(r, "riemann needs an upstream state");
    if (r["downstream"]) down = p.riemann_side(r["downstream"], "riemann.downstream", cfg.diagrams);
    else p.error(r, "riemann needs a downstream state");
    if (const auto prof = r["profile"]; prof && p.expect_map(prof, "profile", {"xi_min", "xi_max", "samples"})) {
      const auto lo = p.quantity(prof, "xi_min", Dim::Speed);
      const auto hi = p.quantity(prof, "xi_max", Dim::Speed);
      const auto n = p.plain<std::size_t>(prof, "samples").value_or(201);
      if (lo && hi) {
        if (!(*hi > *lo) || n < 2) p.error(prof, "profile needs xi_min < xi_max and samples >= 2");
        def.xi_min = *lo;
        def.xi_max = *hi;
        def.samples = n;
      }
    }
    if (up && down) {
      def.upstream = *up;
      def.downstream = *down;
      cfg.riemann = def;
    }
  }

  if (const auto ring = root["ring"]; ring && p.expect_map(ring, "ring", {"vehicles", "boundary_tol"})) {
    cfg.ring_vehicles = p.quantity(ring, "vehicles", Dim::Vehicles, false);
    cfg.predict.boundary_tol = p.quantity(ring, "boundary_tol", Dim::Vehicles, false).value_or(1e-6);
  }

  if (const auto det = root["detection"];
      det && p.expect_map(det, "detection", {"steady_tol", "jump", "run_length", "run_tol"})) {
    auto& d = cfg.detection;
    d.steady_tol = p.quantity(det, "steady_tol", Dim::Density, false).value_or(d.steady_tol);
    d.jump = p.quantity(det, "jump", Dim::Density, false).value_or(d.jump);
    d.run_length = p.plain<std::size_t>(det, "run_length").value_or(d.run_length);
    d.run_tol = p.quantity(det, "run_tol", Dim::Density, false).value_or(d.run_tol);
  }

  if (const auto out = root["outputs"]; out && p.expect_map(out, "outputs", {"csv", "report"})) {
    cfg.outputs.csv = p.plain<std::string>(out, "csv").value_or("");
    cfg.outputs.report = p.plain<std::string>(out, "report").value_or("");
  }

  // CFL precheck, only meaningful once road and numerics are both valid.
  if (!cfg.segments.empty() && cfg.numerics && p.errors.empty()) {
    double fastest = 0.0;
    for (const auto& s : cfg.segments) fastest = std::max(fastest, cfg.diagram(s.diagram).max_wave_speed());
    const double cfl = fastest * cfg.numerics->dt / cfg.numerics->dx;
    cfg.cfl = cfl;
    const double limit = cfg.numerics->override_cfl ? 1.0 : kCflGuard;
    if (cfl > limit + 1e-12) {
      std::ostringstream os;
      os << "CFL number " << cfl << " exceeds " << limit;
      if (!cfg.numerics->override_cfl && cfl <= 1.0) os << " (override_cfl allows up to 1)";
      p.error(root["numerics"]["dt"], os.str());
    }
    for (std::size_t i = 0; i < cfg.segments.size(); ++i) {
      const double cells = cfg.segments[i].length / cfg.numerics->dx;
      if (std::abs(cells - std::round(cells)) > 1e-6 || std::round(cells) < 1.0) {
        p.error(root["road"]["segments"][i]["length"],
                "segment length is not a whole number of cells of dx");
      }
    }
  }

  if (!p.errors.empty()) {
    throw ConfigErrorList(p.errors);
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path, const ParseOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), opt);
  } catch (const ConfigErrorList& e) {
    std::vector<std::string> errs;
    for (const auto& m : e.errors()) errs.push_back(path + ": " + m);
    throw ConfigErrorList(errs);
  }
}

}  // namespace lwr::config

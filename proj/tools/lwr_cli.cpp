// lwr: Riemann solutions, Godunov simulations and ring-road predictions from
// scenario files, plus the randomised property suite.
//
// Exit status: 0 success, 1 property failure, 2 configuration or I/O error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "lwr/config.hpp"
#include "lwr/report.hpp"
#include "lwr/verify.hpp"

namespace fs = std::filesystem;
using namespace lwr;

namespace {

constexpr int kPropertyFailure = 1;
constexpr int kConfigError = 2;

struct Options {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  bool override_cfl = false;
};

/// Writes `text` to `dir/name`; an empty name writes nothing.
void emit(const std::string& dir, const std::string& name, const std::string& text) {
  if (name.empty()) return;
  const fs::path path = fs::path(dir) / name;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  os << text;
  if (!os) throw ConfigError("write failed for '" + path.string() + "'");
  std::cerr << "wrote " << path.string() << "\n";
}

std::string or_default(const std::string& name, const std::string& fallback) {
  return name.empty() ? fallback : name;
}

int cmd_riemann(const Options& o) {
  const auto cfg = config::load_config(o.config, {o.override_cfl});
  if (!cfg.riemann) throw ConfigError(o.config + ": riemann needs a riemann section");
  const auto& r = *cfg.riemann;
  const RiemannProblem p{cfg.diagram(r.upstream.diagram), cfg.diagram(r.downstream.diagram), r.upstream.state,
                         r.downstream.state};
  const auto sol = solve(p);
  std::ostringstream rep;
  report::write_riemann_report(rep, p, sol);
  std::cout << rep.str();
  emit(o.out, or_default(cfg.outputs.report, "riemann_report.txt"), rep.str());
  if (r.samples > 0) {
    std::ostringstream csv;
    report::write_riemann_profile_csv(csv, p, sol, r.xi_min, r.xi_max, r.samples);
    emit(o.out, or_default(cfg.outputs.csv, "riemann_profile.csv"), csv.str());
  }
  return 0;
}

int cmd_simulate(const Options& o) {
  const auto cfg = config::load_config(o.config, {o.override_cfl});
  const auto grid = cfg.build_grid();
  const auto& n = *cfg.numerics;
  const auto rec = run(grid, {n.dt, n.flux_rule, n.override_cfl}, n.duration, n.record_every);
  const auto det = report::detect(rec, cfg.detection);
  std::ostringstream rep;
  report::write_simulation_report(rep, rec, cfl_number(grid, n.dt), det);
  std::cout << rep.str();
  std::ostringstream csv;
  report::write_snapshots_csv(csv, rec);
  emit(o.out, or_default(cfg.outputs.csv, "snapshots.csv"), csv.str());
  emit(o.out, or_default(cfg.outputs.report, "simulation_report.txt"), rep.str());
  return 0;
}

int cmd_ring_predict(const Options& o) {
  const auto cfg = config::load_config(o.config, {o.override_cfl});
  const auto spec = cfg.ring_spec();
  const auto pred = predict(spec, cfg.predict);
  std::ostringstream rep;
  report::write_ring_report(rep, spec, pred);
  std::cout << rep.str();
  std::ostringstream csv;
  report::write_ring_profile_csv(csv, pred);
  emit(o.out, or_default(cfg.outputs.report, "ring_report.txt"), rep.str());
  emit(o.out, or_default(cfg.outputs.csv, "ring_profile.csv"), csv.str());
  return 0;
}

int cmd_verify(const Options& o) {
  const auto summary = verify::run_all(o.seed, o.trials);
  std::cout << "seed " << o.seed << ", " << o.trials << " trials\n";
  verify::print(std::cout, summary);
  return summary.passed() ? 0 : kPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinematic-wave traffic toolkit in supply-demand form"};
  app.require_subcommand(1);
  Options o;
  const auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario file (YAML)")->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_flag("--override-cfl", o.override_cfl, "allow CFL numbers up to 1");
  };
  auto* riemann = app.add_subcommand("riemann", "solve a Riemann problem at a linear boundary");
  with_config(riemann);
  auto* simulate = app.add_subcommand("simulate", "run the Godunov simulator");
  with_config(simulate);
  auto* ring = app.add_subcommand("ring-predict", "predict asymptotic states on a two-link ring");
  with_config(ring);
  auto* ver = app.add_subcommand("verify", "run the randomised property suite");
  ver->add_option("--seed", o.seed, "random seed");
  ver->add_option("--trials", o.trials, "rounds per property");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*riemann) return cmd_riemann(o);
    if (*simulate) return cmd_simulate(o);
    if (*ring) return cmd_ring_predict(o);
    return cmd_verify(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error:\n" << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const StateError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vslctm/calibrate.hpp"
#include "vslctm/scenario.hpp"
#include "vslctm/sweep.hpp"

namespace vslctm::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

Scenario resolve_scenario(const std::string& ref) {
  for (const auto& name : preset_names()) {
    if (ref == name) return preset(name);
  }
  return load_scenario(ref);
}

std::string stem_for(const Scenario& s, const std::string& ref) {
  if (!s.name.empty()) return s.name;
  return fs::path(ref).stem().string();
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

json metrics_json(const Scenario& s, const ScenarioResult& r) {
  const auto& m = r.metrics;
  json j;
  j["scenario"] = s.name;
  j["scenario_hash"] = r.hash;
  j["controller"] = r.trace.controller;
  j["att_min"] = m.att_min ? json(*m.att_min) : json(nullptr);
  j["avg_stops"] = m.avg_stops;
  j["avg_emission_g_per_veh_km"] = m.avg_emission;
  j["rrmse"] = m.rrmse ? json(*m.rrmse) : json(nullptr);
  j["vehicles_counted"] = m.vehicles_counted;
  j["vehicles_seeded"] = m.vehicles_seeded;
  j["balance_residual_veh"] = r.balance.residual();
  if (r.schedule) {
    j["v0_congested_kmh"] = r.schedule->v0_congested;
    j["v0_cleared_kmh"] = r.schedule->v0_cleared;
    j["switch_time_min"] = r.schedule->switch_time * 60.0;
  }
  if (r.bound) {
    const auto& b = *r.bound;
    j["l0_lower_bound_km"] = b.bound ? json(b.bound->km) : json(nullptr);
    j["clear_time_min"] = b.clear_time * 60.0;
    j["arrival_time_min"] = b.arrival_time * 60.0;
    j["verdict"] = to_string(b.verdict);
    if (!b.bound) j["infeasible"] = b.infeasible_reason;
  }
  return j;
}

int cmd_run(const std::string& ref, const std::string& out_dir, const std::string& controller,
            std::ostream& out) {
  auto s = resolve_scenario(ref);
  if (!controller.empty()) {
    const auto kind = parse_controller_kind(controller);
    if (!kind) throw ValidationError("controller: unknown controller '" + controller + "'");
    s.controller = *kind;
    check_scenario(s).throw_if_any();
  }
  const auto r = run_scenario(s);
  const auto dir = ensure_dir(out_dir);
  const auto stem = stem_for(s, ref);
  const auto trace_path = dir / (stem + "_trace.csv");
  const auto metrics_path = dir / (stem + "_metrics.json");
  {
    std::ofstream f(trace_path);
    if (!f) throw std::runtime_error("cannot write " + trace_path.string());
    write_trace_csv(f, r.trace, "scenario=" + s.name + " scenario_hash=" + r.hash);
  }
  {
    std::ofstream f(metrics_path);
    if (!f) throw std::runtime_error("cannot write " + metrics_path.string());
    f << metrics_json(s, r).dump(2) << "\n";
  }

  const auto& m = r.metrics;
  out << "scenario      " << (s.name.empty() ? stem : s.name) << " (" << r.hash << ")\n";
  out << "controller    " << r.trace.controller << "\n";
  if (m.att_min) {
    out << "att           " << fmt(*m.att_min) << " min\n";
  } else {
    out << "att           unavailable (no virtual vehicle completed its trip)\n";
  }
  out << "avg_stops     " << fmt(m.avg_stops) << "\n";
  out << "avg_emission  " << fmt(m.avg_emission) << " g/veh/km\n";
  out << "rrmse         " << (m.rrmse ? fmt(*m.rrmse) : std::string("unavailable")) << "\n";
  out << "vehicles      " << m.vehicles_counted << " of " << m.vehicles_seeded << " completed\n";
  out << "trace         " << trace_path.string() << "\n";
  out << "metrics       " << metrics_path.string() << "\n";
  return kOk;
}

int cmd_sweep(const std::string& path, const std::string& out_dir, int jobs, std::ostream& out) {
  auto spec = load_sweep_spec(path);
  const auto dir = ensure_dir(out_dir);
  SweepOptions opts;
  opts.jobs = jobs > 0 ? jobs : default_jobs();
  opts.trace_dir = dir.string();
  const auto rows = run_sweep(spec, opts);
  const auto stem = stem_for(spec.base, path) + "_" + to_string(spec.variable) + "_sweep";
  const auto csv = dir / (stem + ".csv");
  std::ofstream f(csv);
  if (!f) throw std::runtime_error("cannot write " + csv.string());
  write_summary_csv(f, spec, rows);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.ok ? 0 : 1;
  out << "rows     " << rows.size() << " (" << failed << " failed)\n";
  out << "summary  " << csv.string() << "\n";
  return kOk;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(what + ": '" + item + "' is not a number");
    }
  }
  return v;
}

int cmd_bound(const std::string& ref, std::optional<double> v0, const std::string& densities,
              std::optional<double> upstream, std::optional<double> zone_length,
              std::ostream& out) {
  const auto s = resolve_scenario(ref);
  const FundamentalDiagram fd(s.fd);
  const double demand = demand_at(s, s.incident ? s.incident->start : 0.0);
  const auto sched = scenario_schedule(s);
  const double speed = v0.value_or(sched ? sched->v0_congested : fd.free_flow_speed());
  auto in = free_flow_bound_inputs(fd, s.geometry, speed, demand);
  if (!densities.empty()) in.densities = parse_list(densities, "densities");
  if (upstream) in.upstream_density = *upstream;
  if (in.densities.size() != static_cast<std::size_t>(in.num_sections)) {
    throw ValidationError("densities: expected " + std::to_string(in.num_sections) +
                          " values, got " + std::to_string(in.densities.size()));
  }
  const double l0 = zone_length.value_or(s.geometry.upstream_zone_length);
  const auto r = evaluate_bound(in, l0);

  std::string list;
  for (double d : in.densities) list += (list.empty() ? "" : ",") + fmt(d);
  out << "v0            " << fmt(in.v0) << " km/h\n";
  out << "rho0          " << fmt(in.upstream_density) << " veh/km\n";
  out << "densities     " << list << " veh/km\n";
  if (!r.bound) {
    out << "L0_min        infeasible: " << r.infeasible_reason << "\n";
    return kValidation;
  }
  out << "L0_min        " << fmt(r.bound->km, "%.4f") << " km"
      << (r.bound->vacuous ? " (vacuous, raw " + fmt(r.bound->raw_km, "%.4f") + ")" : "")
      << "\n";
  out << "L0            " << fmt(l0) << " km\n";
  out << "T_b           " << fmt(r.clear_time * 60.0, "%.3f") << " min\n";
  out << "T_y           " << fmt(r.arrival_time * 60.0, "%.3f") << " min\n";
  out << "verdict       " << to_string(r.verdict) << "\n";
  return kOk;
}

json fd_json(const FundamentalDiagram& fd) {
  return {{"capacity", fd.capacity()},
          {"downstream_capacity", fd.downstream_capacity()},
          {"free_flow_speed", fd.free_flow_speed()},
          {"backprop_speed", fd.backprop_speed()},
          {"outflow_backprop_speed", fd.outflow_backprop_speed()},
          {"jam_density", fd.jam_density()},
          {"outflow_jam_density", fd.outflow_jam_density()},
          {"capacity_drop", fd.capacity_drop()}};
}

json branch_json(const BranchStats& b) {
  return {{"count", b.count}, {"rms_residual", b.rms_residual}};
}

int cmd_calibrate(const std::string& path, std::optional<double> pin_vf,
                  const std::string& out_file, std::ostream& out) {
  const auto obs = load_observations(path);
  CalibrationOptions opts;
  opts.pinned_free_flow_speed = pin_vf;
  const auto fit = fit_fundamental_diagram(obs, opts);
  const auto& d = fit.diagnostics;
  const auto& fd = fit.fd;

  json j;
  j["fundamental_diagram"] = fd_json(fd);
  j["diagnostics"] = {{"fitted_free_flow_speed", d.fitted_free_flow_speed},
                      {"free_flow_pinned", d.free_flow_pinned},
                      {"alternations", d.alternations},
                      {"converged", d.converged},
                      {"outflow_slope_fallback", d.outflow_slope_fallback},
                      {"split_density", d.split_density},
                      {"breakpoint_density", d.breakpoint_density},
                      {"plateau_end_density", d.plateau_end_density},
                      {"discharge_flow", d.discharge_flow},
                      {"branches",
                       {{"free", branch_json(d.free)},
                        {"congested", branch_json(d.congested)},
                        {"incident_free", branch_json(d.incident_free)},
                        {"incident_plateau", branch_json(d.incident_plateau)},
                        {"incident_outflow", branch_json(d.incident_outflow)}}},
                      {"notes", d.notes}};
  const fs::path target = out_file.empty() ? ensure_dir(default_output_dir()) / "calibrated_fd.json"
                                           : fs::path(out_file);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::ofstream f(target);
  if (!f) throw std::runtime_error("cannot write " + target.string());
  f << j.dump(2) << "\n";

  out << "C         " << fmt(fd.capacity()) << " veh/h\n";
  out << "C_d       " << fmt(fd.downstream_capacity()) << " veh/h\n";
  out << "v_f       " << fmt(fd.free_flow_speed()) << " km/h";
  if (d.free_flow_pinned) out << " (pinned; fitted " << fmt(d.fitted_free_flow_speed) << ")";
  out << "\n";
  out << "w         " << fmt(fd.backprop_speed()) << " km/h\n";
  out << "w~        " << fmt(fd.outflow_backprop_speed()) << " km/h"
      << (d.outflow_slope_fallback ? " (w/2 fallback)" : "") << "\n";
  out << "rho_j     " << fmt(fd.jam_density()) << " veh/km\n";
  out << "rho~_j    " << fmt(fd.outflow_jam_density()) << " veh/km\n";
  out << "eps0      " << fmt(fd.capacity_drop()) << "\n";
  out << "branches  free=" << d.free.count << " congested=" << d.congested.count
      << " incident_free=" << d.incident_free.count
      << " plateau=" << d.incident_plateau.count << " outflow=" << d.incident_outflow.count
      << "\n";
  out << "split     " << (d.converged ? "converged" : "not converged") << " after "
      << d.alternations << " alternation(s)\n";
  for (const auto& n : d.notes) out << "note      " << n << "\n";
  out << "written   " << target.string() << "\n";
  return kOk;
}

int cmd_presets(const std::string& show, std::ostream& out) {
  if (!show.empty()) {
    out << scenario_to_json(preset(show));
    return kOk;
  }
  for (const auto& name : preset_names()) {
    out << name << "  " << preset_description(name) << "\n";
  }
  return kOk;
}

}  // namespace

std::string default_output_dir() {
  const char* env = std::getenv("VSLCTM_OUTPUT_DIR");
  return env && *env ? std::string(env) : std::string(".");
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Macroscopic freeway VSL toolkit", "vslctm"};
  app.require_subcommand(1);

  std::string out_dir = default_output_dir();
  std::string scenario_ref, spec_path, obs_path, controller, densities, out_file, show;
  std::optional<double> v0, upstream, zone_length, pin_vf;
  int jobs = 0;

  auto* run = app.add_subcommand("run", "Simulate a scenario; write a trace CSV and metrics");
  run->add_option("scenario", scenario_ref, "Scenario file or preset name")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--controller", controller, "no_control, rule_based or rule_based_reactive");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep; write a summary CSV");
  sweep->add_option("spec", spec_path, "Sweep spec file")->required();
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--jobs", jobs, "Parallel runs (default VSLCTM_JOBS or all cores)");

  auto* bound = app.add_subcommand("bound", "Zone-length lower bound and chasing verdict");
  bound->add_option("scenario", scenario_ref, "Scenario file or preset name")->required();
  bound->add_option("--v0", v0, "Held zone speed, km/h");
  bound->add_option("--densities", densities, "rho_1..rho_N at onset, comma separated");
  bound->add_option("--upstream-density", upstream, "rho_0 at onset, veh/km");
  bound->add_option("--zone-length", zone_length, "L0 for T_b and T_y, km");

  auto* calibrate = app.add_subcommand("calibrate", "Fit a fundamental diagram to observations");
  calibrate->add_option("observations", obs_path, "CSV with density,flow,incident")->required();
  calibrate->add_option("--pin-vf", pin_vf, "Use this free-flow speed instead of the fit");
  calibrate->add_option("--out", out_file, "Parameter file to write");

  auto* presets = app.add_subcommand("presets", "List bundled scenarios");
  presets->add_option("--show", show, "Print one preset as scenario JSON");

  if (!args.empty() && !args.front().empty() && args.front()[0] != '-' &&
      app.get_subcommand_no_throw(args.front()) == nullptr) {
    err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
    return kUsage;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*run) return cmd_run(scenario_ref, out_dir, controller, out);
    if (*sweep) return cmd_sweep(spec_path, out_dir, jobs, out);
    if (*bound) return cmd_bound(scenario_ref, v0, densities, upstream, zone_length, out);
    if (*calibrate) return cmd_calibrate(obs_path, pin_vf, out_file, out);
    if (*presets) return cmd_presets(show, out);
  } catch (const ValidationError& e) {
    err << "validation error:\n";
    for (const auto& i : e.issues()) err << "  " << i << "\n";
    return kValidation;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kValidation;
  } catch (const InfeasibleCommand& e) {
    err << "infeasible: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  err << app.help();
  return kUsage;
}

}  // namespace vslctm::cli

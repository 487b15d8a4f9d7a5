#include "vslctm/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace vslctm {
namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

SweepRow run_one(const SweepSpec& spec, std::size_t index, const SweepOptions& opts) {
  SweepRow row;
  row.value = spec.values[index];
  try {
    const auto sc = apply_sweep_value(spec.base, spec.variable, row.value);
    row.hash = scenario_hash(sc);
    const auto r = run_scenario(sc);
    row.metrics = r.metrics;
    row.schedule = r.schedule;
    row.bound = r.bound;
    row.balance_residual = r.balance.residual();
    row.ok = true;
    if (r.bound && !r.bound->bound) {
      row.ok = false;
      row.error = r.bound->infeasible_reason;
    }
    if (spec.write_traces) {
      const auto path = std::filesystem::path(opts.trace_dir) /
                        ("run_" + std::to_string(index) + "_" + to_string(spec.variable) + "_" +
                         fmt(row.value) + ".csv");
      std::ofstream out(path);
      if (!out) throw std::runtime_error("cannot write " + path.string());
      write_trace_csv(out, r.trace, "scenario_hash=" + r.hash);
    }
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

}  // namespace

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::zone_length:
      return "zone_length";
    case SweepVariable::demand:
      return "demand";
    case SweepVariable::derating:
      return "derating";
    case SweepVariable::lc_residual_drop:
      return "lc_residual_drop";
  }
  return "unknown";
}

std::optional<SweepVariable> parse_sweep_variable(const std::string& s) {
  if (s == "zone_length") return SweepVariable::zone_length;
  if (s == "demand") return SweepVariable::demand;
  if (s == "derating") return SweepVariable::derating;
  if (s == "lc_residual_drop") return SweepVariable::lc_residual_drop;
  return std::nullopt;
}

Scenario apply_sweep_value(const Scenario& base, SweepVariable variable, double value) {
  Scenario s = base;
  switch (variable) {
    case SweepVariable::zone_length:
      s.geometry.upstream_zone_length = value;
      break;
    case SweepVariable::demand:
      s.demand = {{0.0, value}};
      break;
    case SweepVariable::derating:
      s.rule.derating = value;
      break;
    case SweepVariable::lc_residual_drop:
      if (!s.lane_change) s.lane_change = LcConfig{};
      s.lane_change->residual_drop = value;
      break;
  }
  return s;
}

IssueList check_sweep(const SweepSpec& spec) {
  IssueList issues;
  issues.require(!spec.values.empty(), "values", "must not be empty");
  issues.require(spec.repetitions == 1, "repetitions",
                 "must be 1 (runs are deterministic)");
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    const auto sc = apply_sweep_value(spec.base, spec.variable, spec.values[i]);
    issues.merge(check_scenario(sc), "values[" + std::to_string(i) + "]");
  }
  return issues;
}

SweepSpec parse_sweep_spec(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("sweep JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("sweep: must be an object");

  IssueList issues;
  for (const auto& [k, v] : j.items()) {
    if (k != "base" && k != "variable" && k != "values" && k != "repetitions" &&
        k != "write_traces") {
      issues.add(k, "unknown field");
    }
  }
  SweepSpec spec;
  if (!j.contains("base")) {
    issues.add("base", "is required");
  } else if (j.at("base").is_string()) {
    const auto ref = j.at("base").get<std::string>();
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), ref) != names.end()) {
      spec.base = preset(ref);
    } else {
      const auto path = std::filesystem::path(ref).is_absolute()
                            ? std::filesystem::path(ref)
                            : std::filesystem::path(base_dir) / ref;
      spec.base = load_scenario(path.string());
    }
  } else {
    try {
      spec.base = parse_scenario(j.at("base").dump());
    } catch (const ValidationError& e) {
      issues.merge(IssueList(e.issues()), "base");
    }
  }

  std::string variable = "zone_length";
  if (j.contains("variable")) {
    if (j.at("variable").is_string()) {
      variable = j.at("variable").get<std::string>();
    } else {
      issues.add("variable", "must be a string");
    }
  }
  if (const auto v = parse_sweep_variable(variable)) {
    spec.variable = *v;
  } else {
    issues.add("variable", "must be zone_length, demand, derating or lc_residual_drop");
  }

  if (j.contains("values")) {
    const auto& v = j.at("values");
    if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
      spec.values = v.get<std::vector<double>>();
    } else {
      issues.add("values", "must be an array of numbers");
    }
  } else if (spec.variable == SweepVariable::zone_length) {
    spec.values = spec.base.zone_length_sweep;
  }
  if (j.contains("repetitions")) {
    if (j.at("repetitions").is_number_integer()) {
      spec.repetitions = j.at("repetitions").get<int>();
    } else {
      issues.add("repetitions", "must be an integer");
    }
  }
  if (j.contains("write_traces")) {
    if (j.at("write_traces").is_boolean()) {
      spec.write_traces = j.at("write_traces").get<bool>();
    } else {
      issues.add("write_traces", "must be true or false");
    }
  }
  issues.throw_if_any();
  check_sweep(spec).throw_if_any();
  return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_sweep_spec(ss.str(), dir.empty() ? "." : dir.string());
}

int default_jobs() {
  if (const char* env = std::getenv("VSLCTM_JOBS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepOptions& opts) {
  check_sweep(spec).throw_if_any();
  std::vector<SweepRow> rows(spec.values.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) rows[i] = run_one(spec, i, opts);
  };
  const auto jobs = static_cast<std::size_t>(std::max(1, opts.jobs));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < std::min(jobs, rows.size()); ++t) pool.emplace_back(worker);
  worker();
  return rows;
}

void write_summary_csv(std::ostream& out, const SweepSpec& spec,
                       const std::vector<SweepRow>& rows) {
  out << "# sweep variable=" << to_string(spec.variable)
      << " base_hash=" << scenario_hash(spec.base) << "\n";
  out << "# units: att=min emission=g/veh/km speeds=km/h times=min lengths=km\n";
  out << "value,status,error,att_min,avg_stops,avg_emission,rrmse,vehicles_counted,"
         "vehicles_seeded,v0_congested,v0_cleared,switch_time_min,l0_lower_bound_km,"
         "l0_bound_raw_km,clear_time_min,arrival_time_min,verdict,balance_residual,"
         "scenario_hash\n";
  for (const auto& r : rows) {
    out << fmt(r.value) << ',' << (r.ok ? "ok" : "failed") << ',' << csv_field(r.error) << ',';
    if (r.metrics) {
      const auto& m = *r.metrics;
      out << fmt(m.att_min) << ',' << fmt(m.avg_stops) << ',' << fmt(m.avg_emission) << ','
          << fmt(m.rrmse) << ',' << m.vehicles_counted << ',' << m.vehicles_seeded << ',';
    } else {
      out << ",,,,,,";
    }
    if (r.schedule) {
      out << fmt(r.schedule->v0_congested) << ',' << fmt(r.schedule->v0_cleared) << ','
          << fmt(r.schedule->switch_time * 60.0) << ',';
    } else {
      out << ",,,";
    }
    if (r.bound) {
      const auto& b = *r.bound;
      if (b.bound) {
        out << fmt(b.bound->km) << ',' << fmt(b.bound->raw_km) << ',';
      } else {
        out << ",,";
      }
      out << fmt(b.clear_time * 60.0) << ',' << fmt(b.arrival_time * 60.0) << ','
          << to_string(b.verdict) << ',';
    } else {
      out << ",,,,,";
    }
    out << (r.metrics ? fmt(r.balance_residual) : std::string()) << ',' << r.hash << '\n';
  }
}

}  // namespace vslctm

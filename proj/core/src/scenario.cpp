#include "vslctm/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace vslctm {
namespace {

using nlohmann::json;

constexpr double kMinutesPerHour = 60.0;
constexpr double kSecondsPerHour = 3600.0;

// Field reader that records every problem instead of stopping at the first.
class Reader {
 public:
  explicit Reader(IssueList& issues) : issues_(issues) {}

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    issues_.add(path, "must be an object");
    return false;
  }

  void allowed(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : j.items()) {
      bool known = false;
      for (const char* key : keys) known = known || k == key;
      if (!known) issues_.add(join(path, k), "unknown field");
    }
  }

  void number(const json& j, const std::string& path, const char* key, double& out,
              bool required = false) {
    if (!present(j, path, key, required)) return;
    const auto& v = j.at(key);
    if (v.is_number()) {
      out = v.get<double>();
    } else {
      issues_.add(join(path, key), "must be a number");
    }
  }

  void optional_number(const json& j, const std::string& path, const char* key,
                       std::optional<double>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
      out.reset();
      return;
    }
    double v = 0.0;
    number(j, path, key, v);
    out = v;
  }

  void integer(const json& j, const std::string& path, const char* key, int& out) {
    if (!present(j, path, key, false)) return;
    const auto& v = j.at(key);
    if (v.is_number_integer()) {
      out = v.get<int>();
    } else {
      issues_.add(join(path, key), "must be an integer");
    }
  }

  void unsigned_integer(const json& j, const std::string& path, const char* key,
                        std::uint64_t& out) {
    if (!present(j, path, key, false)) return;
    const auto& v = j.at(key);
    if (v.is_number_unsigned()) {
      out = v.get<std::uint64_t>();
    } else {
      issues_.add(join(path, key), "must be a non-negative integer");
    }
  }

  void string(const json& j, const std::string& path, const char* key, std::string& out) {
    if (!present(j, path, key, false)) return;
    const auto& v = j.at(key);
    if (v.is_string()) {
      out = v.get<std::string>();
    } else {
      issues_.add(join(path, key), "must be a string");
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  IssueList& issues() { return issues_; }

 private:
  bool present(const json& j, const std::string& path, const char* key, bool required) {
    if (j.contains(key)) return true;
    if (required) issues_.add(join(path, key), "is required");
    return false;
  }

  IssueList& issues_;
};

void read_fd(Reader& r, const json& j, FdParams& fd) {
  const std::string p = "fundamental_diagram";
  if (!r.object(j, p)) return;
  r.allowed(j, p,
            {"capacity", "downstream_capacity", "free_flow_speed", "backprop_speed",
             "outflow_backprop_speed", "jam_density", "outflow_jam_density", "capacity_drop"});
  r.number(j, p, "capacity", fd.capacity);
  r.number(j, p, "downstream_capacity", fd.downstream_capacity);
  r.number(j, p, "free_flow_speed", fd.free_flow_speed);
  r.number(j, p, "backprop_speed", fd.backprop_speed);
  r.number(j, p, "outflow_backprop_speed", fd.outflow_backprop_speed);
  r.number(j, p, "capacity_drop", fd.capacity_drop);
  // Jam densities left out are closed from the triangle.
  const double rho_c = fd.free_flow_speed > 0.0 ? fd.capacity / fd.free_flow_speed : 0.0;
  if (fd.backprop_speed > 0.0) fd.jam_density = rho_c + fd.capacity / fd.backprop_speed;
  if (fd.outflow_backprop_speed > 0.0) {
    fd.outflow_jam_density = rho_c + fd.capacity / fd.outflow_backprop_speed;
  }
  r.number(j, p, "jam_density", fd.jam_density);
  r.number(j, p, "outflow_jam_density", fd.outflow_jam_density);
}

void read_geometry(Reader& r, const json& j, NetworkGeometry& g) {
  const std::string p = "geometry";
  if (!r.object(j, p)) return;
  r.allowed(j, p, {"num_sections", "section_length", "upstream_zone_length", "lanes_total"});
  r.integer(j, p, "num_sections", g.num_sections);
  r.number(j, p, "section_length", g.section_length);
  r.number(j, p, "upstream_zone_length", g.upstream_zone_length);
  r.integer(j, p, "lanes_total", g.lanes_total);
}

void read_demand(Reader& r, const json& j, std::vector<DemandProfile::Step>& steps) {
  steps.clear();
  if (j.is_number()) {
    steps.push_back({0.0, j.get<double>()});
    return;
  }
  if (!j.is_array()) {
    r.issues().add("demand", "must be a number or an array of {start, flow}");
    return;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = "demand[" + std::to_string(i) + "]";
    DemandProfile::Step s;
    if (r.object(j[i], p)) {
      r.allowed(j[i], p, {"start", "flow"});
      r.number(j[i], p, "start", s.start, true);
      r.number(j[i], p, "flow", s.flow, true);
    }
    steps.push_back(s);
  }
}

void read_incident(Reader& r, const json& j, std::optional<IncidentWindow>& out) {
  if (j.is_null()) {
    out.reset();
    return;
  }
  const std::string p = "incident";
  IncidentWindow w;
  if (r.object(j, p)) {
    r.allowed(j, p, {"start", "end", "lanes_closed"});
    r.number(j, p, "start", w.start, true);
    r.number(j, p, "end", w.end, true);
    r.integer(j, p, "lanes_closed", w.lanes_closed);
  }
  out = w;
}

void read_controller(Reader& r, const json& j, ControllerKind& kind, RuleSettings& rule) {
  const std::string p = "controller";
  if (j.is_string()) {
    const auto k = parse_controller_kind(j.get<std::string>());
    if (k) {
      kind = *k;
    } else {
      r.issues().add(p, "unknown controller '" + j.get<std::string>() + "'");
    }
    return;
  }
  if (!r.object(j, p)) return;
  r.allowed(j, p, {"kind", "derating", "switch_margin", "quantization", "switch_delay"});
  std::string name = to_string(kind);
  r.string(j, p, "kind", name);
  if (const auto k = parse_controller_kind(name)) {
    kind = *k;
  } else {
    r.issues().add(p + ".kind", "unknown controller '" + name + "'");
  }
  r.number(j, p, "derating", rule.derating);
  r.number(j, p, "switch_margin", rule.switch_margin);
  r.number(j, p, "quantization", rule.quantization);
  r.optional_number(j, p, "switch_delay", rule.switch_delay);
}

void read_lane_change(Reader& r, const json& j, std::optional<LcConfig>& out) {
  if (j.is_null()) {
    out.reset();
    return;
  }
  const std::string p = "lane_change";
  LcConfig lc;
  if (r.object(j, p)) {
    r.allowed(j, p, {"xi", "residual_drop"});
    r.number(j, p, "xi", lc.xi);
    r.number(j, p, "residual_drop", lc.residual_drop);
  }
  out = lc;
}

void read_metrics(Reader& r, const json& j, MetricSettings& m) {
  const std::string p = "metrics";
  if (!r.object(j, p)) return;
  r.allowed(j, p,
            {"seed_interval", "v_stop", "v_resume", "target_density", "aggregation", "emission",
             "emission_table"});
  r.number(j, p, "seed_interval", m.seed_interval);
  r.number(j, p, "v_stop", m.v_stop);
  r.number(j, p, "v_resume", m.v_resume);
  r.optional_number(j, p, "target_density", m.target_density);
  if (j.contains("aggregation")) {
    std::string a;
    r.string(j, p, "aggregation", a);
    if (a == "cross_section_average") {
      m.aggregation = DensityAggregation::cross_section_average;
    } else if (a == "per_section") {
      m.aggregation = DensityAggregation::per_section;
    } else if (j.at("aggregation").is_string()) {
      r.issues().add(p + ".aggregation", "must be cross_section_average or per_section");
    }
  }
  if (j.contains("emission")) {
    const auto& e = j.at("emission");
    const std::string ep = p + ".emission";
    if (r.object(e, ep)) {
      r.allowed(e, ep, {"a", "b", "c"});
      r.number(e, ep, "a", m.emission.a);
      r.number(e, ep, "b", m.emission.b);
      r.number(e, ep, "c", m.emission.c);
    }
  }
  if (j.contains("emission_table")) {
    if (j.at("emission_table").is_null()) {
      m.emission_table.reset();
    } else {
      std::string path;
      r.string(j, p, "emission_table", path);
      m.emission_table = path;
    }
  }
}

Scenario from_json(const json& j) {
  IssueList issues;
  Reader r(issues);
  Scenario s;
  if (!r.object(j, "")) issues.throw_if_any();
  r.allowed(j, "",
            {"name", "fundamental_diagram", "geometry", "demand", "incident", "controller",
             "lane_change", "horizon", "dt", "control_period", "initial", "metrics", "seed",
             "zone_length_sweep"});
  r.string(j, "", "name", s.name);
  if (j.contains("fundamental_diagram")) read_fd(r, j.at("fundamental_diagram"), s.fd);
  if (j.contains("geometry")) read_geometry(r, j.at("geometry"), s.geometry);
  if (j.contains("demand")) {
    read_demand(r, j.at("demand"), s.demand);
  } else {
    issues.add("demand", "is required");
  }
  if (j.contains("incident")) read_incident(r, j.at("incident"), s.incident);
  if (j.contains("controller")) read_controller(r, j.at("controller"), s.controller, s.rule);
  if (j.contains("lane_change")) read_lane_change(r, j.at("lane_change"), s.lane_change);
  r.number(j, "", "horizon", s.horizon);
  r.number(j, "", "dt", s.dt);
  r.number(j, "", "control_period", s.control_period);
  if (j.contains("initial")) {
    std::string ic;
    r.string(j, "", "initial", ic);
    if (const auto v = parse_initial_condition(ic)) {
      s.initial = *v;
    } else if (j.at("initial").is_string()) {
      issues.add("initial", "must be empty, free_flow or warmup");
    }
  }
  if (j.contains("metrics")) read_metrics(r, j.at("metrics"), s.metrics);
  r.unsigned_integer(j, "", "seed", s.seed);
  if (j.contains("zone_length_sweep")) {
    const auto& v = j.at("zone_length_sweep");
    if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
      s.zone_length_sweep = v.get<std::vector<double>>();
    } else {
      issues.add("zone_length_sweep", "must be an array of numbers");
    }
  }
  s.geometry.lanes_closed = s.incident ? s.incident->lanes_closed : 0;

  issues.merge(check_scenario(s), "");
  issues.throw_if_any();
  return s;
}

json to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["fundamental_diagram"] = {{"capacity", s.fd.capacity},
                              {"downstream_capacity", s.fd.downstream_capacity},
                              {"free_flow_speed", s.fd.free_flow_speed},
                              {"backprop_speed", s.fd.backprop_speed},
                              {"outflow_backprop_speed", s.fd.outflow_backprop_speed},
                              {"jam_density", s.fd.jam_density},
                              {"outflow_jam_density", s.fd.outflow_jam_density},
                              {"capacity_drop", s.fd.capacity_drop}};
  j["geometry"] = {{"num_sections", s.geometry.num_sections},
                   {"section_length", s.geometry.section_length},
                   {"upstream_zone_length", s.geometry.upstream_zone_length},
                   {"lanes_total", s.geometry.lanes_total}};
  j["demand"] = json::array();
  for (const auto& d : s.demand) j["demand"].push_back({{"start", d.start}, {"flow", d.flow}});
  j["incident"] = s.incident ? json{{"start", s.incident->start},
                                    {"end", s.incident->end},
                                    {"lanes_closed", s.incident->lanes_closed}}
                             : json(nullptr);
  j["controller"] = {{"kind", to_string(s.controller)},
                     {"derating", s.rule.derating},
                     {"switch_margin", s.rule.switch_margin},
                     {"quantization", s.rule.quantization},
                     {"switch_delay", s.rule.switch_delay ? json(*s.rule.switch_delay)
                                                          : json(nullptr)}};
  j["lane_change"] = s.lane_change ? json{{"xi", s.lane_change->xi},
                                          {"residual_drop", s.lane_change->residual_drop}}
                                   : json(nullptr);
  j["horizon"] = s.horizon;
  j["dt"] = s.dt;
  j["control_period"] = s.control_period;
  j["initial"] = to_string(s.initial);
  const auto& m = s.metrics;
  j["metrics"] = {
      {"seed_interval", m.seed_interval},
      {"v_stop", m.v_stop},
      {"v_resume", m.v_resume},
      {"target_density", m.target_density ? json(*m.target_density) : json(nullptr)},
      {"aggregation", m.aggregation == DensityAggregation::per_section ? "per_section"
                                                                       : "cross_section_average"},
      {"emission", {{"a", m.emission.a}, {"b", m.emission.b}, {"c", m.emission.c}}},
      {"emission_table", m.emission_table ? json(*m.emission_table) : json(nullptr)}};
  j["seed"] = s.seed;
  j["zone_length_sweep"] = s.zone_length_sweep;
  return j;
}

Scenario paper_base(const std::string& name, double demand, double zone_length, double xi) {
  Scenario s;
  s.name = name;
  s.geometry.num_sections = 6;
  s.geometry.section_length = 1.6;
  s.geometry.upstream_zone_length = zone_length;
  s.geometry.lanes_total = 3;
  s.geometry.lanes_closed = 1;
  s.demand = {{0.0, demand}};
  s.incident = IncidentWindow{10.0, 80.0, 1};
  s.controller = ControllerKind::rule_based;
  // 0.8 x {25.7, 31.6} rounded down to 5 km/h gives the posted 20 and 25 km/h;
  // the switch follows the posted 20 minutes.
  s.rule = RuleSettings{0.8, 0.0, 5.0, 20.0};
  s.lane_change = LcConfig{xi, 0.0};
  s.horizon = 90.0;
  s.dt = 1.0;
  s.control_period = 30.0;
  s.initial = InitialCondition::warmup;
  return s;
}

}  // namespace

const char* to_string(InitialCondition ic) {
  switch (ic) {
    case InitialCondition::empty:
      return "empty";
    case InitialCondition::free_flow:
      return "free_flow";
    case InitialCondition::warmup:
      return "warmup";
  }
  return "unknown";
}

std::optional<InitialCondition> parse_initial_condition(const std::string& s) {
  if (s == "empty") return InitialCondition::empty;
  if (s == "free_flow") return InitialCondition::free_flow;
  if (s == "warmup") return InitialCondition::warmup;
  return std::nullopt;
}

VslRuleConfig RuleSettings::to_config() const {
  VslRuleConfig c;
  c.derating = derating;
  c.switch_margin = switch_margin / kMinutesPerHour;
  c.quantization = quantization;
  if (switch_delay) c.switch_delay = *switch_delay / kMinutesPerHour;
  return c;
}

IssueList check_scenario(const Scenario& s) {
  IssueList issues;
  const auto fd_issues = FundamentalDiagram::check(s.fd);
  issues.merge(fd_issues, "fundamental_diagram");
  issues.merge(s.rule.to_config().check(), "controller");
  issues.require(std::isfinite(s.horizon) && s.horizon > 0.0, "horizon", "must be > 0");
  if (s.incident) {
    issues.require(s.incident->end < s.horizon, "horizon", "must exceed incident.end");
  }
  const bool needs_incident = s.controller != ControllerKind::no_control;
  issues.require(!needs_incident || s.incident.has_value(), "controller.kind",
                 "rule-based control needs an incident");
  const auto& m = s.metrics;
  issues.require(std::isfinite(m.seed_interval) && m.seed_interval > 0.0,
                 "metrics.seed_interval", "must be > 0");
  issues.require(m.v_stop >= 0.0 && m.v_resume > m.v_stop, "metrics.v_resume",
                 "must exceed v_stop >= 0");
  if (m.target_density) {
    issues.require(*m.target_density > 0.0, "metrics.target_density", "must be > 0");
  }
  for (std::size_t i = 0; i < s.zone_length_sweep.size(); ++i) {
    issues.require(s.zone_length_sweep[i] >= 0.0,
                   "zone_length_sweep[" + std::to_string(i) + "]", "must be >= 0");
  }
  if (!fd_issues.empty() || !s.geometry.check().empty()) {
    issues.merge(DemandProfile::check(s.demand), "");
    issues.merge(s.geometry.check(), "geometry");
    return issues;
  }

  // Reuse the run-level checks (CFL, control period, components) on a
  // placeholder initial state.
  RunConfig c;
  c.fd = FundamentalDiagram(s.fd);
  c.geometry = s.geometry;
  if (DemandProfile::check(s.demand).empty()) c.demand = DemandProfile(s.demand);
  if (s.incident) {
    c.incident = IncidentSchedule{s.incident->start / kMinutesPerHour,
                                  s.incident->end / kMinutesPerHour, s.incident->lanes_closed};
  }
  c.lane_change = s.lane_change;
  c.horizon = s.horizon / kMinutesPerHour;
  c.dt = s.dt / kSecondsPerHour;
  c.control_period = s.control_period / kSecondsPerHour;
  c.initial = empty_state(s.geometry);
  issues.merge(check_run_config(c), "");
  return issues;
}

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("scenario JSON: top level must be an object");
  return from_json(j);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string scenario_to_json(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

void save_scenario(const std::string& path, const Scenario& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << scenario_to_json(s);
}

std::string scenario_hash(const Scenario& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : to_json(s).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> preset_names() { return {"paper_high_demand", "paper_moderate_demand"}; }

std::string preset_description(const std::string& name) {
  if (name == "paper_high_demand") {
    return "d=7000 veh/h, L0=4.8 km, lane closure 10-80 min, v0 20 -> 25 km/h at 30 min, "
           "LC advisories 800 m";
  }
  if (name == "paper_moderate_demand") {
    return "d=5500 veh/h, L0=1.6 km, lane closure 10-80 min, v0 20 -> 25 km/h at 30 min, "
           "LC advisories 700 m";
  }
  throw ValidationError("preset: unknown preset '" + name + "'");
}

Scenario preset(const std::string& name) {
  if (name == "paper_high_demand") {
    auto s = paper_base(name, 7000.0, 4.8, 800.0);
    s.zone_length_sweep = {0.0, 0.8, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 3.2, 4.0, 4.8};
    return s;
  }
  if (name == "paper_moderate_demand") {
    auto s = paper_base(name, 5500.0, 1.6, 700.0);
    s.zone_length_sweep = {0.0, 0.4, 0.6, 0.8, 1.0, 1.2, 1.6, 3.2, 4.8};
    return s;
  }
  throw ValidationError("preset: unknown preset '" + name + "'");
}

double demand_at(const Scenario& s, double t_min) {
  double flow = s.demand.front().flow;
  for (const auto& d : s.demand) {
    if (d.start > t_min) break;
    flow = d.flow;
  }
  return flow;
}

RunConfig to_run_config(const Scenario& s) {
  check_scenario(s).throw_if_any();
  RunConfig c;
  c.fd = FundamentalDiagram(s.fd);
  c.geometry = s.geometry;
  std::vector<DemandProfile::Step> steps;
  for (const auto& d : s.demand) steps.push_back({d.start / kMinutesPerHour, d.flow});
  c.demand = DemandProfile(steps);
  if (s.incident) {
    c.incident = IncidentSchedule{s.incident->start / kMinutesPerHour,
                                  s.incident->end / kMinutesPerHour, s.incident->lanes_closed};
  }
  c.lane_change = s.lane_change;
  c.horizon = s.horizon / kMinutesPerHour;
  c.dt = s.dt / kSecondsPerHour;
  c.control_period = s.control_period / kSecondsPerHour;
  const double d0 = s.demand.front().flow;
  switch (s.initial) {
    case InitialCondition::empty:
      c.initial = empty_state(s.geometry);
      break;
    case InitialCondition::free_flow:
      c.initial = free_flow_state(c.fd, s.geometry, d0);
      break;
    case InitialCondition::warmup:
      c.initial = warmup_state(c.fd, s.geometry, d0, c.dt);
      break;
  }
  return c;
}

std::optional<VslSchedule> scenario_schedule(const Scenario& s) {
  if (!s.incident) return std::nullopt;
  const IncidentSchedule inc{s.incident->start / kMinutesPerHour,
                             s.incident->end / kMinutesPerHour, s.incident->lanes_closed};
  return make_schedule(inc, s.rule.to_config(), FundamentalDiagram(s.fd), s.geometry,
                       demand_at(s, s.incident->start));
}

std::unique_ptr<Controller> make_controller(const Scenario& s) {
  const FundamentalDiagram fd(s.fd);
  switch (s.controller) {
    case ControllerKind::no_control:
      return std::make_unique<NoControl>(fd.free_flow_speed(), s.geometry.num_sections);
    case ControllerKind::rule_based:
      return std::make_unique<RuleBasedController>(*scenario_schedule(s));
    case ControllerKind::rule_based_reactive: {
      const auto c = to_run_config(s);
      return std::make_unique<ReactiveRuleController>(fd, *c.incident, s.rule.to_config(),
                                                      c.demand, s.geometry.num_sections);
    }
  }
  throw ValidationError("controller.kind: unsupported");
}

MetricsConfig metrics_config(const Scenario& s) {
  MetricsConfig m;
  m.seed_interval = s.metrics.seed_interval / kSecondsPerHour;
  m.v_stop = s.metrics.v_stop;
  m.v_resume = s.metrics.v_resume;
  if (s.metrics.emission_table) {
    m.emission = load_emission_table(*s.metrics.emission_table);
  } else {
    m.emission = s.metrics.emission;
  }
  return m;
}

BoundInputs bound_inputs_at_onset(const Scenario& s, const SimulationTrace& trace) {
  if (!s.incident) throw ValidationError("incident: bound inputs need an incident");
  const auto k = trace.index_at(s.incident->start / kMinutesPerHour);
  if (k >= trace.size()) throw SimulationError("trace ends before the incident starts");
  BoundInputs in;
  in.fd = FundamentalDiagram(s.fd);
  in.num_sections = s.geometry.num_sections;
  in.section_length = s.geometry.section_length;
  in.v0 = scenario_schedule(s)->v0_congested;
  in.upstream_density = trace.states[k].upstream_density;
  in.densities = trace.states[k].densities;
  return in;
}

BoundReport evaluate_bound(const BoundInputs& in, double zone_length) {
  in.check().throw_if_any();
  BoundReport r;
  r.inputs = in;
  try {
    r.bound = l0_lower_bound(in);
  } catch (const InfeasibleCommand& e) {
    r.infeasible_reason = e.what();
  }
  r.clear_time = time_to_clear(in, zone_length);
  r.arrival_time = arrival_time(zone_length, in.v0, in.num_sections, in.section_length,
                                in.fd.free_flow_speed());
  r.verdict = chasing_verdict(in, zone_length).outcome;
  return r;
}

ScenarioResult run_scenario(const Scenario& s) {
  ScenarioResult r;
  r.hash = scenario_hash(s);
  const auto config = to_run_config(s);
  auto controller = make_controller(s);
  r.trace = run(config, *controller);
  r.balance = vehicle_balance(r.trace);
  r.schedule = scenario_schedule(s);

  std::optional<std::pair<double, double>> window;
  double target = s.metrics.target_density.value_or(0.0);
  if (s.incident) {
    if (!s.metrics.target_density) {
      target = equilibrium_density(demand_at(s, s.incident->start), config.fd);
    }
    if (r.schedule->switch_time < r.schedule->incident_end) {
      window = std::make_pair(r.schedule->switch_time, r.schedule->incident_end);
    }
    r.bound = evaluate_bound(bound_inputs_at_onset(s, r.trace), s.geometry.upstream_zone_length);
  }
  auto mc = metrics_config(s);
  r.metrics = compute_metrics(r.trace, mc, target > 0.0 ? target : 1.0, window);
  if (window && s.metrics.aggregation == DensityAggregation::per_section) {
    r.metrics.rrmse = rrmse_density(r.trace, target, window->first, window->second,
                                    DensityAggregation::per_section);
  }
  return r;
}

}  // namespace vslctm

#include "vslctm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace vslctm {
namespace {

struct CellView {
  double density;
  double outflow;
  double limit;
  double end;  ///< downstream boundary, km
};

// Cell 0 is the zone when present; sections follow.
CellView cell_at(const SimulationTrace& trace, std::size_t k, int cell) {
  const auto& g = trace.geometry;
  const auto& s = trace.states[k];
  const auto& q = trace.flows[k];
  const auto& v = trace.limits[k];
  if (g.has_zone()) {
    if (cell == 0) return {s.upstream_density, q.interface[0], v.v0, g.upstream_zone_length};
    const auto i = static_cast<std::size_t>(cell - 1);
    return {s.densities[i], q.interface[i + 1], v.downstream[i],
            g.upstream_zone_length + cell * g.section_length};
  }
  const auto i = static_cast<std::size_t>(cell);
  return {s.densities[i], q.interface[i + 1], v.downstream[i], (cell + 1) * g.section_length};
}

VirtualTrajectory trace_vehicle(const SimulationTrace& trace, std::size_t k, double entry) {
  const auto& g = trace.geometry;
  const int cells = g.num_sections + (g.has_zone() ? 1 : 0);
  const double exit_at = g.total_length();

  VirtualTrajectory tr;
  tr.entry_time = entry;
  tr.times.push_back(entry);
  tr.positions.push_back(0.0);

  int cell = 0;
  double x = 0.0;
  double t = entry;
  while (k + 1 < trace.size()) {
    const double t_next = trace.times[k + 1];
    while (t < t_next) {
      const auto c = cell_at(trace, k, cell);
      const double v = cell_speed(c.density, c.outflow, c.limit);
      const double to_boundary = v > 0.0 ? (c.end - x) / v : INFINITY;
      tr.speeds.push_back(v);
      if (t + to_boundary <= t_next) {
        t += to_boundary;
        x = c.end;
        tr.times.push_back(t);
        tr.positions.push_back(x);
        if (++cell == cells) {
          tr.positions.back() = exit_at;
          tr.exit_time = t;
          return tr;
        }
      } else {
        x += v * (t_next - t);
        t = t_next;
        tr.times.push_back(t);
        tr.positions.push_back(std::min(x, c.end));
      }
    }
    ++k;
  }
  return tr;
}

}  // namespace

double cell_speed(double density, double outflow, double limit, double min_density) {
  if (density <= min_density) return limit;
  return std::max(0.0, std::min(outflow / density, limit));
}

double VirtualTrajectory::transit_time() const {
  if (!exit_time) throw MetricError("trajectory has not exited the network");
  return *exit_time - entry_time;
}

std::vector<VirtualTrajectory> reconstruct_trajectories(const SimulationTrace& trace,
                                                        double seed_interval) {
  if (!(seed_interval > 0.0)) throw ValidationError("seed_interval: must be > 0");
  std::vector<VirtualTrajectory> out;
  if (trace.size() < 2) return out;
  const double horizon = trace.times.back();
  for (std::size_t j = 0;; ++j) {
    const double entry = static_cast<double>(j) * seed_interval;
    if (entry >= horizon) break;
    // Sample whose step [t_k, t_{k+1}) contains the entry time.
    std::size_t k = trace.index_at(entry);
    if (k >= trace.size() || trace.times[k] > entry + 1e-9 * trace.dt) --k;
    if (!(trace.flows[k].inflow > 0.0)) continue;
    out.push_back(trace_vehicle(trace, k, entry));
  }
  return out;
}

double att(const std::vector<VirtualTrajectory>& trajectories) {
  double sum = 0.0;
  int count = 0;
  for (const auto& tr : trajectories) {
    if (!tr.completed()) continue;
    sum += tr.transit_time();
    ++count;
  }
  if (count == 0) throw MetricError("no completed trajectories; ATT undefined");
  return 60.0 * sum / count;
}

double avg_stops(const std::vector<VirtualTrajectory>& trajectories, double v_stop,
                 double v_resume) {
  if (!(v_stop < v_resume)) throw ValidationError("v_stop: must be < v_resume");
  if (trajectories.empty()) return 0.0;
  double total = 0.0;
  for (const auto& tr : trajectories) {
    bool armed = false;
    int stops = 0;
    for (double v : tr.speeds) {
      if (v >= v_resume) armed = true;
      if (armed && v < v_stop) {
        ++stops;
        armed = false;
      }
    }
    total += stops;
  }
  return total / static_cast<double>(trajectories.size());
}

double EmissionCurve::operator()(double speed) const {
  const double v = std::max(speed, 1.0);
  return a + b / v + c * v * v;
}

double EmissionTable::operator()(double speed) const {
  if (speeds.empty()) return 0.0;
  if (speed <= speeds.front()) return rates.front();
  if (speed >= speeds.back()) return rates.back();
  const auto it = std::upper_bound(speeds.begin(), speeds.end(), speed);
  const auto i = static_cast<std::size_t>(it - speeds.begin());
  const double f = (speed - speeds[i - 1]) / (speeds[i] - speeds[i - 1]);
  return rates[i - 1] + f * (rates[i] - rates[i - 1]);
}

IssueList EmissionTable::check() const {
  IssueList issues;
  issues.require(!speeds.empty() && speeds.size() == rates.size(), "emission_table",
                 "needs matching, non-empty speed and rate columns");
  for (std::size_t i = 1; i < speeds.size(); ++i) {
    issues.require(speeds[i] > speeds[i - 1], "emission_table.speed",
                   "must be strictly increasing");
  }
  for (double r : rates) issues.require(r >= 0.0, "emission_table.rate", "must be >= 0");
  return issues;
}

EmissionTable load_emission_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open emission table " + path);
  EmissionTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double v = 0.0;
    double r = 0.0;
    if (!(row >> v >> r)) {
      if (line_no == 1) continue;  // header
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected two numbers");
    }
    table.speeds.push_back(v);
    table.rates.push_back(r);
  }
  table.check().throw_if_any();
  return table;
}

double avg_emission(const std::vector<VirtualTrajectory>& trajectories, const EmissionRate& rate) {
  double emitted = 0.0;
  double distance = 0.0;
  for (const auto& tr : trajectories) {
    for (std::size_t j = 0; j < tr.speeds.size(); ++j) {
      const double d = tr.positions[j + 1] - tr.positions[j];
      emitted += rate(tr.speeds[j]) * d;
      distance += d;
    }
  }
  return distance > 0.0 ? emitted / distance : 0.0;
}

double rrmse_density(const SimulationTrace& trace, double target, double t_start, double t_end,
                     DensityAggregation aggregation) {
  if (!(target > 0.0)) throw MetricError("rrmse target density must be > 0");
  if (!(t_start < t_end)) throw MetricError("rrmse window must satisfy t_s < t_e");
  if (trace.size() < 2 || t_start < trace.times.front() || t_end > trace.times.back()) {
    throw MetricError("rrmse window lies outside the trace");
  }

  // Densities are linear inside a step, so each error profile is linear and
  // its square integrates exactly to dt (e0^2 + e0 e1 + e1^2) / 3.
  const auto segment = [&](std::size_t k, double f0, double f1) {
    const double dt = (f1 - f0) * (trace.times[k + 1] - trace.times[k]);
    if (dt <= 0.0) return 0.0;
    const auto& a = trace.states[k].densities;
    const auto& b = trace.states[k + 1].densities;
    const auto n = static_cast<double>(a.size());
    if (aggregation == DensityAggregation::cross_section_average) {
      double ma = 0.0;
      double mb = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        ma += (a[i] + f0 * (b[i] - a[i])) / n;
        mb += (a[i] + f1 * (b[i] - a[i])) / n;
      }
      const double e0 = ma - target;
      const double e1 = mb - target;
      return dt * (e0 * e0 + e0 * e1 + e1 * e1) / 3.0;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double e0 = a[i] + f0 * (b[i] - a[i]) - target;
      const double e1 = a[i] + f1 * (b[i] - a[i]) - target;
      acc += dt * (e0 * e0 + e0 * e1 + e1 * e1) / 3.0 / n;
    }
    return acc;
  };
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    const double a = trace.times[k];
    const double b = trace.times[k + 1];
    if (b <= t_start || a >= t_end) continue;
    const double lo = std::max(a, t_start);
    const double hi = std::min(b, t_end);
    integral += segment(k, (lo - a) / (b - a), (hi - a) / (b - a));
  }
  return std::sqrt(integral / (t_end - t_start)) / target;
}

MetricsReport compute_metrics(const SimulationTrace& trace, const MetricsConfig& cfg,
                              double target_density,
                              std::optional<std::pair<double, double>> rrmse_window) {
  MetricsReport report;
  const auto all = reconstruct_trajectories(trace, cfg.seed_interval);
  std::vector<VirtualTrajectory> done;
  for (const auto& tr : all) {
    if (tr.completed()) done.push_back(tr);
  }
  report.vehicles_seeded = static_cast<int>(all.size());
  report.vehicles_counted = static_cast<int>(done.size());
  if (!done.empty()) report.att_min = att(done);
  report.avg_stops = avg_stops(done, cfg.v_stop, cfg.v_resume);
  report.avg_emission = avg_emission(done, cfg.emission);
  if (rrmse_window && target_density > 0.0) {
    report.rrmse =
        rrmse_density(trace, target_density, rrmse_window->first, rrmse_window->second);
  }
  return report;
}

}  // namespace vslctm

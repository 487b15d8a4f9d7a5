#include "vslctm/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <cstdio>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace vslctm {
namespace {

constexpr int kPlateauIterations = 20;

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

std::optional<Line> least_squares(const std::vector<FdObservation>& pts) {
  if (pts.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.density;
    my += p.flow;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.density - mx) * (p.density - mx);
    sxy += (p.density - mx) * (p.flow - my);
  }
  if (!(sxx > 0.0)) return std::nullopt;
  const double slope = sxy / sxx;
  return Line{slope, my - slope * mx};
}

template <class Pred>
std::vector<FdObservation> select(const std::vector<FdObservation>& pts, Pred pred) {
  std::vector<FdObservation> out;
  std::copy_if(pts.begin(), pts.end(), std::back_inserter(out), pred);
  return out;
}

template <class Model>
BranchStats stats(const std::vector<FdObservation>& pts, Model model) {
  BranchStats s;
  s.count = pts.size();
  if (pts.empty()) return s;
  double ss = 0.0;
  for (const auto& p : pts) ss += std::pow(p.flow - model(p.density), 2);
  s.rms_residual = std::sqrt(ss / static_cast<double>(pts.size()));
  return s;
}

double median(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

double max_flow_density(const std::vector<FdObservation>& pts) {
  return std::max_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
           return a.flow < b.flow;
         })->density;
}

double max_density(const std::vector<FdObservation>& pts) {
  double m = 0.0;
  for (const auto& p : pts) m = std::max(m, p.density);
  return m;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) out[0] = a;
  for (std::size_t i = 0; n > 1 && i < n; ++i) {
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

// Open at the left end: (a, b] in n points.
std::vector<double> linspace_open(double a, double b, std::size_t n) {
  auto v = linspace(a, b, n + 1);
  v.erase(v.begin());
  return v;
}

bool parse_flag(const std::string& s, bool& out) {
  if (s == "1" || s == "true") return out = true, true;
  if (s == "0" || s == "false") return out = false, true;
  return false;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

IssueList CalibrationOptions::check() const {
  IssueList issues;
  if (pinned_free_flow_speed) {
    issues.require(std::isfinite(*pinned_free_flow_speed) && *pinned_free_flow_speed > 0.0,
                   "pinned_free_flow_speed", "must be finite and > 0");
  }
  issues.require(max_alternations >= 1, "max_alternations", "must be >= 1");
  issues.require(min_observations >= 2, "min_observations", "must be >= 2");
  return issues;
}

double fit_free_flow_speed(std::span<const FdObservation> obs) {
  double sq = 0.0, sr = 0.0;
  for (const auto& o : obs) {
    sq += o.flow;
    sr += o.density;
  }
  if (!(sr > 0.0)) throw CalibrationError("free-flow branch has no observation with density > 0");
  return sq / sr;
}

FdFit fit_fundamental_diagram(std::span<const FdObservation> obs, const CalibrationOptions& opts) {
  opts.check().throw_if_any();
  IssueList issues;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& o = obs[i];
    const std::string path = "observations[" + std::to_string(i) + "]";
    issues.require(std::isfinite(o.density) && o.density >= 0.0, path + ".density",
                   "must be finite and >= 0");
    issues.require(std::isfinite(o.flow) && o.flow >= 0.0, path + ".flow",
                   "must be finite and >= 0");
  }
  issues.throw_if_any();

  const std::vector<FdObservation> all(obs.begin(), obs.end());
  const auto normal = select(all, [](const auto& o) { return !o.incident; });
  const auto incident = select(all, [](const auto& o) { return o.incident; });
  if (normal.size() < opts.min_observations) {
    throw ValidationError("observations: need at least " + std::to_string(opts.min_observations) +
                          " no-incident observations, got " + std::to_string(normal.size()));
  }

  FitDiagnostics diag;

  // No-incident set: alternate the split with refits of both branches.
  double split = max_flow_density(normal);
  double vf = 0.0;
  Line cong{};
  for (int it = 1; it <= opts.max_alternations; ++it) {
    const auto free = select(normal, [&](const auto& o) { return o.density <= split; });
    const auto congested = select(normal, [&](const auto& o) { return o.density > split; });
    vf = fit_free_flow_speed(free);
    const auto line = least_squares(congested);
    if (!line) {
      throw CalibrationError(
          "single-branch data: the no-incident congested branch needs two distinct densities");
    }
    if (line->slope >= 0.0) {
      throw CalibrationError("degenerate congested fit: slope " + std::to_string(line->slope) +
                             " veh/h per veh/km is not negative");
    }
    cong = *line;
    const double next = cong.intercept / (vf - cong.slope);
    // A point sitting on the kink can flip sides on rounding alone.
    const bool same = std::abs(next - split) <= 1e-9 * split ||
                      std::none_of(normal.begin(), normal.end(), [&](const auto& o) {
                        return (o.density <= split) != (o.density <= next);
                      });
    split = next;
    diag.alternations = it;
    if (same) {
      diag.converged = true;
      break;
    }
  }
  if (!diag.converged) {
    diag.notes.push_back("branch split did not converge in " +
                         std::to_string(opts.max_alternations) + " alternations");
  }
  const double w = -cong.slope;

  // Incident set: free line, discharge plateau, outflow branch.
  if (incident.empty()) {
    throw CalibrationError("no incident observations: C_d and eps0 cannot be identified");
  }
  double breakpoint = max_flow_density(incident);
  auto super = select(incident, [&](const auto& o) { return o.density > breakpoint; });
  if (super.empty()) {
    throw CalibrationError("incident set has no observation beyond its max-flow density");
  }
  std::sort(super.begin(), super.end(),
            [](const auto& a, const auto& b) { return a.density < b.density; });
  std::vector<double> lower_half;
  for (std::size_t i = 0; i < std::max<std::size_t>(1, super.size() / 2); ++i) {
    lower_half.push_back(super[i].flow);
  }
  double plateau = median(lower_half);
  double plateau_end = breakpoint;
  double wt = 0.5 * w;
  bool fallback = true;

  for (int it = 0; it < kPlateauIterations; ++it) {
    super = select(incident, [&](const auto& o) { return o.density > breakpoint; });
    std::vector<double> dev;
    for (const auto& o : super) {
      if (o.flow > 0.5 * plateau) dev.push_back(std::abs(o.flow - plateau));
    }
    const double spread =
        std::max(0.01, dev.empty() ? 0.0 : 1.4826 * median(dev) / plateau);
    const auto band =
        select(super, [&](const auto& o) { return o.flow >= plateau * (1.0 - 3.0 * spread); });
    double end = band.empty() ? breakpoint : max_density(band);

    const auto beyond = select(incident, [&](const auto& o) { return o.density > end; });
    const auto line = least_squares(beyond);
    if (line && line->slope < 0.0) {
      wt = -line->slope;
      fallback = false;
      end = (line->intercept - plateau) / wt;
    } else {
      wt = 0.5 * w;
      fallback = true;
      end = std::max(end, max_density(incident));
    }

    const auto on_plateau = select(
        incident, [&](const auto& o) { return o.density > breakpoint && o.density <= end; });
    if (on_plateau.empty()) throw CalibrationError("incident set has no discharge plateau");
    double sum = 0.0;
    for (const auto& o : on_plateau) sum += o.flow;
    plateau = sum / static_cast<double>(on_plateau.size());

    const auto free = select(incident, [&](const auto& o) {
      return o.density <= end && std::abs(o.flow - vf * o.density) < std::abs(o.flow - plateau);
    });
    if (free.empty()) throw CalibrationError("incident set has no free-flow observations");
    const double next = max_density(free);
    const bool done = next == breakpoint && end == plateau_end;
    breakpoint = next;
    plateau_end = end;
    if (done) break;
  }
  if (fallback) diag.notes.push_back("outflow branch unfittable; w~ = w/2");

  // Pool both free-flow branches for the final v_f.
  auto pooled = select(normal, [&](const auto& o) { return o.density <= split; });
  const auto inc_free = select(incident, [&](const auto& o) { return o.density <= breakpoint; });
  pooled.insert(pooled.end(), inc_free.begin(), inc_free.end());
  diag.fitted_free_flow_speed = fit_free_flow_speed(pooled);
  diag.free_flow_pinned = opts.pinned_free_flow_speed.has_value();
  vf = opts.pinned_free_flow_speed.value_or(diag.fitted_free_flow_speed);

  const double rho_c = cong.intercept / (vf + w);
  const double capacity = vf * rho_c;
  const double cd = vf * breakpoint;
  const double eps0 = 1.0 - plateau / cd;

  diag.split_density = rho_c;
  diag.breakpoint_density = breakpoint;
  diag.plateau_end_density = plateau_end;
  diag.discharge_flow = plateau;
  diag.outflow_slope_fallback = fallback;

  const auto rho_j = capacity / vf + capacity / w;
  const auto rho_tj = capacity / vf + capacity / wt;
  diag.free = stats(select(normal, [&](const auto& o) { return o.density <= rho_c; }),
                    [&](double r) { return vf * r; });
  diag.congested = stats(select(normal, [&](const auto& o) { return o.density > rho_c; }),
                         [&](double r) { return w * (rho_j - r); });
  diag.incident_free = stats(inc_free, [&](double r) { return vf * r; });
  diag.incident_plateau = stats(select(incident,
                                       [&](const auto& o) {
                                         return o.density > breakpoint &&
                                                o.density <= plateau_end;
                                       }),
                                [&](double) { return plateau; });
  diag.incident_outflow =
      stats(select(incident, [&](const auto& o) { return o.density > plateau_end; }),
            [&](double r) { return wt * (rho_tj - r); });

  try {
    return {FundamentalDiagram::from_triangle(capacity, cd, vf, w, wt, eps0), std::move(diag)};
  } catch (const ValidationError& e) {
    std::string msg = "fitted parameters are inconsistent:";
    for (const auto& i : e.issues()) msg += " " + i + ";";
    throw CalibrationError(msg);
  }
}

std::vector<FdObservation> generate_observations(const FundamentalDiagram& fd, std::size_t n,
                                                 double noise, std::uint64_t seed) {
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ValidationError("noise: must be >= 0");
  if (n < 6) throw ValidationError("n: need at least 6 samples to cover every branch");

  const double vf = fd.free_flow_speed();
  const double w = fd.backprop_speed();
  const double wt = fd.outflow_backprop_speed();
  const double rj = fd.jam_density();
  const double rtj = fd.outflow_jam_density();
  const double rc = fd.capacity() / vf;
  const double rb = fd.downstream_capacity() / vf;
  const double discharge = (1.0 - fd.capacity_drop()) * fd.downstream_capacity();
  const double corner = rtj - discharge / wt;

  std::vector<FdObservation> out;
  out.reserve(n);
  const std::size_t half = n / 2;
  const std::size_t n_free = half / 2;
  for (double r : linspace(0.0, rc, n_free)) out.push_back({r, vf * r, false});
  for (double r : linspace_open(rc, rj, half - n_free)) {
    out.push_back({r, std::min(vf * r, w * (rj - r)), false});
  }
  const std::size_t rest = n - half;
  const std::size_t third = rest / 3;
  for (double r : linspace(0.0, rb, third)) out.push_back({r, vf * r, true});
  for (double r : linspace_open(rb, corner, third)) out.push_back({r, discharge, true});
  for (double r : linspace_open(corner, rtj, rest - 2 * third)) {
    out.push_back({r, std::min(discharge, wt * (rtj - r)), true});
  }

  if (noise > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    for (auto& o : out) o.flow = std::max(0.0, o.flow * (1.0 + noise * z(rng)));
  }
  return out;
}

std::vector<FdObservation> read_observations(std::istream& in) {
  std::vector<FdObservation> out;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(trim(c));
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (!header) {
      if (cols != std::vector<std::string>{"density", "flow", "incident"}) {
        throw ParseError(where + "expected header density,flow,incident");
      }
      header = true;
      continue;
    }
    if (cols.size() != 3) throw ParseError(where + "expected 3 columns");
    FdObservation o;
    try {
      std::size_t used = 0;
      o.density = std::stod(cols[0], &used);
      if (used != cols[0].size()) throw std::invalid_argument("trailing");
      o.flow = std::stod(cols[1], &used);
      if (used != cols[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(where + "density and flow must be numbers");
    }
    if (!parse_flag(cols[2], o.incident)) {
      throw ParseError(where + "incident must be 0, 1, true or false");
    }
    out.push_back(o);
  }
  if (!header) throw ParseError("observation file is empty");
  return out;
}

std::vector<FdObservation> load_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_observations(in);
}

void write_observations(std::ostream& out, std::span<const FdObservation> obs) {
  out << "density,flow,incident\n";
  char buf[96];
  for (const auto& o : obs) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%d\n", o.density, o.flow, o.incident ? 1 : 0);
    out << buf;
  }
}

}  // namespace vslctm

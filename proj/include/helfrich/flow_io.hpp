#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flow.hpp"
#include "mesh_io.hpp"

namespace helfrich::io {

namespace flow_io_detail {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// JSON has no NaN or infinity; those become null.
inline nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace flow_io_detail

inline void write_trace_csv(std::ostream& out, const FlowTrace& t) {
  using flow_io_detail::num;
  out << "step,energy,objective,increment,metric_derivative,diameter,diameter_lower,diameter_upper,willmore,"
         "multiplicity,mass_residual,volume_residual,symmetry_defect,inner_iterations,transport_solves,outcome,"
         "multiplicity_gap,tau_threshold\n";
  for (const auto& r : t.steps) {
    out << r.step << ',' << num(r.energy) << ',' << num(r.objective) << ',' << num(r.increment) << ','
        << num(r.metric_derivative) << ',' << num(r.diameter) << ',' << num(r.diameter_bounds.lower) << ','
        << num(r.diameter_bounds.upper) << ',' << num(r.willmore) << ',' << r.multiplicity << ','
        << num(r.mass_residual) << ',' << num(r.volume_residual) << ',' << num(r.symmetry_defect) << ','
        << r.inner_iterations << ',' << r.transport_solves << ',' << to_string(r.outcome) << ','
        << num(r.multiplicity_gap) << ',' << num(r.tau_threshold) << '\n';
  }
}

/// Pass/fail flags for the trace invariants.
struct TraceChecks {
  bool acceptance = true;        // G_n + Phi(W_n)/(2 tau) <= G_{n-1} + tol
  bool energy_monotone = true;   // G_n <= G_{n-1} + tol
  bool dissipation = true;       // G_n + cumulative dissipation <= G_0 + n tol
  bool mass_conserved = true;    // |mass - m0| <= 1e-6 m0
  bool volume_conserved = true;  // |vol - v0| <= 1e-4 v0
  bool symmetry_kept = true;     // defect <= 1e-6 sqrt(m0) diam
  bool diameter_sandwich = true; // within 3% slack
  bool multiplicity_constant = true;
  int stalled_steps = 0;
};

inline TraceChecks check_trace(const FlowTrace& t, bool symmetry_on) {
  TraceChecks c;
  const auto md = estimate_metric_derivative(t);
  const double tol = t.tol_accept;
  const auto& s = t.steps;
  for (std::size_t n = 0; n < s.size(); ++n) {
    const auto& r = s[n];
    if (r.mass_residual > 1e-6 * t.m0) c.mass_conserved = false;
    if (t.v0 && r.volume_residual > 1e-4 * *t.v0) c.volume_conserved = false;
    if (symmetry_on && r.symmetry_defect > 1e-6 * std::sqrt(t.m0) * r.diameter) c.symmetry_kept = false;
    if (r.diameter_bounds.upper > 0.0 &&
        (r.diameter < 0.97 * r.diameter_bounds.lower || r.diameter > 1.03 * r.diameter_bounds.upper))
      c.diameter_sandwich = false;
    if (r.outcome == StepOutcome::stalled) ++c.stalled_steps;
    if (n == 0) continue;
    const double phi = t.power == IncrementPower::squared ? r.increment * r.increment : std::pow(r.increment, t.p);
    if (r.energy + phi / (2 * t.tau) > s[n - 1].energy + tol) c.acceptance = false;
    if (r.energy > s[n - 1].energy + tol) c.energy_monotone = false;
    if (r.energy + md.dissipation[n - 1] > s[0].energy + static_cast<double>(n) * tol) c.dissipation = false;
    if (r.multiplicity != s[n - 1].multiplicity) c.multiplicity_constant = false;
  }
  return c;
}

/// Final-state summary. Contains no timings so reruns are byte-identical.
inline nlohmann::json flow_summary(const FlowResult& res, const HelfrichParams& params, bool symmetry_on) {
  using flow_io_detail::finite_or_null;
  nlohmann::json j;
  const auto& t = res.trace;
  j["steps_completed"] = t.steps.empty() ? 0 : t.steps.back().step;
  j["tau"] = t.tau;
  j["tol_accept"] = t.tol_accept;
  j["m0"] = t.m0;
  j["v0"] = t.v0 ? nlohmann::json(*t.v0) : nlohmann::json();
  j["prepass_steps"] = res.prepass_steps;
  if (!t.steps.empty()) {
    j["initial_energy"] = t.steps.front().energy;
    j["final_energy"] = t.steps.back().energy;
    j["final_multiplicity"] = t.steps.back().multiplicity;
    j["final_diameter"] = t.steps.back().diameter;
    j["diameter_bounds"] = {{"lower", t.steps.back().diameter_bounds.lower},
                            {"upper", t.steps.back().diameter_bounds.upper}};
  }
  if (res.final_mesh) {
    const auto field = compute_curvature(*res.final_mesh);
    HelfrichParams q = params;
    q.m0 = t.m0;
    const auto e = helfrich_energy(*res.final_mesh, field, q);
    j["final_breakdown"] = {{"total", e.total}, {"bending", e.bending}, {"gauss", e.gauss},
                            {"cross", e.cross}, {"willmore", e.willmore}};
    j["lower_bound_certificate"] = finite_or_null(lower_bound_certificate(*res.final_mesh, field, q));
  }
  const auto c = check_trace(t, symmetry_on);
  j["checks"] = {{"acceptance", c.acceptance},
                 {"energy_monotone", c.energy_monotone},
                 {"dissipation", c.dissipation},
                 {"mass_conserved", c.mass_conserved},
                 {"volume_conserved", c.volume_conserved},
                 {"symmetry_kept", c.symmetry_kept},
                 {"diameter_sandwich", c.diameter_sandwich},
                 {"multiplicity_constant", c.multiplicity_constant},
                 {"stalled_steps", c.stalled_steps}};
  j["error"] = res.error ? nlohmann::json(*res.error) : nlohmann::json();
  return j;
}

struct Series {
  std::string label;
  std::vector<double> y;
  std::string color;
  bool dashed = false;
};

/// Minimal SVG line plot against the step index.
inline std::string svg_line_plot(const std::string& title, const std::vector<double>& x, const std::vector<Series>& series,
                                 const std::string& ylabel) {
  const double W = 640, H = 400, ml = 80, mr = 20, mt = 40, mb = 50;
  double x0 = 0, x1 = 1, y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  if (!x.empty()) {
    x0 = *std::min_element(x.begin(), x.end());
    x1 = *std::max_element(x.begin(), x.end());
  }
  if (x1 <= x0) x1 = x0 + 1;
  for (const auto& s : series)
    for (double v : s.y)
      if (std::isfinite(v)) {
        y0 = std::min(y0, v);
        y1 = std::max(y1, v);
      }
  if (!std::isfinite(y0)) y0 = 0, y1 = 1;
  if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y1))) {
    const double pad = std::max(1e-12, 1e-3 * std::abs(y1));
    y0 -= pad;
    y1 += pad;
  }
  auto px = [&](double v) { return ml + (v - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (v - y0) / (y1 - y0) * (H - mt - mb); };
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" font-family=\"sans-serif\" font-size=\"12\">\n", W, H);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">%s</text>\n", W / 2, title.c_str());
  out += buf;
  std::snprintf(buf, sizeof buf, "<path d=\"M%g %g V%g H%g\" stroke=\"black\" fill=\"none\"/>\n", ml, mt, H - mb, W - mr);
  out += buf;
  for (int i = 0; i <= 4; ++i) {
    const double yv = y0 + (y1 - y0) * i / 4, xv = x0 + (x1 - x0) * i / 4;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.6g</text>\n", ml - 6, py(yv) + 4, yv);
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%.4g</text>\n", px(xv), H - mb + 18, xv);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">step</text>\n", (ml + W - mr) / 2, H - 10);
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"16\" y=\"%g\" transform=\"rotate(-90 16 %g)\" text-anchor=\"middle\">%s</text>\n",
                H / 2, H / 2, ylabel.c_str());
  out += buf;
  double ly = mt + 4;
  for (const auto& s : series) {
    std::string d;
    for (std::size_t i = 0; i < s.y.size() && i < x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      std::snprintf(buf, sizeof buf, "%s%.2f %.2f", d.empty() ? "M" : " L", px(x[i]), py(s.y[i]));
      d += buf;
    }
    out += "<path d=\"" + d + "\" stroke=\"" + s.color + "\" fill=\"none\" stroke-width=\"1.5\"" +
           (s.dashed ? " stroke-dasharray=\"5 3\"" : "") + "/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" fill=\"%s\">%s</text>\n", W - mr - 150, ly + 10, s.color.c_str(),
                  s.label.c_str());
    out += buf;
    ly += 16;
  }
  out += "</svg>\n";
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  out << text;
}

/// Writes trace.csv, summary.json, the three plots and the snapshots into dir.
inline void write_flow_outputs(const std::filesystem::path& dir, const FlowResult& res, const HelfrichParams& params,
                               bool symmetry_on) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "trace.csv", std::ios::binary);
    if (!out) throw DomainError("cannot write " + (dir / "trace.csv").string());
    write_trace_csv(out, res.trace);
  }
  write_text(dir / "summary.json", flow_summary(res, params, symmetry_on).dump(2) + "\n");

  std::vector<double> x, e, d, lo, hi, w;
  for (const auto& r : res.trace.steps) {
    x.push_back(r.step);
    e.push_back(r.energy);
    d.push_back(r.diameter);
    lo.push_back(r.diameter_bounds.lower);
    hi.push_back(r.diameter_bounds.upper);
    w.push_back(r.increment);
  }
  write_text(dir / "energy.svg", svg_line_plot("Helfrich energy", x, {{"energy", e, "#1f77b4"}}, "energy"));
  write_text(dir / "diameter.svg",
             svg_line_plot("Diameter and bounds", x,
                           {{"diameter", d, "#1f77b4"}, {"lower bound", lo, "#2ca02c", true}, {"upper bound", hi, "#d62728", true}},
                           "length"));
  write_text(dir / "increments.svg", svg_line_plot("Step increments W_p", x, {{"increment", w, "#ff7f0e"}}, "W_p"));

  char name[32];
  for (const auto& [step, mesh] : res.snapshots) {
    std::snprintf(name, sizeof name, "snapshot_%04d.off", step);
    write_off(dir / name, mesh);
  }
}

}  // namespace helfrich::io

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "lassogeom/bounds.hpp"
#include "lassogeom/geometry.hpp"
#include "lassogeom/harness/format.hpp"
#include "lassogeom/harness/svg.hpp"
#include "lassogeom/harness/sweep.hpp"

namespace lassogeom::harness {

// ---------------------------------------------------------------------------
// Figure 1: normalized denominator (√(m−1) − √δ(λ))/√n

struct Figure1Row {
  double lambda = 0.0;
  double delta = 0.0;
  double y = 0.0;
  std::string kind;  // grid | lambda_min | lambda_best | lambda_max
};

struct Figure1 {
  bool feasible = false;
  std::vector<Figure1Row> rows;
};

/// Dense log grid over [0.5 λ_min, 1.2 λ_max] (or around λ_best when m is too small).
inline Figure1 figure1_data(const ExperimentSetup& setup, int points = 200) {
  const auto& cal = setup.calibration();
  const auto& cfg = setup.config();
  Figure1 out;
  out.feasible = cal.feasible;
  if (!cal.feasible) return out;
  const double sn = std::sqrt(static_cast<double>(setup.geometry().dimension()));
  const double sm = std::sqrt(static_cast<double>(cfg.m - 1));
  auto row = [&](double lambda, const char* kind) {
    const double d = setup.delta()(lambda);
    out.rows.push_back({lambda, d, (sm - std::sqrt(d)) / sn, kind});
  };
  LambdaGridSpec spec;
  spec.count = points;
  for (double l : ExperimentSetup::resolve_lambda_grid(spec, cal)) row(l, "grid");
  if (cal.lambda_min) row(*cal.lambda_min, "lambda_min");
  row(cal.lambda_best, "lambda_best");
  row(*cal.lambda_max, "lambda_max");
  return out;
}

inline void write_figure1(const Figure1& fig, const ExperimentSetup& setup, const std::string& csv_path,
                          const std::string& svg_path) {
  std::ofstream os(csv_path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot write '" + csv_path + "'");
  os << "# lassogeom-figure1/1 m=" << setup.config().m << " n=" << setup.geometry().dimension()
     << " feasible=" << fmt_bool(fig.feasible) << "\n";
  os << "lambda,delta,denominator_normalized,kind\n";
  for (const auto& r : fig.rows)
    os << fmt_double(r.lambda) << ',' << fmt_double(r.delta) << ',' << fmt_double(r.y) << ',' << r.kind << '\n';

  SvgPlot plot(fig.feasible ? "Normalized denominator" : "Normalized denominator (m infeasible: empty)",
               "lambda", "(sqrt(m-1) - sqrt(delta)) / sqrt(n)");
  SvgSeries curve{"denominator / sqrt(n)", "#1f4e9c", SvgSeries::Style::Line, {}, {}};
  for (const auto& r : fig.rows) {
    if (r.kind == "grid") {
      curve.x.push_back(r.lambda);
      curve.y.push_back(r.y);
    } else {
      plot.add_marker({r.kind, r.lambda, r.kind == "lambda_best" ? "#c0392b" : "#555555"});
    }
  }
  plot.add(std::move(curve));
  plot.add_hline(0.0);
  plot.write(svg_path);
}

// ---------------------------------------------------------------------------
// Figure 2: normalized error vs λ with ℓ(t)/‖z‖ and the sharp estimate

struct Figure2Curve {
  double lambda = 0.0;
  double delta = 0.0;
  double t = 0.0;
  double bound_normalized = 0.0;  // ℓ(t)/‖z‖, inf where vacuous
  double sharp_normalized = 0.0;  // √δ/√(m − δ), nan where δ ≥ m
};

inline std::vector<Figure2Curve> figure2_curves(const ExperimentSetup& setup, const std::vector<double>& lambdas) {
  const auto& cfg = setup.config();
  std::vector<Figure2Curve> out;
  for (const auto& p : bound_curve(setup.delta(), cfg.m, 1.0, cfg.t_policy, lambdas)) {
    Figure2Curve c;
    c.lambda = p.lambda;
    c.delta = p.delta;
    c.t = p.t;
    c.bound_normalized = p.bound.value_or(INFINITY);
    c.sharp_normalized = p.sharp.value_or(NAN);
    out.push_back(c);
  }
  return out;
}

inline void write_figure2(const std::vector<TrialRecord>& records, const ExperimentSetup& setup,
                          const std::string& csv_path, const std::string& svg_path, int curve_points = 200) {
  const auto& cal = setup.calibration();
  LambdaGridSpec spec;
  spec.count = curve_points;
  if (!records.empty()) {
    double lo = INFINITY, hi = 0.0;
    for (const auto& r : records) {
      if (r.lambda > 0.0) lo = std::min(lo, r.lambda);
      hi = std::max(hi, r.lambda);
    }
    if (std::isfinite(lo) && hi > lo) spec = {LambdaGridSpec::Kind::LogSpace, curve_points, lo, hi, {}};
  }
  const auto curves = figure2_curves(setup, ExperimentSetup::resolve_lambda_grid(spec, cal));

  std::ofstream os(csv_path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot write '" + csv_path + "'");
  os << "# lassogeom-figure2/1 m=" << setup.config().m << " t_policy=" << setup.config().t_policy.describe() << "\n";
  os << "series,lambda,value,noise_family,noise_param\n";
  for (const auto& r : records)
    if (r.converged && !r.degenerate)
      os << "point," << fmt_double(r.lambda) << ',' << fmt_double(r.err_normalized) << ',' << r.noise_family << ','
         << fmt_double(r.noise_param) << '\n';
  for (const auto& c : curves)
    os << "bound," << fmt_double(c.lambda) << ',' << fmt_double(c.bound_normalized) << ",,\n";
  for (const auto& c : curves)
    os << "sharp," << fmt_double(c.lambda) << ',' << fmt_double(c.sharp_normalized) << ",,\n";

  SvgPlot plot("Normalized error", "lambda", "||x - x0|| / ||z||");
  static const char* palette[] = {"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  std::map<std::string, SvgSeries> groups;
  std::vector<std::string> order;
  double ymax = 0.0;
  for (const auto& r : records) {
    if (!r.converged || r.degenerate) continue;
    const std::string key = r.noise_family + " " + fmt_double(r.noise_param);
    if (!groups.count(key)) {
      order.push_back(key);
      groups[key] = {key, palette[(order.size() - 1) % 6], SvgSeries::Style::Points, {}, {}};
    }
    groups[key].x.push_back(r.lambda);
    groups[key].y.push_back(r.err_normalized);
    ymax = std::max(ymax, r.err_normalized);
  }
  SvgSeries bound{"l(t)/||z||", "#d62728", SvgSeries::Style::Line, {}, {}};
  SvgSeries sharp{"sharp estimate", "#000000", SvgSeries::Style::Dashed, {}, {}};
  double bmin = INFINITY;
  for (const auto& c : curves) {
    bound.x.push_back(c.lambda);
    bound.y.push_back(c.bound_normalized);
    sharp.x.push_back(c.lambda);
    sharp.y.push_back(c.sharp_normalized);
    if (std::isfinite(c.bound_normalized)) bmin = std::min(bmin, c.bound_normalized);
  }
  for (const auto& k : order) plot.add(std::move(groups[k]));
  plot.add(std::move(bound));
  plot.add(std::move(sharp));
  // Keep the point cloud readable: ℓ(t) diverges at the ends of the admissible range.
  double ytop = std::max(3.0 * ymax, std::isfinite(bmin) ? 2.0 * bmin : 1.0);
  if (!(ytop > 0.0)) ytop = 1.0;
  plot.set_y_range(0.0, ytop);
  if (cal.lambda_min) plot.add_marker({"lambda_min", *cal.lambda_min});
  if (cal.lambda_max) plot.add_marker({"lambda_max", *cal.lambda_max});
  plot.write(svg_path);
}

}  // namespace lassogeom::harness

// Copyright 2026 The spintomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spintomo/calibration.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spintomo {

RVector nnls(const RMatrix& a, const RVector& b, int max_iterations) {
  const Eigen::Index n = a.cols();
  if (a.rows() != b.size()) throw invalid_argument("nnls: size mismatch");
  if (max_iterations <= 0) max_iterations = static_cast<int>(30 * n + 30);
  RVector x = RVector::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * std::max(1.0, (a.transpose() * b).cwiseAbs().maxCoeff());
  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    RMatrix sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k) sub.col(k) = a.col(idx[k]);
    const RVector zs = sub.colPivHouseholderQr().solve(b);
    RVector z = RVector::Zero(n);
    for (size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zs(k);
    return z;
  };
  int it = 0;
  while (true) {
    const RVector w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j] && w(j) > tol && (best < 0 || w(j) > w(best))) best = j;
    if (best < 0) break;
    passive[best] = true;
    while (true) {
      if (++it > max_iterations) throw ConvergenceError<RVector>("nnls did not converge", x);
      const RVector z = solve_passive();
      bool ok = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z(j) <= 0.0) ok = false;
      if (ok) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && x(j) <= 1e-15 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
          passive[j] = false;
          x(j) = 0.0;
        }
    }
  }
  return x;
}

NelderMeadResult nelder_mead(const std::function<double(const RVector&)>& f, const RVector& x0, const RVector& step,
                             const NelderMeadOptions& opts) {
  const Eigen::Index n = x0.size();
  if (step.size() != n) throw invalid_argument("simplex step size mismatch");
  std::vector<RVector> pts(n + 1, x0);
  std::vector<double> val(n + 1);
  for (Eigen::Index k = 0; k < n; ++k) pts[k + 1](k) += step(k);
  NelderMeadResult res;
  auto eval = [&](const RVector& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  for (Eigen::Index k = 0; k <= n; ++k) val[k] = eval(pts[k]);
  std::vector<int> order(n + 1);
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return val[i] < val[j]; });
    {
      std::vector<RVector> p2;
      std::vector<double> v2;
      for (int i : order) {
        p2.push_back(pts[i]);
        v2.push_back(val[i]);
      }
      pts.swap(p2);
      val.swap(v2);
    }
    double diam = 0.0;
    for (Eigen::Index k = 1; k <= n; ++k) diam = std::max(diam, (pts[k] - pts[0]).cwiseAbs().maxCoeff());
    const double spread = std::abs(val[n] - val[0]);
    if (diam <= opts.xtol || spread <= opts.ftol * std::max(std::abs(val[0]), 1e-300)) {
      res.converged = std::isfinite(val[0]);
      break;
    }
    if (res.evaluations >= opts.max_evaluations) break;
    RVector centroid = RVector::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) centroid += pts[k];
    centroid /= static_cast<double>(n);
    const RVector xr = centroid + (centroid - pts[n]);
    const double fr = eval(xr);
    if (fr < val[0]) {
      const RVector xe = centroid + 2.0 * (centroid - pts[n]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[n] = xe;
        val[n] = fe;
      } else {
        pts[n] = xr;
        val[n] = fr;
      }
    } else if (fr < val[n - 1]) {
      pts[n] = xr;
      val[n] = fr;
    } else {
      const bool outside = fr < val[n];
      const RVector xc = outside ? RVector(centroid + 0.5 * (xr - centroid)) : RVector(centroid + 0.5 * (pts[n] - centroid));
      const double fc = eval(xc);
      if (fc < (outside ? fr : val[n])) {
        pts[n] = xc;
        val[n] = fc;
      } else {
        for (Eigen::Index k = 1; k <= n; ++k) {
          pts[k] = pts[0] + 0.5 * (pts[k] - pts[0]);
          val[k] = eval(pts[k]);
        }
      }
    }
  }
  res.x = pts[0];
  res.value = val[0];
  return res;
}

RMatrix intensity_design(const std::vector<RVector>& per_node, const IntensityDistribution& grid) {
  if (per_node.size() != grid.xi.size()) throw invalid_argument("one model series per intensity knot is required");
  const auto w = grid.weights();
  RMatrix a(per_node.front().size(), static_cast<Eigen::Index>(per_node.size()));
  for (size_t n = 0; n < per_node.size(); ++n) {
    if (per_node[n].size() != a.rows()) throw invalid_argument("model series lengths differ");
    a.col(n) = w[n] * per_node[n];
  }
  return a;
}

IntensityDistribution fit_intensity_distribution(const MeasurementRecord& record, const std::vector<RVector>& per_node,
                                                 const IntensityDistribution& grid) {
  const RMatrix a = intensity_design(per_node, grid);
  if (a.rows() != record.samples()) throw invalid_argument("record length does not match the model series");
  const RVector s = Eigen::JacobiSVD<RMatrix>(a).singularValues();
  if (s.size() == 0 || s(0) == 0.0 || s(s.size() - 1) <= 1e-12 * s(0))
    throw Error(ErrorKind::Degenerate, "intensity design is singular");
  IntensityDistribution out = grid;
  const RVector f = nnls(a, record.values);
  out.f.assign(f.data(), f.data() + f.size());
  return out;
}

CalibrationParams params_of(const F3Scenario& s) {
  CalibrationParams p;
  p.omega_lx = s.omega_lx;
  p.omega_ly = s.omega_ly;
  p.gamma_sc = s.gamma_sc;
  p.t0 = s.t0;
  p.a = s.polarimetry.a;
  p.b = s.polarimetry.b;
  return p;
}

F3Scenario with_params(F3Scenario s, const CalibrationParams& p) {
  s.omega_lx = p.omega_lx;
  s.omega_ly = p.omega_ly;
  s.gamma_sc = p.gamma_sc;
  s.t0 = p.t0;
  if (s.polarimetry.kind == PolarimetryKind::Mixed) {
    s.polarimetry.a = p.a;
    s.polarimetry.b = p.b;
  }
  return s;
}

CMatrix larmor_initial_state() { return spin_coherent_state(HalfInt(3), Eigen::Vector3d(0, 1, 0)); }

namespace {

// Parameter vector <-> CalibrationParams in scaled coordinates. omega_l is the
// field magnitude at the starting direction.
struct ParamMap {
  std::vector<std::string> names;
  RVector scale;
  double dt = 1e-6;
  double ux = 1.0, uy = 0.0;

  ParamMap(const std::vector<std::string>& free, const CalibrationParams& p0, double dt_) : names(free), dt(dt_) {
    if (free.empty()) throw invalid_argument("no free parameters");
    const double mag = std::hypot(p0.omega_lx, p0.omega_ly);
    if (mag > 0.0) {
      ux = p0.omega_lx / mag;
      uy = p0.omega_ly / mag;
    }
    scale.resize(static_cast<Eigen::Index>(free.size()));
    for (size_t k = 0; k < free.size(); ++k) {
      const std::string& n = free[k];
      if (n == "t0") {
        scale(k) = dt;
        continue;
      }
      double v;
      if (n == "omega_l") v = std::hypot(p0.omega_lx, p0.omega_ly);
      else if (n == "omega_lx") v = p0.omega_lx;
      else if (n == "omega_ly") v = p0.omega_ly;
      else if (n == "gamma_sc") v = p0.gamma_sc;
      else throw invalid_argument("unknown calibration parameter '" + n + "'");
      if (v == 0.0) throw invalid_argument("calibration parameter '" + n + "' needs a nonzero starting value");
      scale(k) = std::abs(v);
    }
  }

  RVector to_x(const CalibrationParams& p) const {
    RVector x(scale.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = get(p, names[k]) / scale(k);
    return x;
  }

  CalibrationParams apply(CalibrationParams p, const RVector& x) const {
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double v = x(k) * scale(k);
      const std::string& n = names[k];
      if (n == "omega_l") {
        p.omega_lx = v * ux;
        p.omega_ly = v * uy;
      } else if (n == "omega_lx") {
        p.omega_lx = v;
      } else if (n == "omega_ly") {
        p.omega_ly = v;
      } else if (n == "gamma_sc") {
        p.gamma_sc = v;
      } else if (n == "t0") {
        p.t0 = v;
      }
    }
    return p;
  }

  RVector steps(const CalibrationParams& p, double fraction, double t0_step = 1.0) const {
    RVector s(scale.size());
    for (Eigen::Index k = 0; k < s.size(); ++k)
      s(k) = names[k] == "t0" ? t0_step : fraction * std::abs(get(p, names[k])) / scale(k);
    return s;
  }

  double get(const CalibrationParams& p, const std::string& n) const {
    if (n == "omega_l") return std::hypot(p.omega_lx, p.omega_ly);
    if (n == "omega_lx") return p.omega_lx;
    if (n == "omega_ly") return p.omega_ly;
    if (n == "gamma_sc") return p.gamma_sc;
    return p.t0;
  }
};

bool within_bounds(const CalibrationParams& p, double dt, double t0_bound) {
  return p.omega_lx >= 0.0 && p.omega_ly >= 0.0 && p.gamma_sc > 0.0 && std::abs(p.t0) <= t0_bound * dt;
}

// Condition number of the model Jacobian in scaled coordinates.
double jacobian_condition(const std::function<RVector(const RVector&)>& model, const RVector& x) {
  const double h = 1e-4;
  RMatrix j(model(x).size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    RVector xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    j.col(k) = (model(xp) - model(xm)) / (2.0 * h);
  }
  const RVector s = Eigen::JacobiSVD<RMatrix>(j).singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

void finish_report(FitReport& rep, const NelderMeadResult& nm, const RVector& record, double t0_bound, double dt) {
  rep.evaluations = nm.evaluations;
  rep.residual = nm.value;
  const double power = record.squaredNorm();
  rep.relative_residual = power > 0.0 ? nm.value / power : nm.value;
  if (!nm.converged) throw ConvergenceError<CalibrationParams>("Nelder-Mead did not converge", rep.params);
  if (std::abs(rep.params.t0) >= t0_bound * dt * (1.0 - 1e-9))
    throw ConvergenceError<CalibrationParams>("fitted time origin sits on its bound", rep.params);
}

// Coarse-to-fine fits over growing record prefixes. `cost(x, n)` uses the first n samples.
NelderMeadResult windowed_fit(const std::function<double(const RVector&, int)>& cost, const ParamMap& map,
                              const CalibrationParams& p0, int samples, const std::vector<double>& windows,
                              double fraction, const NelderMeadOptions& nm_opts) {
  if (windows.empty() || windows.back() != 1.0) throw invalid_argument("fit windows must end with the full record");
  NelderMeadResult nm;
  CalibrationParams start = p0;
  double t0_step = 1.0;
  int evaluations = 0;
  for (double w : windows) {
    if (!(w > 0.0 && w <= 1.0)) throw invalid_argument("fit windows must lie in (0, 1]");
    const int n = std::max(1, static_cast<int>(std::lround(w * samples)));
    nm = nelder_mead([&](const RVector& x) { return cost(x, n); }, map.to_x(start), map.steps(start, fraction, t0_step),
                     nm_opts);
    evaluations += nm.evaluations;
    start = map.apply(p0, nm.x);
    fraction = std::max(0.2 * fraction, 1e-4);
    t0_step = std::max(0.25 * t0_step, 0.05);
  }
  nm.evaluations = evaluations;
  return nm;
}

F3Scenario prefix(F3Scenario s, int n) {
  s.duration = n * s.dt;
  return s;
}

}  // namespace

std::vector<RVector> larmor_signals(const F3Scenario& s, const IntensityDistribution& grid, const CMatrix& observable,
                                    const BesselBandpass* filter) {
  const CMatrix rho0 = larmor_initial_state();
  std::vector<RVector> out;
  for (int n = 0; n < grid.size(); ++n) {
    const BuiltScenario b = build_f3_larmor(s, grid.xi[n]);
    const RVector o = b.basis->full_coordinates(observable);
    RVector sig(b.grid.samples);
    const int lead = b.grid.leading_static();
    const RVector r0 = b.basis->full_coordinates(rho0);
    for (int i = 0; i < lead; ++i) sig(i) = o.dot(r0);
    if (lead < b.grid.samples) sig.tail(b.grid.samples - lead) = propagate_state_coords(b.plan, rho0) * o;
    out.push_back(filter ? filter->apply(sig) : sig);
  }
  return out;
}

FitReport fit_scalar_params(const MeasurementRecord& record, const F3Scenario& initial, const FitOptions& opts) {
  opts.intensity.validate();
  const IntensityDistribution& grid = opts.intensity;
  const CalibrationParams p0 = params_of(initial);
  const ParamMap map(opts.free, p0, initial.dt);
  const CMatrix obs = polarimetry_observable(initial.polarimetry, ProbeSettings::make(initial.line, initial.probe_detuning,
                                                                                      Eigen::Vector3cd(1, 0, 0), initial.gamma_sc),
                                             initial.atom, SpinSpace::single(HalfInt(3)));
  // Knots that carry weight; all of them when f is free.
  IntensityDistribution active;
  std::vector<double> shape;
  for (int n = 0; n < grid.size(); ++n)
    if (opts.mode == IntensityMode::Free || grid.f[n] != 0.0) {
      active.xi.push_back(grid.xi[n]);
      shape.push_back(grid.f[n]);
    }
  if (active.xi.empty()) throw invalid_argument("intensity shape is identically zero");
  const std::vector<double> w_full = grid.weights();
  std::vector<double> w_active;
  for (int n = 0; n < grid.size(); ++n)
    if (opts.mode == IntensityMode::Free || grid.f[n] != 0.0) w_active.push_back(w_full[n]);

  const int total = record.samples();
  if (TimeGrid::over(initial.duration, initial.dt).samples != total) throw invalid_argument("record length does not match the model");
  auto solve = [&](const CalibrationParams& p, int n_samples, RVector* f_out) -> RVector {
    const auto sig = larmor_signals(prefix(with_params(initial, p), n_samples), active, obs, opts.filter);
    const RVector m = record.values.head(n_samples);
    RMatrix a(n_samples, static_cast<Eigen::Index>(sig.size()));
    for (size_t n = 0; n < sig.size(); ++n) a.col(n) = w_active[n] * sig[n];
    RVector f;
    if (opts.mode == IntensityMode::Free) {
      f = nnls(a, m);
    } else {
      const RVector col = a * Eigen::Map<const RVector>(shape.data(), static_cast<Eigen::Index>(shape.size()));
      const double nn = col.squaredNorm();
      const double c = nn > 0.0 ? std::max(0.0, col.dot(m) / nn) : 0.0;
      f = c * Eigen::Map<const RVector>(shape.data(), static_cast<Eigen::Index>(shape.size()));
    }
    if (f_out) *f_out = f;
    return a * f;
  };
  auto cost = [&](const RVector& x, int n) {
    const CalibrationParams p = map.apply(p0, x);
    if (!within_bounds(p, initial.dt, opts.t0_bound_samples)) return std::numeric_limits<double>::infinity();
    return (record.values.head(n) - solve(p, n, nullptr)).squaredNorm();
  };
  const NelderMeadResult nm = windowed_fit(cost, map, p0, total, opts.windows, opts.simplex_fraction, opts.nm);

  FitReport rep;
  rep.free = opts.free;
  rep.params = map.apply(p0, nm.x);
  RVector f;
  solve(rep.params, total, &f);
  rep.f = grid;
  for (int n = 0, k = 0; n < grid.size(); ++n)
    rep.f.f[n] = (opts.mode == IntensityMode::Free || grid.f[n] != 0.0) ? f(k++) : 0.0;
  finish_report(rep, nm, record.values, opts.t0_bound_samples, initial.dt);
  const IntensityDistribution fitted = rep.f;
  rep.jacobian_condition = jacobian_condition(
      [&](const RVector& x) {
        const auto sig = larmor_signals(with_params(initial, map.apply(p0, x)), fitted, obs, opts.filter);
        return RVector(intensity_average(sig, fitted));
      },
      nm.x);
  rep.degenerate = !(rep.jacobian_condition < opts.degenerate_condition);
  return rep;
}

FitReport fit_measurement_basis(const MeasurementRecord& record, const F3Scenario& initial,
                                const IntensityDistribution& f, FitOptions opts) {
  f.validate();
  if (opts.free == FitOptions{}.free) opts.free = {"omega_l", "t0"};
  for (const auto& n : opts.free)
    if (n == "gamma_sc") throw invalid_argument("gamma_sc is not refit in the measurement-basis calibration");
  const CalibrationParams p0 = params_of(initial);
  const ParamMap map(opts.free, p0, initial.dt);
  const AngularMomentum J = angular_momentum(HalfInt(3));
  const CMatrix xy = J.x * J.y + J.y * J.x;
  const int total = record.samples();
  if (TimeGrid::over(initial.duration, initial.dt).samples != total) throw invalid_argument("record length does not match the model");
  auto columns = [&](const CalibrationParams& p, int n) {
    const F3Scenario s = prefix(with_params(initial, p), n);
    RMatrix x(n, 2);
    const auto gxy = larmor_signals(s, f, xy, opts.filter);
    const auto gz = larmor_signals(s, f, J.z, opts.filter);
    x.col(0) = intensity_average(gxy, f);
    x.col(1) = intensity_average(gz, f);
    return x;
  };
  auto cost = [&](const RVector& xv, int n) {
    const CalibrationParams p = map.apply(p0, xv);
    if (!within_bounds(p, initial.dt, opts.t0_bound_samples)) return std::numeric_limits<double>::infinity();
    const RMatrix x = columns(p, n);
    const RVector m = record.values.head(n);
    const RVector ab = x.colPivHouseholderQr().solve(m);
    return (m - x * ab).squaredNorm();
  };
  const NelderMeadResult nm = windowed_fit(cost, map, p0, total, opts.windows, opts.simplex_fraction, opts.nm);
  FitReport rep;
  rep.free = opts.free;
  rep.params = map.apply(p0, nm.x);
  const RMatrix x = columns(rep.params, total);
  const RVector ab = x.colPivHouseholderQr().solve(record.values);
  rep.params.a = ab(0);
  rep.params.b = ab(1);
  rep.f = f;
  finish_report(rep, nm, record.values, opts.t0_bound_samples, initial.dt);
  rep.jacobian_condition = jacobian_condition([&](const RVector& xv) { return RVector(columns(map.apply(p0, xv), total) * ab); }, nm.x);
  rep.degenerate = !(rep.jacobian_condition < opts.degenerate_condition);
  return rep;
}

FitReport refit_before_reconstruction(const MeasurementRecord& record, const F3Scenario& initial,
                                      const SplineWaveform& phi, const RefitOptions& opts) {
  const CalibrationParams p0 = params_of(initial);
  const ParamMap map(opts.free, p0, initial.dt);
  auto design_for = [&](const CalibrationParams& p) {
    const F3Scenario s = with_params(initial, p);
    ObservableSeries series = opts.intensity
                                  ? observe_averaged(*opts.intensity, [&](double xi) { return build_f3_lightshift(s, phi, xi); })
                                  : observe(build_f3_lightshift(s, phi));
    if (series.samples() != record.samples()) throw invalid_argument("record length does not match the model");
    return build_design(series, opts.filter);
  };
  auto fitted = [&](const CalibrationParams& p) {
    const DesignMatrix d = design_for(p);
    const MlEstimate ml = ml_estimate(d, record.values, record.sigma, opts.rtol);
    return RVector(d.offsets + d.matrix * ml.r);
  };
  auto cost = [&](const RVector& x) {
    const CalibrationParams p = map.apply(p0, x);
    if (!within_bounds(p, initial.dt, opts.t0_bound_samples)) return std::numeric_limits<double>::infinity();
    return (record.values - fitted(p)).squaredNorm();
  };
  const NelderMeadResult nm = nelder_mead(cost, map.to_x(p0), map.steps(p0, opts.simplex_fraction), opts.nm);
  FitReport rep;
  rep.free = opts.free;
  rep.params = map.apply(p0, nm.x);
  if (opts.intensity) rep.f = *opts.intensity;
  finish_report(rep, nm, record.values, opts.t0_bound_samples, initial.dt);
  // State held at its fitted value while the parameters move.
  const DesignMatrix d0 = design_for(rep.params);
  const RVector r = ml_estimate(d0, record.values, record.sigma, opts.rtol).r;
  rep.jacobian_condition = jacobian_condition(
      [&](const RVector& x) {
        const DesignMatrix d = design_for(map.apply(p0, x));
        return RVector(d.offsets + d.matrix * r);
      },
      nm.x);
  rep.degenerate = !(rep.jacobian_condition < opts.degenerate_condition);
  return rep;
}

}  // namespace spintomo

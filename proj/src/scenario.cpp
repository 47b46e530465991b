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

#include "spintomo/scenario.hpp"

#include <cmath>

namespace spintomo {

namespace {

int whole_steps(double length, double dt, const char* what) {
  const double n = length / dt;
  const double r = std::round(n);
  if (r < 1.0 || std::abs(n - r) > 1e-6 * std::max(1.0, n))
    throw invalid_argument(std::string(what) + " must be a positive multiple of the sample step");
  return static_cast<int>(r);
}

}  // namespace

TimeGrid TimeGrid::over(double duration, double dt, double t0) {
  if (!(dt > 0.0)) throw invalid_argument("sample step must be positive");
  return {dt, whole_steps(duration, dt, "record duration"), t0};
}

std::vector<double> TimeGrid::record_times() const {
  std::vector<double> t(samples);
  for (int i = 0; i < samples; ++i) t[i] = (i + 1) * dt;
  return t;
}

int TimeGrid::leading_static() const {
  int k = 0;
  while (k < samples && (k + 1) * dt - t0 <= 1e-15) ++k;
  return k;
}

double resolve_probe_detuning(const Full16Scenario& s) {
  return s.probe_detuning ? *s.probe_detuning : find_magic_detuning(s.atom, s.line, HalfInt(3));
}

BuiltScenario build_full16(const Full16Scenario& s, const PhaseWaveform& w, double xi) {
  if (!(xi > 0.0)) throw invalid_argument("intensity scale must be positive");
  const SpinSpace space = SpinSpace::cs_ground();
  auto basis = std::make_shared<const HermitianBasis>(hermitian_basis(space));
  const TimeGrid grid = TimeGrid::over(s.duration, s.dt);
  const int rf_steps = whole_steps(s.rf_segment, s.dt, "RF segment");
  const int uw_steps = whole_steps(s.uw_segment, s.dt, "microwave segment");
  if (static_cast<int>(w.phi_x.size()) * rf_steps < grid.samples || static_cast<int>(w.phi_uw.size()) * uw_steps < grid.samples)
    throw invalid_argument("waveform is shorter than the record");

  const double detuning = resolve_probe_detuning(s);
  const ProbeSettings probe = ProbeSettings::make(s.line, detuning, s.polarization, s.gamma_sc * xi);
  const BetaCoefficients beta = beta_coefficients(probe, s.atom);
  const CMatrix ls = light_shift_rwa(beta, probe.gamma_sc, space);

  RfUwDrive drive;
  drive.omega_0 = s.omega_0;
  drive.rf_detuning = s.rf_detuning;
  drive.uw_detuning = s.uw_detuning;
  drive.omega_x = s.omega_x;
  drive.omega_y = s.omega_y;
  drive.omega_uw = s.omega_uw;
  const CMatrix base = h0_rwa(drive, s.atom) + ls;

  const auto ops = lindblad_operators(jump_operators(probe, s.atom, space), space);
  const AveragedDissipator avg =
      rotating_frame_dissipator(ops, rf_frame_generator(space, s.atom), drive.omega_rf(), s.dissipator_phases);
  auto diss = std::make_shared<const Superoperator>(to_basis(avg.sandwich, *basis));

  PropagationPlan plan(basis);
  int k = 0;
  while (k < grid.samples) {
    const int ir = k / rf_steps, iu = k / uw_steps;
    const int end = std::min({grid.samples, (ir + 1) * rf_steps, (iu + 1) * uw_steps});
    RfUwControls u;
    u.omega_x = s.omega_x;
    u.omega_y = s.omega_y;
    u.omega_uw = s.omega_uw;
    u.phi_x = w.phi_x[ir];
    u.phi_y = w.phi_y[ir];
    u.phi_uw = w.phi_uw[iu];
    const CMatrix hrf = s.second_order_rf ? h_rf_rwa(drive, s.atom, u) : h_rf_rwa_first_order(drive, s.atom, u);
    plan.add({base + hrf + h_uw_rwa(drive, s.atom, u), diss, end - k, s.dt});
    k = end;
  }
  ProbeSettings nominal = probe;
  nominal.gamma_sc = s.gamma_sc;
  return {space, basis, std::move(plan), grid, polarimetry_observable(s.polarimetry, nominal, s.atom, space), nominal, beta};
}

namespace {

struct F3Pieces {
  SpinSpace space = SpinSpace::single(HalfInt(3));
  std::shared_ptr<const HermitianBasis> basis;
  ProbeSettings probe;
  BetaCoefficients beta;
  std::shared_ptr<const Superoperator> diss;
  TimeGrid grid;
};

F3Pieces f3_pieces(const F3Scenario& s, double xi) {
  if (!(xi > 0.0)) throw invalid_argument("intensity scale must be positive");
  F3Pieces p;
  p.basis = std::make_shared<const HermitianBasis>(hermitian_basis(p.space));
  p.probe = ProbeSettings::make(s.line, s.probe_detuning, Eigen::Vector3cd(1, 0, 0), s.gamma_sc * xi);
  p.beta = beta_coefficients(p.probe, s.atom);
  const auto ops = lindblad_operators(jump_operators(p.probe, s.atom, p.space), p.space);
  p.diss = std::make_shared<const Superoperator>(sandwich_superoperator(ops, *p.basis));
  p.grid = TimeGrid::over(s.duration, s.dt, s.t0);
  if (std::abs(s.t0) > 50 * s.dt) throw invalid_argument("time origin is more than 50 samples from zero");
  return p;
}

BuiltScenario finish_f3(const F3Scenario& s, F3Pieces p, PropagationPlan plan) {
  ProbeSettings nominal = p.probe;
  nominal.gamma_sc = s.gamma_sc;
  CMatrix obs = polarimetry_observable(s.polarimetry, nominal, s.atom, p.space);
  return {p.space, p.basis, std::move(plan), p.grid, std::move(obs), nominal, p.beta};
}

// Model step boundaries: 0, then t_i - t0 for the evolving samples.
std::vector<double> model_boundaries(const TimeGrid& g) {
  std::vector<double> b{0.0};
  for (int i = g.leading_static(); i < g.samples; ++i) b.push_back((i + 1) * g.dt - g.t0);
  return b;
}

}  // namespace

BuiltScenario build_f3_lightshift(const F3Scenario& s, const SplineWaveform& phi, double xi) {
  F3Pieces p = f3_pieces(s, xi);
  const BetaPair& b3 = p.beta.at(3);
  PropagationPlan plan(p.basis);
  const auto bounds = model_boundaries(p.grid);
  for (size_t i = 1; i < bounds.size(); ++i) {
    const double mid = 0.5 * (bounds[i - 1] + bounds[i]);
    plan.add({h_lightshift_control(phi(mid), s.omega_lx, s.omega_ly, b3, p.probe.gamma_sc, 3), p.diss, 1,
              bounds[i] - bounds[i - 1]});
  }
  return finish_f3(s, std::move(p), std::move(plan));
}

BuiltScenario build_f3_larmor(const F3Scenario& s, double xi) {
  F3Pieces p = f3_pieces(s, xi);
  PropagationPlan plan(p.basis);
  const CMatrix h = h_lightshift_control(0.0, s.omega_lx, s.omega_ly, p.beta.at(3), p.probe.gamma_sc, 3);
  const auto bounds = model_boundaries(p.grid);
  if (bounds.size() > 1) {
    plan.add({h, p.diss, 1, bounds[1]});
    if (bounds.size() > 2) plan.add({h, p.diss, static_cast<int>(bounds.size()) - 2, p.grid.dt});
  }
  return finish_f3(s, std::move(p), std::move(plan));
}

ObservableSeries observe(const BuiltScenario& b) { return observe(b, b.observable); }

ObservableSeries observe(const BuiltScenario& b, const CMatrix& observable) {
  const RVector o0 = b.basis->full_coordinates(observable);
  const int lead = b.grid.leading_static();
  ObservableSeries out;
  out.basis = b.basis;
  out.times = b.grid.record_times();
  out.coords.resize(b.grid.samples, o0.size());
  for (int i = 0; i < lead; ++i) out.coords.row(i) = o0.transpose();
  if (lead < b.grid.samples) {
    const ObservableSeries ev = propagate_observables(b.plan, o0);
    if (ev.samples() != b.grid.samples - lead) throw numerical_error("plan does not cover the record grid");
    out.coords.bottomRows(ev.samples()) = ev.coords;
  }
  return out;
}

}  // namespace spintomo

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

#pragma once

#include "spintomo/control.hpp"
#include "spintomo/estimation.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace spintomo {

// Record samples sit at t_i = i dt, i = 1..samples. The dynamics is sampled
// at t_i - t0; samples with t_i - t0 <= 0 see the unevolved observable.
struct TimeGrid {
  double dt = 1e-6;
  int samples = 0;
  double t0 = 0.0;

  static TimeGrid over(double duration, double dt, double t0 = 0.0);
  std::vector<double> record_times() const;
  int leading_static() const;  // samples with t_i - t0 <= 0
};

// Full 3+4 manifold with RF/microwave control, rotating frame, averaged dissipator.
struct Full16Scenario {
  AtomConstants atom = AtomConstants::cesium();
  Line line = Line::D1;
  std::optional<double> probe_detuning;  // rad/s; magic detuning of F=3 when empty
  Eigen::Vector3cd polarization = Eigen::Vector3cd(1, 0, 0);
  double gamma_sc = kTwoPi * 410.7;
  double omega_0 = kTwoPi * 1.0e6;
  double rf_detuning = 0.0, uw_detuning = 0.0;
  double omega_x = kTwoPi * 15e3, omega_y = kTwoPi * 15e3, omega_uw = kTwoPi * 33e3;
  double duration = 2e-3, dt = 1e-6;
  double rf_segment = 30e-6, uw_segment = 20e-6;
  int dissipator_phases = 64;
  bool second_order_rf = true;
  PolarimetrySettings polarimetry = PolarimetrySettings::faraday();
};

// F=3 manifold with x-polarized probe light shift and a rotating transverse
// field at angle phi(t). A constant phi = 0 with no spline is the Larmor
// calibration dynamics.
struct F3Scenario {
  AtomConstants atom = AtomConstants::cesium();
  Line line = Line::D1;
  double probe_detuning = kTwoPi * 642.78e6;
  double gamma_sc = kTwoPi * 81.4;
  double omega_lx = kTwoPi * 17.5e3, omega_ly = kTwoPi * 17.5e3;
  double duration = 4e-3, dt = 1e-6;
  double t0 = 0.0;
  PolarimetrySettings polarimetry = PolarimetrySettings::mixed(0.1613, 0.1598);
};

struct BuiltScenario {
  SpinSpace space;
  std::shared_ptr<const HermitianBasis> basis;
  PropagationPlan plan;
  TimeGrid grid;
  CMatrix observable;
  ProbeSettings probe;
  BetaCoefficients beta;
};

double resolve_probe_detuning(const Full16Scenario& s);
// xi scales the probe intensity (gamma_sc -> xi gamma_sc).
BuiltScenario build_full16(const Full16Scenario& s, const PhaseWaveform& w, double xi = 1.0);
BuiltScenario build_f3_lightshift(const F3Scenario& s, const SplineWaveform& phi, double xi = 1.0);
BuiltScenario build_f3_larmor(const F3Scenario& s, double xi = 1.0);

// Observable series on the record grid (times t_i).
ObservableSeries observe(const BuiltScenario& b);
ObservableSeries observe(const BuiltScenario& b, const CMatrix& observable);

// Intensity-averaged series: sum_n w_n f_n O(xi_n). `build` maps xi to a scenario.
template <class Build>
ObservableSeries observe_averaged(const IntensityDistribution& dist, Build build) {
  dist.validate();
  std::vector<RMatrix> per;
  ObservableSeries first;
  for (int n = 0; n < dist.size(); ++n) {
    if (dist.f[n] == 0.0) {
      per.emplace_back();
      continue;
    }
    ObservableSeries s = observe(build(dist.xi[n]));
    if (!first.basis) first = s;
    per.push_back(std::move(s.coords));
  }
  if (!first.basis) throw invalid_argument("intensity distribution is identically zero");
  for (auto& m : per)
    if (m.size() == 0) m = RMatrix::Zero(first.coords.rows(), first.coords.cols());
  first.coords = intensity_average(per, dist);
  return first;
}

}  // namespace spintomo

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

#include "spintomo/calibration.hpp"

namespace spintomo::testing {

// Larmor calibration dynamics at the nominal F=3 values, time origin three samples late.
inline F3Scenario larmor_truth() {
  F3Scenario s;
  s.omega_lx = kTwoPi * 17.5e3;
  s.omega_ly = 0.0;
  s.gamma_sc = kTwoPi * 81.4;
  s.t0 = 3e-6;
  s.polarimetry = PolarimetrySettings::mixed(0.0, 1.0);
  return s;
}

inline RVector larmor_clean(const F3Scenario& s, const IntensityDistribution& dist) {
  const ObservableSeries series = observe_averaged(dist, [&](double xi) { return build_f3_larmor(s, xi); });
  return noiseless_record(series, larmor_initial_state());
}

inline MeasurementRecord as_record(const RVector& clean, double snr, std::uint64_t seed, double dt = 1e-6) {
  MeasurementRecord r;
  r.sigma = std::isinf(snr) ? 0.0 : snr_to_sigma(clean, snr);
  r.seed = seed;
  r.values = clean;
  if (r.sigma > 0.0) {
    Rng rng(seed);
    r.values += r.sigma * rng.normal_vector(static_cast<int>(clean.size()));
  }
  for (Eigen::Index i = 0; i < clean.size(); ++i) r.times.push_back((i + 1) * dt);
  return r;
}

}  // namespace spintomo::testing

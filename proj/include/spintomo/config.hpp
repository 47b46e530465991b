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
#include "spintomo/scenario.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spintomo {

enum class ScenarioKind { Full16, F3LightShift, F3Larmor };

std::string scenario_kind_name(ScenarioKind k);

struct WaveformSettings {
  std::uint64_t seed = 1;
  std::string file;  // CSV of phases or spline knots; overrides seed
  double knot_spacing = 80e-6;
};

struct RecordSettings {
  std::optional<double> snr = 100.0;
  std::optional<double> sigma;  // absolute noise level, overrides snr
  std::uint64_t noise_seed = 2;
  bool filter = false;
  int filter_order = 4;
  double filter_low_hz = 6e3, filter_high_hz = 80e3;
};

struct StateSettings {
  std::string kind = "haar-pure";  // haar-pure, hilbert-schmidt, squeezed-cat, spin-coherent, file
  std::uint64_t seed = 1;
  std::string file;
  Eigen::Vector3d axis = Eigen::Vector3d(0, 1, 0);
};

struct IntensitySettings {
  bool enabled = false;
  std::string shape = "gaussian";  // gaussian or spike
  double centre = 1.0, width = 0.1;
  int knots = 17;
  double xi_min = 0.25, xi_max = 1.25;

  IntensityDistribution distribution() const;
};

struct EstimationSettings {
  double rtol = 1e-6;
  int horizons = 12;
  double first_horizon = 60e-6;
  ProjectionOptions projection;
};

struct CalibrationSettings {
  std::string fit = "scalar";  // scalar, basis, intensity, refit
  std::vector<std::string> free;  // empty: per-fit default
  std::string intensity_mode = "fixed-shape";
  double simplex_fraction = 0.0;  // 0: per-fit default
  int max_evaluations = 3000;
  // Initial guesses; nominal drive values when empty.
  std::optional<double> larmor_x, larmor_y, gamma_sc, t0;
};

struct BenchmarkSettings {
  int states = 20;
  std::uint64_t seed = 1;
  std::vector<double> snr_sweep;  // empty: record snr only
};

struct Config {
  ScenarioKind kind = ScenarioKind::Full16;
  bool custom = false;
  std::string source = "<string>";
  Full16Scenario full16;
  F3Scenario f3;
  WaveformSettings waveform;
  RecordSettings record;
  StateSettings state;
  IntensitySettings intensity;
  EstimationSettings estimation;
  CalibrationSettings calibration;
  BenchmarkSettings benchmark;
  std::string waveform_digest;  // FNV-1a of the waveform file contents

  int dim() const { return kind == ScenarioKind::Full16 ? 16 : 7; }
  double duration() const { return kind == ScenarioKind::Full16 ? full16.duration : f3.duration; }
  double dt() const { return kind == ScenarioKind::Full16 ? full16.dt : f3.dt; }
  const AtomConstants& atom() const { return kind == ScenarioKind::Full16 ? full16.atom : f3.atom; }
  Line line() const { return kind == ScenarioKind::Full16 ? full16.line : f3.line; }

  // Model description covered by the scenario hash: everything that shapes the
  // observable series and the record processing, but not seeds of the state
  // and noise, the noise level, or estimation and calibration settings.
  std::string canonical() const;
  std::string hash() const;
};

Config default_config(ScenarioKind kind);
Config parse_config(const std::string& text, const std::string& source = "<string>");
Config load_config(const std::string& path);

std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace spintomo

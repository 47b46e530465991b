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

#include "spintomo/config.hpp"
#include "spintomo/io.hpp"

#include <optional>

namespace spintomo {

std::optional<BesselBandpass> make_filter(const Config& c);
PhaseWaveform phase_waveform(const Config& c);
std::vector<double> spline_knots(const Config& c);
SplineWaveform spline_waveform(const Config& c);

// Observable series and design on the record grid, averaged over the
// configured intensity distribution.
struct Model {
  Config config;
  std::optional<BesselBandpass> filter;
  ObservableSeries series;
  DesignMatrix design;
  std::string hash;

  const BesselBandpass* filter_ptr() const { return filter ? &*filter : nullptr; }
  int dim() const { return config.dim(); }
  std::string basis_tag() const;
};

// Nominal scenario with F3 parameters replaced, for refits.
ObservableSeries model_series(const Config& c, const F3Scenario& f3);
Model build_model(const Config& c);

struct SeedPair {
  std::uint64_t state = 0, noise = 0;
};
// Seeds of benchmark state `index` under a master seed; index 0 is what
// `simulate --seed` uses.
SeedPair seeds_for(std::uint64_t master, int index);

CMatrix make_state(const Config& c, std::uint64_t seed);
MeasurementRecord simulate_record(const Model& m, const CMatrix& rho, std::uint64_t noise_seed,
                                  std::optional<double> snr_override = std::nullopt);
std::vector<double> default_horizons(const Model& m);
ReconstructionResult reconstruct_record(const Model& m, const MeasurementRecord& rec, const CMatrix* truth = nullptr);

FitReport calibrate_record(const Config& c, const MeasurementRecord& rec);

struct BenchmarkRow {
  double snr = 0.0;
  int index = 0;
  SeedPair seeds;
  double fidelity = 0.0;
  int rank = 0;
};

// States fan out over `threads` workers; rows are ordered by (snr, index).
// An snr of 0 means the configured noise level.
std::vector<BenchmarkRow> run_benchmark(const Model& m, const std::vector<double>& snrs, int states,
                                        std::uint64_t master_seed, int threads = 0);

}  // namespace spintomo

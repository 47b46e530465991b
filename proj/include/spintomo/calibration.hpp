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

#include "spintomo/scenario.hpp"

#include <functional>
#include <string>
#include <vector>

namespace spintomo {

// Lawson-Hanson non-negative least squares.
RVector nnls(const RMatrix& a, const RVector& b, int max_iterations = 0);

struct NelderMeadOptions {
  int max_evaluations = 3000;
  double xtol = 1e-7;   // simplex diameter in scaled coordinates
  double ftol = 1e-13;  // relative spread of vertex values
};

struct NelderMeadResult {
  RVector x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Initial simplex x0 + step_k e_k.
NelderMeadResult nelder_mead(const std::function<double(const RVector&)>& f, const RVector& x0, const RVector& step,
                             const NelderMeadOptions& opts = {});

// Per-knot model columns a_n(t_i) = w_n g_n(t_i), so M ~ A f.
RMatrix intensity_design(const std::vector<RVector>& per_node, const IntensityDistribution& grid);
IntensityDistribution fit_intensity_distribution(const MeasurementRecord& record, const std::vector<RVector>& per_node,
                                                 const IntensityDistribution& grid);

enum class IntensityMode {
  Free,        // f re-solved by NNLS at every iterate
  FixedShape,  // f = c * shape, c >= 0 solved at every iterate
};

struct CalibrationParams {
  double omega_lx = 0.0, omega_ly = 0.0;
  double gamma_sc = 0.0;
  double t0 = 0.0;
  double a = 0.0, b = 0.0;
};

CalibrationParams params_of(const F3Scenario& s);
F3Scenario with_params(F3Scenario s, const CalibrationParams& p);

struct FitReport {
  CalibrationParams params;
  IntensityDistribution f;
  std::vector<std::string> free;
  double residual = 0.0;           // ||M - model||^2
  double relative_residual = 0.0;  // residual / ||M||^2
  double jacobian_condition = 0.0;
  bool degenerate = false;
  int evaluations = 0;
};

// Free parameter names: omega_l (both axes), omega_lx, omega_ly, gamma_sc, t0.
struct FitOptions {
  std::vector<std::string> free{"omega_l", "gamma_sc", "t0"};
  IntensityMode mode = IntensityMode::FixedShape;
  IntensityDistribution intensity = IntensityDistribution::spike(1.0);
  double simplex_fraction = 0.05;
  // Record prefixes fitted in turn, each stage starting from the previous optimum.
  std::vector<double> windows{1.0 / 16.0, 0.25, 1.0};
  double t0_bound_samples = 5.0;
  double degenerate_condition = 1e8;
  NelderMeadOptions nm;
  const BesselBandpass* filter = nullptr;
};

// Larmor calibration: field along x, spin coherent state along y, record of
// the scenario's polarimetry observable.
CMatrix larmor_initial_state();
std::vector<RVector> larmor_signals(const F3Scenario& s, const IntensityDistribution& grid, const CMatrix& observable,
                                    const BesselBandpass* filter = nullptr);

FitReport fit_scalar_params(const MeasurementRecord& record, const F3Scenario& initial, const FitOptions& opts = {});
// Linear fit of M = a <FxFy+FyFx> + b <Fz> averaged over f, with the listed
// scalar parameters (default omega_l, t0) refit in an outer loop.
FitReport fit_measurement_basis(const MeasurementRecord& record, const F3Scenario& initial,
                                const IntensityDistribution& f, FitOptions opts = {});

struct RefitOptions {
  std::vector<std::string> free{"omega_lx", "omega_ly", "t0"};
  double simplex_fraction = 0.005;
  double t0_bound_samples = 5.0;
  double rtol = 1e-6;
  double degenerate_condition = 1e8;
  NelderMeadOptions nm;
  const BesselBandpass* filter = nullptr;
  const IntensityDistribution* intensity = nullptr;  // nominal intensity when null
};

// Variable projection on the tomography record: for each parameter iterate the
// state is eliminated by the ML solve and the residual is minimized.
FitReport refit_before_reconstruction(const MeasurementRecord& record, const F3Scenario& initial,
                                      const SplineWaveform& phi, const RefitOptions& opts = {});

}  // namespace spintomo

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

#include "spintomo/measurement.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spintomo {

// Rows Tr(O_i E_a); the identity component Tr(O_i)/d is kept separately and
// subtracted from the record.
struct DesignMatrix {
  RMatrix matrix;
  RVector offsets;
  std::vector<double> times;
  std::shared_ptr<const HermitianBasis> basis;

  int rows() const { return static_cast<int>(matrix.rows()); }
  int cols() const { return static_cast<int>(matrix.cols()); }
  DesignMatrix head(int n) const;
};

DesignMatrix build_design(const ObservableSeries& series, const BesselBandpass* filter = nullptr);
// Same design expressed in another orthonormal basis of the same space.
DesignMatrix build_design(const ObservableSeries& series, std::shared_ptr<const HermitianBasis> basis,
                          const BesselBandpass* filter = nullptr);

struct MlEstimate {
  RVector r;
  RMatrix covariance;   // sigma^2 (O^T O)^+ on the measured subspace
  RMatrix information;  // O^T O
  RVector singular_values;
  int rank = 0;
};

MlEstimate ml_estimate(const DesignMatrix& design, const RVector& record, double sigma, double rtol = 1e-6);

struct ProjectionOptions {
  double mu_initial = 1e-3;
  double mu_final = 1e-11;  // stop once mu * d falls below this
  double mu_factor = 0.2;
  double newton_tol = 1e-15;    // on the Newton decrement
  double centring_tol = 1e-10;  // on decrement / mu, enough between barrier updates
  double stall_tol = 1e-6;      // decrement / mu below which a decrement that stops contracting counts as centred
  double psd_tolerance = 1e-9;  // r_ML with min eigenvalue above -tol is returned as is
  int max_newton = 100;
  int max_total = 2000;
};

struct ProjectionResult {
  RVector r;
  CMatrix rho;
  int iterations = 0;
  double kkt = 0.0;
  bool inside = false;  // r_ML was already a valid state
};

// argmin (r_ML - r)^T Q (r_ML - r) over states I/d + sum r_a E_a >= 0.
ProjectionResult positivity_project(const RVector& r_ml, const RMatrix& metric, const HermitianBasis& basis,
                                    const ProjectionOptions& opts = {});

double fidelity(const CMatrix& a, const CMatrix& b);
double trace_distance(const CMatrix& a, const CMatrix& b);

enum class StateKind { HaarPure, HilbertSchmidt };
StateKind state_kind_from_name(const std::string& name);
CMatrix sample_state(StateKind kind, int d, Rng& rng);
CMatrix sample_state(StateKind kind, int d, std::uint64_t seed);

CMatrix squeezed_cat_state();
CMatrix spin_coherent_state(HalfInt F, const Eigen::Vector3d& axis);

struct HorizonPoint {
  double horizon = 0.0;
  int rank = 0;
  double fidelity = -1.0;  // -1 without a reference state
};

struct ReconstructionOptions {
  double rtol = 1e-6;
  ProjectionOptions projection;
  std::vector<double> horizons;  // empty: no trajectory
};

struct ReconstructionResult {
  MlEstimate ml;
  ProjectionResult estimate;
  std::optional<double> fidelity;
  std::vector<HorizonPoint> trajectory;
  int samples_used = 0;
};

// n log-spaced horizons in [first, last], snapped to sample times.
std::vector<double> log_horizons(double first, double last, int n);

// The record must have been processed with the same filter as the design.
// A record shorter than the design uses the leading rows only.
ReconstructionResult reconstruct(const MeasurementRecord& record, const DesignMatrix& design,
                                 const ReconstructionOptions& opts = {}, const CMatrix* reference = nullptr);

}  // namespace spintomo

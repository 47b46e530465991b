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

#include "spintomo/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

namespace spintomo {

// Piecewise-constant phases: phi_x, phi_y change every rf_segment seconds,
// phi_uw every uw_segment seconds. The last segment of each may be truncated.
struct PhaseWaveform {
  double duration = 0.0;
  double rf_segment = 0.0;
  double uw_segment = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> phi_x, phi_y, phi_uw;

  int rf_index(double t) const;
  int uw_index(double t) const;
};

PhaseWaveform random_phase_waveforms(double duration, double rf_segment, double uw_segment, std::uint64_t seed);
PhaseWaveform constant_phase_waveform(double duration, double rf_segment, double uw_segment, double phi);

// Natural cubic spline through (t_k, phi_k); linear continuation outside the knots.
class SplineWaveform {
 public:
  SplineWaveform(std::vector<double> times, std::vector<double> values, double duration);
  double operator()(double t) const;
  double second_derivative(double t) const;
  const std::vector<double>& knot_times() const { return t_; }
  const std::vector<double>& knot_values() const { return y_; }
  double duration() const { return duration_; }

 private:
  int interval(double t) const;
  std::vector<double> t_, y_, m_;
  double duration_;
};

constexpr int kSplineKnots = 50;
SplineWaveform spline_control_angle(const std::vector<double>& knots, double spacing = 80e-6, double duration = 4e-3);
std::vector<double> random_spline_knots(int n, std::uint64_t seed);

struct RankProfile {
  int rank = 0;
  double condition = 0.0;       // of O^T O restricted to its numerical rank
  double full_rank_time = 0.0;  // first horizon reaching the final rank
};

// Numerical rank and conditioning of a design, with the rank trajectory
// scanned every `stride` rows.
RankProfile rank_profile(const RMatrix& design, const std::vector<double>& times, double rtol = 1e-6, int stride = 20);

struct ScreeningEntry {
  size_t candidate = 0;
  RankProfile profile;
};

// Ranks candidates by (rank desc, condition asc, full-rank time asc).
template <class Candidate>
std::vector<ScreeningEntry> screen_waveforms(const std::vector<Candidate>& candidates,
                                             const std::function<std::pair<RMatrix, std::vector<double>>(const Candidate&)>& design_of,
                                             double rtol = 1e-6) {
  if (candidates.empty()) throw invalid_argument("screen_waveforms needs at least one candidate");
  std::vector<ScreeningEntry> out;
  for (size_t i = 0; i < candidates.size(); ++i) {
    auto [design, times] = design_of(candidates[i]);
    out.push_back({i, rank_profile(design, times, rtol)});
  }
  std::stable_sort(out.begin(), out.end(), [](const ScreeningEntry& a, const ScreeningEntry& b) {
    if (a.profile.rank != b.profile.rank) return a.profile.rank > b.profile.rank;
    if (a.profile.condition != b.profile.condition) return a.profile.condition < b.profile.condition;
    return a.profile.full_rank_time < b.profile.full_rank_time;
  });
  return out;
}

}  // namespace spintomo

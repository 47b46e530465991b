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

#include "spintomo/control.hpp"

namespace spintomo {

namespace {

int segment_count(double duration, double segment) {
  if (!(duration > 0.0) || !(segment > 0.0)) throw invalid_argument("durations must be positive");
  return static_cast<int>(std::ceil(duration / segment - 1e-9));
}

int clamp_index(double t, double segment, int n) {
  const int i = static_cast<int>(std::floor(t / segment + 1e-9));
  return std::clamp(i, 0, n - 1);
}

}  // namespace

int PhaseWaveform::rf_index(double t) const { return clamp_index(t, rf_segment, static_cast<int>(phi_x.size())); }
int PhaseWaveform::uw_index(double t) const { return clamp_index(t, uw_segment, static_cast<int>(phi_uw.size())); }

PhaseWaveform random_phase_waveforms(double duration, double rf_segment, double uw_segment, std::uint64_t seed) {
  PhaseWaveform w;
  w.duration = duration;
  w.rf_segment = rf_segment;
  w.uw_segment = uw_segment;
  w.seed = seed;
  const int n_rf = segment_count(duration, rf_segment), n_uw = segment_count(duration, uw_segment);
  Rng rng(seed);
  for (int i = 0; i < n_rf; ++i) w.phi_x.push_back(rng.uniform(-kPi, kPi));
  for (int i = 0; i < n_rf; ++i) w.phi_y.push_back(rng.uniform(-kPi, kPi));
  for (int i = 0; i < n_uw; ++i) w.phi_uw.push_back(rng.uniform(-kPi, kPi));
  return w;
}

PhaseWaveform constant_phase_waveform(double duration, double rf_segment, double uw_segment, double phi) {
  PhaseWaveform w;
  w.duration = duration;
  w.rf_segment = rf_segment;
  w.uw_segment = uw_segment;
  w.phi_x.assign(segment_count(duration, rf_segment), phi);
  w.phi_y = w.phi_x;
  w.phi_uw.assign(segment_count(duration, uw_segment), phi);
  return w;
}

SplineWaveform::SplineWaveform(std::vector<double> times, std::vector<double> values, double duration)
    : t_(std::move(times)), y_(std::move(values)), duration_(duration) {
  const int n = static_cast<int>(t_.size());
  if (n < 2 || static_cast<int>(y_.size()) != n) throw invalid_argument("spline needs >= 2 matching knots");
  for (int i = 1; i < n; ++i)
    if (!(t_[i] > t_[i - 1])) throw invalid_argument("spline knots must be strictly increasing");
  // Natural spline: tridiagonal system for the interior second derivatives.
  m_.assign(n, 0.0);
  if (n > 2) {
    const int k = n - 2;
    std::vector<double> a(k), b(k), c(k), r(k);
    for (int i = 1; i <= k; ++i) {
      const double h0 = t_[i] - t_[i - 1], h1 = t_[i + 1] - t_[i];
      a[i - 1] = h0;
      b[i - 1] = 2.0 * (h0 + h1);
      c[i - 1] = h1;
      r[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (int i = 1; i < k; ++i) {
      const double f = a[i] / b[i - 1];
      b[i] -= f * c[i - 1];
      r[i] -= f * r[i - 1];
    }
    m_[k] = r[k - 1] / b[k - 1];
    for (int i = k - 2; i >= 0; --i) m_[i + 1] = (r[i] - c[i] * m_[i + 2]) / b[i];
  }
}

int SplineWaveform::interval(double t) const {
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const int i = static_cast<int>(it - t_.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(t_.size()) - 2);
}

double SplineWaveform::operator()(double t) const {
  const int n = static_cast<int>(t_.size());
  if (t <= t_.front() || t >= t_.back()) {
    // Linear continuation with the end slope; the natural end has zero curvature.
    const bool left = t <= t_.front();
    const int i = left ? 0 : n - 2;
    const double h = t_[i + 1] - t_[i];
    const double slope = (y_[i + 1] - y_[i]) / h + (left ? -h * (2 * m_[i] + m_[i + 1]) / 6.0
                                                          : h * (m_[i] + 2 * m_[i + 1]) / 6.0);
    return left ? y_.front() + slope * (t - t_.front()) : y_.back() + slope * (t - t_.back());
  }
  const int i = interval(t);
  const double h = t_[i + 1] - t_[i];
  const double a = (t_[i + 1] - t) / h, b = (t - t_[i]) / h;
  return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double SplineWaveform::second_derivative(double t) const {
  if (t <= t_.front() || t >= t_.back()) return 0.0;
  const int i = interval(t);
  const double h = t_[i + 1] - t_[i];
  return ((t_[i + 1] - t) * m_[i] + (t - t_[i]) * m_[i + 1]) / h;
}

SplineWaveform spline_control_angle(const std::vector<double>& knots, double spacing, double duration) {
  if (static_cast<int>(knots.size()) != kSplineKnots)
    throw invalid_argument("spline control needs exactly " + std::to_string(kSplineKnots) + " knots");
  std::vector<double> t(knots.size());
  for (size_t i = 0; i < t.size(); ++i) t[i] = spacing * static_cast<double>(i);
  return SplineWaveform(t, knots, duration);
}

std::vector<double> random_spline_knots(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = rng.uniform(-kPi, kPi);
  return out;
}

RankProfile rank_profile(const RMatrix& design, const std::vector<double>& times, double rtol, int stride) {
  if (design.rows() != static_cast<Eigen::Index>(times.size())) throw invalid_argument("design/time length mismatch");
  const Eigen::Index p = design.cols();
  auto rank_of = [&](const RMatrix& gram, double* cond) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(gram, Eigen::EigenvaluesOnly);
    const RVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();  // singular values of the prefix
    const double smax = ev.maxCoeff();
    int r = 0;
    double smin = smax;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (smax > 0 && ev(i) > rtol * smax) {
        ++r;
        smin = std::min(smin, ev(i));
      }
    if (cond) *cond = r > 0 ? (smax / smin) * (smax / smin) : INFINITY;
    return r;
  };
  RankProfile prof;
  const RMatrix full = design.transpose() * design;
  prof.rank = rank_of(full, &prof.condition);
  RMatrix gram = RMatrix::Zero(p, p);
  prof.full_rank_time = times.empty() ? 0.0 : times.back();
  for (Eigen::Index start = 0; start < design.rows(); start += stride) {
    const Eigen::Index n = std::min<Eigen::Index>(stride, design.rows() - start);
    gram.noalias() += design.middleRows(start, n).transpose() * design.middleRows(start, n);
    if (rank_of(gram, nullptr) >= prof.rank) {
      prof.full_rank_time = times[start + n - 1];
      break;
    }
  }
  return prof;
}

}  // namespace spintomo

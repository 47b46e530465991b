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

#include "spintomo/atomic_model.hpp"
#include "spintomo/dynamics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spintomo {

enum class PolarimetryKind { Faraday, Birefringence, Mixed, Analysis };

// Faraday and Birefringence are the e3 / e2 observables with the
// per-transition weights C^(K) Delta_c / Delta_F'F. Analysis mixes them as
// cos(theta) e2 + sin(theta) e3. Mixed is a (FxFy+FyFx) + b Fz summed over
// manifolds without weights, the form used for calibrated records.
struct PolarimetrySettings {
  PolarimetryKind kind = PolarimetryKind::Faraday;
  double a = 0.0;
  double b = 1.0;
  double theta = 0.0;

  static PolarimetrySettings faraday() { return {PolarimetryKind::Faraday, 0.0, 1.0, 0.0}; }
  static PolarimetrySettings birefringence() { return {PolarimetryKind::Birefringence, 1.0, 0.0, 0.0}; }
  static PolarimetrySettings mixed(double a, double b) { return {PolarimetryKind::Mixed, a, b, 0.0}; }
  static PolarimetrySettings analysis(double theta) { return {PolarimetryKind::Analysis, 0.0, 0.0, theta}; }
};

// Weight of the Fz^(F) term of e3 and of the (FxFy+FyFx)^(F)/2 term of e2.
double faraday_weight(const ProbeSettings& probe, const AtomConstants& atom, HalfInt F);
double birefringence_weight(const ProbeSettings& probe, const AtomConstants& atom, HalfInt F);

CMatrix polarimetry_observable(const PolarimetrySettings& settings, const ProbeSettings& probe,
                               const AtomConstants& atom, const SpinSpace& space);

class BesselBandpass {
 public:
  struct Section {
    double b0, b1, b2, a1, a2;  // a0 = 1
  };

  // Analog Bessel low-pass prototype (-3 dB at 1 rad/s), low-pass to band-pass
  // at w0 = sqrt(w_lo w_hi), bilinear map with K = w0 / tan(w0 / (2 fs)).
  BesselBandpass(int order, double low_hz, double high_hz, double sample_rate_hz);

  int order() const { return order_; }
  double low_hz() const { return low_; }
  double high_hz() const { return high_; }
  double sample_rate_hz() const { return fs_; }
  const std::vector<Section>& sections() const { return sections_; }
  std::vector<cplx> poles() const { return poles_; }

  RVector apply(const RVector& x) const;
  RMatrix apply_columns(const RMatrix& x) const;
  cplx frequency_response(double f_hz) const;
  std::string descriptor() const;

  // Analog prototype poles, exposed for tests.
  static std::vector<cplx> prototype_poles(int order);

 private:
  int order_;
  double low_, high_, fs_;
  std::vector<Section> sections_;
  std::vector<cplx> poles_;
};

struct MeasurementRecord {
  std::vector<double> times;
  RVector values;
  double sigma = 0.0;
  std::string snr_definition = "none";
  std::string filter = "none";  // descriptor of the filter applied to values
  std::uint64_t seed = 0;

  int samples() const { return static_cast<int>(values.size()); }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
  bool filtered() const { return filter != "none"; }
  MeasurementRecord head(int n) const;
};

// Tr(O_i rho0), including the identity component Tr(O_i)/d.
RVector noiseless_record(const ObservableSeries& series, const CMatrix& rho0);
MeasurementRecord synthesize_record(const ObservableSeries& series, const CMatrix& rho0, double sigma, std::uint64_t seed,
                                    const BesselBandpass* filter = nullptr);
// sigma = rms of the (filtered, if a filter is given) noiseless record / snr.
double snr_to_sigma(const ObservableSeries& series, const CMatrix& rho0, double snr, const BesselBandpass* filter = nullptr);
double snr_to_sigma(const RVector& clean, double snr, const BesselBandpass* filter = nullptr);

// Piecewise-linear intensity density on a knot grid in xi = I / I_nominal.
struct IntensityDistribution {
  std::vector<double> xi;
  std::vector<double> f;

  static IntensityDistribution uniform_grid(int knots = 17, double lo = 0.25, double hi = 1.25);
  static IntensityDistribution spike(double at, int knots = 17, double lo = 0.25, double hi = 1.25);
  static IntensityDistribution gaussian(double centre, double width, int knots = 17, double lo = 0.25, double hi = 1.25);

  int size() const { return static_cast<int>(xi.size()); }
  std::vector<double> weights() const;  // trapezoid weights w_n, integral ~ sum w_n g(xi_n) f(xi_n)
  double integral() const;
  void validate() const;
};

// sum_n w_n f_n S_n over per-node series S_n.
RVector intensity_average(const std::vector<RVector>& per_node, const IntensityDistribution& dist);
RMatrix intensity_average(const std::vector<RMatrix>& per_node, const IntensityDistribution& dist);

}  // namespace spintomo

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

#include "spintomo/measurement.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spintomo {

namespace {

template <class Coupling>
double weighted_coupling(const ProbeSettings& probe, const AtomConstants& atom, HalfInt F, Coupling coupling) {
  double w = 0.0;
  for (const ExcitedLevel& lev : atom.line(probe.line).levels) {
    const double c = coupling(atom, probe.line, lev.F, F);
    if (c == 0.0) continue;
    const double delta = probe.transition_detuning(atom, lev.F, F);
    if (delta == 0.0) throw numerical_error("probe is resonant with F=" + F.str() + " -> F'=" + lev.F.str());
    w += c * probe.detuning / delta;
  }
  return w;
}

}  // namespace

double faraday_weight(const ProbeSettings& probe, const AtomConstants& atom, HalfInt F) {
  return weighted_coupling(probe, atom, F, vector_coupling);
}

double birefringence_weight(const ProbeSettings& probe, const AtomConstants& atom, HalfInt F) {
  return weighted_coupling(probe, atom, F, tensor_coupling);
}

CMatrix polarimetry_observable(const PolarimetrySettings& s, const ProbeSettings& probe, const AtomConstants& atom,
                               const SpinSpace& space) {
  const int d = space.dim();
  CMatrix o = CMatrix::Zero(d, d);
  for (HalfInt F : space.manifolds()) {
    const AngularMomentum J = angular_momentum(space, F);
    const CMatrix xy = J.x * J.y + J.y * J.x;
    switch (s.kind) {
      case PolarimetryKind::Faraday:
        o += faraday_weight(probe, atom, F) * J.z;
        break;
      case PolarimetryKind::Birefringence:
        o += 0.5 * birefringence_weight(probe, atom, F) * xy;
        break;
      case PolarimetryKind::Analysis:
        o += std::cos(s.theta) * 0.5 * birefringence_weight(probe, atom, F) * xy +
             std::sin(s.theta) * faraday_weight(probe, atom, F) * J.z;
        break;
      case PolarimetryKind::Mixed:
        o += s.a * xy + s.b * J.z;
        break;
    }
  }
  return o;
}

// ---------------------------------------------------------------------------
// Bessel band-pass

std::vector<cplx> BesselBandpass::prototype_poles(int n) {
  if (n < 1 || n > 10) throw invalid_argument("Bessel order must be in [1, 10]");
  // Reverse Bessel polynomial coefficients a_k = (2n-k)! / (2^(n-k) k! (n-k)!).
  std::vector<double> a(n + 1);
  for (int k = 0; k <= n; ++k)
    a[k] = std::exp(std::lgamma(2 * n - k + 1) - (n - k) * std::log(2.0) - std::lgamma(k + 1) - std::lgamma(n - k + 1));
  RMatrix companion = RMatrix::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -a[i] / a[n];
  Eigen::EigenSolver<RMatrix> es(companion, false);
  std::vector<cplx> p(es.eigenvalues().data(), es.eigenvalues().data() + n);
  auto mag2 = [&](double w) {
    cplx h = 1.0;
    for (const cplx& pk : p) h *= -pk / (cplx(0.0, w) - pk);
    return std::norm(h);
  };
  double lo = 1e-3, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (mag2(mid) > 0.5 ? lo : hi) = mid;
  }
  const double wc = std::sqrt(lo * hi);
  for (cplx& pk : p) pk /= wc;
  std::sort(p.begin(), p.end(), [](cplx x, cplx y) { return x.imag() < y.imag(); });
  return p;
}

BesselBandpass::BesselBandpass(int order, double low_hz, double high_hz, double fs)
    : order_(order), low_(low_hz), high_(high_hz), fs_(fs) {
  if (!(low_hz > 0.0) || !(high_hz > low_hz)) throw invalid_argument("band edges must satisfy 0 < low < high");
  if (!(fs > 2.0 * high_hz)) throw invalid_argument("sample rate must exceed twice the upper band edge");
  const double w_lo = kTwoPi * low_hz, w_hi = kTwoPi * high_hz;
  const double w0 = std::sqrt(w_lo * w_hi), bw = w_hi - w_lo;
  const double k = w0 / std::tan(w0 / (2.0 * fs));

  const std::vector<cplx> lp = prototype_poles(order);
  cplx k0 = 1.0;
  for (const cplx& p : lp) k0 *= -p;
  std::vector<cplx> analog;
  for (const cplx& p : lp) {
    const cplx disc = std::sqrt(p * p * bw * bw - 4.0 * w0 * w0);
    analog.push_back(0.5 * (p * bw + disc));
    analog.push_back(0.5 * (p * bw - disc));
  }
  cplx gain = k0 * std::pow(bw * k, order);
  for (const cplx& s : analog) {
    gain /= (k - s);
    poles_.push_back((k + s) / (k - s));
  }
  for (const cplx& z : poles_)
    if (!(std::abs(z) < 1.0)) throw numerical_error("Bessel band-pass design is unstable");

  // Pair conjugates; every section gets the zero pair z = +1, -1.
  std::vector<cplx> upper, real;
  for (const cplx& z : poles_) {
    if (z.imag() > 1e-14 * std::abs(z)) upper.push_back(z);
    else if (std::abs(z.imag()) <= 1e-14 * std::abs(z)) real.push_back(z);
  }
  std::sort(upper.begin(), upper.end(), [](cplx x, cplx y) { return std::abs(x) < std::abs(y); });
  for (const cplx& z : upper) sections_.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
  std::sort(real.begin(), real.end(), [](cplx x, cplx y) { return x.real() < y.real(); });
  for (size_t i = 0; i + 1 < real.size(); i += 2)
    sections_.push_back({1.0, 0.0, -1.0, -(real[i] + real[i + 1]).real(), (real[i] * real[i + 1]).real()});
  if (real.size() % 2 || static_cast<int>(sections_.size()) != order)
    throw numerical_error("Bessel band-pass poles do not pair into sections");
  const double g = gain.real();
  sections_.front().b0 *= g;
  sections_.front().b2 *= g;
}

RVector BesselBandpass::apply(const RVector& x) const {
  RVector y = x;
  for (const Section& s : sections_) {
    double z1 = 0.0, z2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double in = y(i);
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      y(i) = out;
    }
  }
  return y;
}

RMatrix BesselBandpass::apply_columns(const RMatrix& x) const {
  RMatrix y = x;
  const Eigen::Index cols = y.cols();
  RVector z1(cols), z2(cols), out(cols);
  for (const Section& s : sections_) {
    z1.setZero();
    z2.setZero();
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const RVector in = y.row(i).transpose();
      out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      y.row(i) = out.transpose();
    }
  }
  return y;
}

cplx BesselBandpass::frequency_response(double f_hz) const {
  const cplx zi = std::exp(cplx(0.0, -kTwoPi * f_hz / fs_));
  cplx h = 1.0;
  for (const Section& s : sections_)
    h *= (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
  return h;
}

std::string BesselBandpass::descriptor() const {
  std::ostringstream os;
  os << "bessel" << order_ << "-bandpass:" << low_ << "-" << high_ << "Hz@" << fs_ << "Hz";
  return os.str();
}

// ---------------------------------------------------------------------------
// Records

MeasurementRecord MeasurementRecord::head(int n) const {
  if (n < 0 || n > samples()) throw invalid_argument("record head length out of range");
  MeasurementRecord r = *this;
  r.times.resize(n);
  r.values = values.head(n);
  return r;
}

RVector noiseless_record(const ObservableSeries& series, const CMatrix& rho0) {
  if (rho0.rows() != series.dim()) throw invalid_argument("state and observable series live on different spaces");
  return series.expectation(rho0);
}

MeasurementRecord synthesize_record(const ObservableSeries& series, const CMatrix& rho0, double sigma,
                                    std::uint64_t seed, const BesselBandpass* filter) {
  if (!(sigma >= 0.0)) throw invalid_argument("sigma must be non-negative");
  MeasurementRecord rec;
  rec.times = series.times;
  rec.sigma = sigma;
  rec.seed = seed;
  rec.values = noiseless_record(series, rho0);
  if (sigma > 0.0) {
    Rng rng(seed);
    rec.values += sigma * rng.normal_vector(static_cast<int>(rec.values.size()));
  }
  if (filter) {
    rec.values = filter->apply(rec.values);
    rec.filter = filter->descriptor();
  }
  return rec;
}

double snr_to_sigma(const RVector& clean, double snr, const BesselBandpass* filter) {
  if (!(snr > 0.0)) throw invalid_argument("SNR must be positive");
  const RVector y = filter ? filter->apply(clean) : clean;
  const double rms = y.size() ? std::sqrt(y.squaredNorm() / static_cast<double>(y.size())) : 0.0;
  if (rms == 0.0) throw invalid_argument("noiseless record is identically zero");
  if (std::isinf(snr)) return 0.0;
  return rms / snr;
}

double snr_to_sigma(const ObservableSeries& series, const CMatrix& rho0, double snr, const BesselBandpass* filter) {
  return snr_to_sigma(noiseless_record(series, rho0), snr, filter);
}

// ---------------------------------------------------------------------------
// Intensity distribution

IntensityDistribution IntensityDistribution::uniform_grid(int knots, double lo, double hi) {
  if (knots < 2 || !(hi > lo)) throw invalid_argument("intensity grid needs >= 2 knots on an increasing range");
  IntensityDistribution d;
  for (int n = 0; n < knots; ++n) d.xi.push_back(lo + (hi - lo) * n / (knots - 1));
  d.f.assign(knots, 0.0);
  return d;
}

IntensityDistribution IntensityDistribution::spike(double at, int knots, double lo, double hi) {
  IntensityDistribution d = uniform_grid(knots, lo, hi);
  int best = 0;
  for (int n = 1; n < knots; ++n)
    if (std::abs(d.xi[n] - at) < std::abs(d.xi[best] - at)) best = n;
  d.f[best] = 1.0 / d.weights()[best];
  return d;
}

IntensityDistribution IntensityDistribution::gaussian(double centre, double width, int knots, double lo, double hi) {
  if (!(width > 0.0)) throw invalid_argument("gaussian width must be positive");
  IntensityDistribution d = uniform_grid(knots, lo, hi);
  for (int n = 0; n < knots; ++n) d.f[n] = std::exp(-0.5 * std::pow((d.xi[n] - centre) / width, 2));
  const double norm = d.integral();
  for (double& v : d.f) v /= norm;
  return d;
}

std::vector<double> IntensityDistribution::weights() const {
  const int n = size();
  std::vector<double> w(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) {
    const double h = xi[i + 1] - xi[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

double IntensityDistribution::integral() const {
  const auto w = weights();
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += w[i] * f[i];
  return s;
}

void IntensityDistribution::validate() const {
  if (xi.size() < 2 || f.size() != xi.size()) throw invalid_argument("intensity distribution needs matching xi/f of size >= 2");
  for (size_t i = 1; i < xi.size(); ++i)
    if (!(xi[i] > xi[i - 1])) throw invalid_argument("intensity knots must be strictly increasing");
  for (double v : f)
    if (!(v >= 0.0)) throw invalid_argument("intensity distribution values must be non-negative");
}

namespace {

template <class T>
T weighted_sum(const std::vector<T>& per_node, const IntensityDistribution& dist) {
  dist.validate();
  if (per_node.size() != dist.xi.size()) throw invalid_argument("one series per intensity knot is required");
  const auto w = dist.weights();
  T out = T::Zero(per_node[0].rows(), per_node[0].cols());
  for (size_t n = 0; n < per_node.size(); ++n) {
    if (per_node[n].rows() != out.rows() || per_node[n].cols() != out.cols())
      throw invalid_argument("per-knot series have inconsistent shapes");
    if (dist.f[n] != 0.0) out += (w[n] * dist.f[n]) * per_node[n];
  }
  return out;
}

}  // namespace

RVector intensity_average(const std::vector<RVector>& per_node, const IntensityDistribution& dist) {
  return weighted_sum(per_node, dist);
}

RMatrix intensity_average(const std::vector<RMatrix>& per_node, const IntensityDistribution& dist) {
  return weighted_sum(per_node, dist);
}

}  // namespace spintomo

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


#include "fixtures.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace spintomo;
using namespace spintomo::testing;

namespace {

// Exhaustive NNLS over active sets: unconstrained LS on every support, keep the best feasible.
RVector nnls_oracle(const RMatrix& a, const RVector& b) {
  const int n = static_cast<int>(a.cols());
  RVector best = RVector::Zero(n);
  double best_r = b.squaredNorm();
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (mask & (1 << j)) idx.push_back(j);
    RMatrix sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k) sub.col(k) = a.col(idx[k]);
    const RVector z = sub.colPivHouseholderQr().solve(b);
    if (z.minCoeff() < 0.0) continue;
    RVector x = RVector::Zero(n);
    for (size_t k = 0; k < idx.size(); ++k) x(idx[k]) = z(k);
    const double r = (b - a * x).squaredNorm();
    if (r < best_r) {
      best_r = r;
      best = x;
    }
  }
  return best;
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TEST_SUITE("calibration") {
  TEST_CASE("NNLS matches the exhaustive active-set oracle") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
      RMatrix a(12, 6);
      for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.normal();
      const RVector b = rng.normal_vector(12);
      const RVector x = nnls(a, b), o = nnls_oracle(a, b);
      CHECK(x.minCoeff() >= 0.0);
      CHECK(max_abs(x - o) < 1e-10);
    }
    CHECK(max_abs(nnls(RMatrix::Identity(3, 3), RVector::Zero(3))) == 0.0);
  }

  TEST_CASE("Nelder-Mead on the Rosenbrock valley") {
    auto rosen = [](const RVector& x) { return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2); };
    RVector x0(2), step(2);
    x0 << -1.2, 1.0;
    step << 0.1, 0.1;
    NelderMeadOptions o;
    o.xtol = 1e-10;
    const NelderMeadResult r = nelder_mead(rosen, x0, step, o), r2 = nelder_mead(rosen, x0, step, o);
    CHECK(r.converged);
    CHECK(std::abs(r.x(0) - 1.0) < 1e-6);
    CHECK(std::abs(r.x(1) - 1.0) < 1e-6);
    CHECK(r.x == r2.x);
    CHECK(r.evaluations == r2.evaluations);
  }

  TEST_CASE("intensity distribution round trip") {
    const F3Scenario s = larmor_truth();
    const auto grid = IntensityDistribution::uniform_grid();
    const BuiltScenario b = build_f3_larmor(s);
    const auto per = larmor_signals(s, grid, b.observable);
    IntensityDistribution truth = IntensityDistribution::gaussian(0.9, 0.15);
    for (double& v : truth.f) v *= 3.0;  // unnormalized scale is kept
    const MeasurementRecord rec = as_record(larmor_clean(s, truth), 100.0, 5);
    const IntensityDistribution fit = fit_intensity_distribution(rec, per, grid);
    std::vector<double> err;
    for (int n = 0; n < grid.size(); ++n) err.push_back(fit.f[n] - truth.f[n]);
    MESSAGE("rms knot error " << rms(err) / rms(truth.f) << " of rms f");
    CHECK(rms(err) <= 0.02 * rms(truth.f));
    for (double v : fit.f) CHECK(v >= 0.0);
    const RVector model = intensity_average(per, fit);
    CHECK(std::sqrt((rec.values - model).squaredNorm() / rec.samples()) <= 3.0 * rec.sigma);
  }

  TEST_CASE("spike intensity is recovered at the right knot") {
    const F3Scenario s = larmor_truth();
    const auto grid = IntensityDistribution::uniform_grid();
    const auto per = larmor_signals(s, grid, build_f3_larmor(s).observable);
    const IntensityDistribution spike = IntensityDistribution::spike(1.0);
    const MeasurementRecord rec = as_record(larmor_clean(s, spike), 100.0, 6);
    const IntensityDistribution fit = fit_intensity_distribution(rec, per, grid);
    const auto w = grid.weights();
    double total = 0.0, near = 0.0;
    for (int n = 0; n < grid.size(); ++n) {
      total += w[n] * fit.f[n];
      if (std::abs(grid.xi[n] - 1.0) <= 0.0625 + 1e-12) near += w[n] * fit.f[n];
    }
    CHECK(near >= 0.95 * total);
    CHECK(total == doctest::Approx(1.0).epsilon(0.02));
    MeasurementRecord zero = rec;
    zero.values.setZero();
    const IntensityDistribution none = fit_intensity_distribution(zero, per, grid);
    for (double v : none.f) CHECK(v == 0.0);
  }

  TEST_CASE("scalar Larmor fit round trip") {
    const F3Scenario truth = larmor_truth();
    const RVector clean = larmor_clean(truth, IntensityDistribution::spike(1.0));
    F3Scenario start = truth;
    start.omega_lx = kTwoPi * 17.6e3;
    start.gamma_sc = kTwoPi * 80.0;
    start.t0 = 0.0;

    const FitReport exact = fit_scalar_params(as_record(clean, INFINITY, 0), start);
    CHECK(exact.relative_residual <= 1e-10);
    CHECK(exact.params.omega_lx == doctest::Approx(truth.omega_lx).epsilon(1e-6));
    CHECK(exact.params.omega_ly == 0.0);

    const MeasurementRecord noisy = as_record(clean, 100.0, 7);
    const FitReport fit = fit_scalar_params(noisy, start);
    MESSAGE("Omega_L " << fit.params.omega_lx / kTwoPi << " Hz, gamma_sc " << fit.params.gamma_sc / kTwoPi << " Hz, t0 "
                       << fit.params.t0 / 1e-6 << " samples, condition " << fit.jacobian_condition);
    CHECK(std::abs(fit.params.omega_lx / truth.omega_lx - 1.0) <= 1e-3);
    CHECK(std::abs(fit.params.gamma_sc / truth.gamma_sc - 1.0) <= 0.02);
    CHECK(std::abs(fit.params.t0 - 3e-6) <= 0.5e-6);
    CHECK_FALSE(fit.degenerate);
    CHECK(std::isfinite(fit.jacobian_condition));
    const FitReport again = fit_scalar_params(noisy, start);
    CHECK(again.params.omega_lx == fit.params.omega_lx);
    CHECK(again.params.gamma_sc == fit.params.gamma_sc);
    CHECK(again.params.t0 == fit.params.t0);
  }

  TEST_CASE("a time origin pinned on its bound is reported as non-convergence") {
    const F3Scenario truth = larmor_truth();
    const MeasurementRecord rec = as_record(larmor_clean(truth, IntensityDistribution::spike(1.0)), INFINITY, 0);
    F3Scenario far = truth;
    far.t0 = 0.0;
    FitOptions bounded;
    bounded.free = {"t0"};
    bounded.t0_bound_samples = 1.0;
    bounded.windows = {1.0};
    CHECK(error_kind([&] { fit_scalar_params(rec, far, bounded); }) == ErrorKind::Convergence);
  }

  TEST_CASE("measurement-basis fit") {
    F3Scenario truth = larmor_truth();
    truth.polarimetry = PolarimetrySettings::mixed(0.1613, 0.1598);
    const IntensityDistribution f = IntensityDistribution::spike(1.0);
    const MeasurementRecord rec = as_record(larmor_clean(truth, f), 100.0, 8);
    F3Scenario start = truth;
    start.omega_lx *= 1.002;
    start.t0 = 1e-6;
    const FitReport fit = fit_measurement_basis(rec, start, f);
    MESSAGE("a " << fit.params.a << ", b " << fit.params.b);
    CHECK(std::abs(fit.params.a - 0.1613) <= 1e-3);
    CHECK(std::abs(fit.params.b - 0.1598) <= 1e-3);

    MeasurementRecord doubled = rec;
    doubled.values *= 2.0;
    const FitReport fit2 = fit_measurement_basis(doubled, start, f);
    CHECK(fit2.params.a == doctest::Approx(2.0 * fit.params.a).epsilon(1e-9));
    CHECK(fit2.params.b == doctest::Approx(2.0 * fit.params.b).epsilon(1e-9));

    F3Scenario faraday = truth;
    faraday.polarimetry = PolarimetrySettings::mixed(0.0, 1.0);
    const MeasurementRecord frec = as_record(larmor_clean(faraday, f), 100.0, 9);
    const FitReport ff = fit_measurement_basis(frec, start, f);
    CHECK(std::abs(ff.params.a) <= 3e-3);
    CHECK(ff.params.b == doctest::Approx(1.0).epsilon(3e-3));
  }
}

TEST_SUITE("calibration") {
  TEST_CASE("field refit before reconstruction") {
    F3Scenario nominal;
    nominal.duration = 1e-3;
    const SplineWaveform phi = spline_control_angle(random_spline_knots(kSplineKnots, 4), 80e-6, nominal.duration);
    F3Scenario truth = nominal;
    truth.omega_ly *= 1.005;
    Rng rng(42);
    const CMatrix rho = sample_state(StateKind::HilbertSchmidt, 7, rng);
    const ObservableSeries true_series = observe(build_f3_lightshift(truth, phi));
    const MeasurementRecord rec = as_record(noiseless_record(true_series, rho), 100.0, 10);

    const FitReport fixed = refit_before_reconstruction(
        as_record(noiseless_record(observe(build_f3_lightshift(nominal, phi)), rho), 100.0, 10), nominal, phi);
    CHECK(std::abs(fixed.params.omega_ly / nominal.omega_ly - 1.0) <= 5e-4);
    CHECK(std::abs(fixed.params.omega_lx / nominal.omega_lx - 1.0) <= 5e-4);

    const FitReport refit = refit_before_reconstruction(rec, nominal, phi);
    MESSAGE("B_y ratio " << refit.params.omega_ly / truth.omega_ly << ", B_x ratio " << refit.params.omega_lx / truth.omega_lx);
    CHECK(std::abs(refit.params.omega_ly / truth.omega_ly - 1.0) <= 5e-4);
    CHECK(std::abs(refit.params.omega_lx / truth.omega_lx - 1.0) <= 1e-3);

    const ReconstructionResult skip = reconstruct(rec, build_design(observe(build_f3_lightshift(nominal, phi))), {}, &rho);
    const ReconstructionResult fixed_up =
        reconstruct(rec, build_design(observe(build_f3_lightshift(with_params(nominal, refit.params), phi))), {}, &rho);
    MESSAGE("fidelity without refit " << *skip.fidelity << ", with refit " << *fixed_up.fidelity);
    CHECK(*fixed_up.fidelity > *skip.fidelity);
  }
}

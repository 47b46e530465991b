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


#include "spintomo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

namespace spintomo {

std::optional<BesselBandpass> make_filter(const Config& c) {
  if (!c.record.filter) return std::nullopt;
  return BesselBandpass(c.record.filter_order, c.record.filter_low_hz, c.record.filter_high_hz, 1.0 / c.dt());
}

PhaseWaveform phase_waveform(const Config& c) {
  const Full16Scenario& s = c.full16;
  if (!c.waveform.file.empty()) return read_phase_waveform_csv(c.waveform.file, s.duration, s.rf_segment, s.uw_segment);
  return random_phase_waveforms(s.duration, s.rf_segment, s.uw_segment, c.waveform.seed);
}

std::vector<double> spline_knots(const Config& c) {
  if (!c.waveform.file.empty()) return read_knots_csv(c.waveform.file, c.waveform.knot_spacing);
  return random_spline_knots(kSplineKnots, c.waveform.seed);
}

SplineWaveform spline_waveform(const Config& c) {
  return spline_control_angle(spline_knots(c), c.waveform.knot_spacing, c.f3.duration);
}

std::string Model::basis_tag() const {
  return (config.kind == ScenarioKind::Full16 ? SpinSpace::cs_ground() : SpinSpace::single(HalfInt(3))).tag() +
         ":F-ascending,m-descending";
}

ObservableSeries model_series(const Config& c, const F3Scenario& f3) {
  const IntensityDistribution dist = c.intensity.distribution();
  switch (c.kind) {
    case ScenarioKind::Full16: {
      const PhaseWaveform w = phase_waveform(c);
      if (!c.intensity.enabled) return observe(build_full16(c.full16, w));
      return observe_averaged(dist, [&](double xi) { return build_full16(c.full16, w, xi); });
    }
    case ScenarioKind::F3LightShift: {
      const SplineWaveform phi = spline_waveform(c);
      if (!c.intensity.enabled) return observe(build_f3_lightshift(f3, phi));
      return observe_averaged(dist, [&](double xi) { return build_f3_lightshift(f3, phi, xi); });
    }
    case ScenarioKind::F3Larmor:
      if (!c.intensity.enabled) return observe(build_f3_larmor(f3));
      return observe_averaged(dist, [&](double xi) { return build_f3_larmor(f3, xi); });
  }
  throw invalid_argument("unknown scenario kind");
}

Model build_model(const Config& c) {
  Model m;
  m.config = c;
  m.filter = make_filter(c);
  m.hash = c.hash();
  m.series = model_series(c, c.f3);
  m.design = build_design(m.series, m.filter_ptr());
  return m;
}

SeedPair seeds_for(std::uint64_t master, int index) {
  return {derive_seed(master, 2 * static_cast<std::uint64_t>(index)),
          derive_seed(master, 2 * static_cast<std::uint64_t>(index) + 1)};
}

CMatrix make_state(const Config& c, std::uint64_t seed) {
  const int d = c.dim();
  const std::string& k = c.state.kind;
  CMatrix rho;
  if (k == "haar-pure" || k == "hilbert-schmidt") return sample_state(state_kind_from_name(k), d, seed);
  if (k == "squeezed-cat") return squeezed_cat_state();
  if (k == "spin-coherent") {
    if (d == 7) return spin_coherent_state(HalfInt(3), c.state.axis);
    return embed(spin_coherent_state(HalfInt(4), c.state.axis), SpinSpace::single(HalfInt(4)), SpinSpace::cs_ground());
  }
  if (k == "file") {
    rho = read_state_json(c.state.file);
    if (rho.rows() != d) throw Error(ErrorKind::Config, "state file dimension " + std::to_string(rho.rows()) +
                                                            " does not match the scenario (" + std::to_string(d) + ")");
    return rho;
  }
  throw Error(ErrorKind::Config, "unknown state kind '" + k + "'");
}

MeasurementRecord simulate_record(const Model& m, const CMatrix& rho, std::uint64_t noise_seed,
                                  std::optional<double> snr_override) {
  const RecordSettings& r = m.config.record;
  double sigma = 0.0;
  std::string definition;
  if (r.sigma && !snr_override) {
    sigma = *r.sigma;
    definition = "absolute";
  } else {
    const double snr = snr_override ? *snr_override : *r.snr;
    sigma = snr_to_sigma(m.series, rho, snr, m.filter_ptr());
    definition = m.filter ? "rms-filtered/snr=" : "rms/snr=";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", snr);
    definition += buf;
  }
  MeasurementRecord rec = synthesize_record(m.series, rho, sigma, noise_seed, m.filter_ptr());
  rec.snr_definition = definition;
  return rec;
}

std::vector<double> default_horizons(const Model& m) {
  const EstimationSettings& e = m.config.estimation;
  if (e.horizons == 0) return {};
  const double end = m.series.times.back();
  if (e.horizons == 1 || e.first_horizon >= end) return {end};
  return log_horizons(e.first_horizon, end, e.horizons);
}

ReconstructionResult reconstruct_record(const Model& m, const MeasurementRecord& rec, const CMatrix* truth) {
  const std::string expected = m.filter ? m.filter->descriptor() : "none";
  if (rec.filter != expected)
    throw Error(ErrorKind::ModelInconsistency, "record filter '" + rec.filter + "' does not match the model '" + expected + "'");
  if (truth && truth->rows() != m.dim()) throw Error(ErrorKind::ModelInconsistency, "truth state has the wrong dimension");
  ReconstructionOptions opts;
  opts.rtol = m.config.estimation.rtol;
  opts.projection = m.config.estimation.projection;
  const double end = rec.times.back();
  for (double h : default_horizons(m))
    if (h < end * (1.0 - 1e-12)) opts.horizons.push_back(h);
  opts.horizons.push_back(end);
  return reconstruct(rec, m.design, opts, truth);
}

FitReport calibrate_record(const Config& c, const MeasurementRecord& rec) {
  if (c.kind == ScenarioKind::Full16) throw Error(ErrorKind::Config, "calibration needs an F=3 scenario");
  const CalibrationSettings& cs = c.calibration;
  F3Scenario initial = c.f3;
  if (cs.larmor_x) initial.omega_lx = *cs.larmor_x;
  if (cs.larmor_y) initial.omega_ly = *cs.larmor_y;
  if (cs.gamma_sc) initial.gamma_sc = *cs.gamma_sc;
  if (cs.t0) initial.t0 = *cs.t0;
  const auto filter = make_filter(c);
  const BesselBandpass* fp = filter ? &*filter : nullptr;
  const std::string expected = filter ? filter->descriptor() : "none";
  if (rec.filter != expected)
    throw Error(ErrorKind::ModelInconsistency, "record filter '" + rec.filter + "' does not match the config '" + expected + "'");

  if (cs.fit == "refit") {
    if (c.kind != ScenarioKind::F3LightShift) throw Error(ErrorKind::Config, "calibration.fit = \"refit\" needs f3-lightshift");
    RefitOptions opts;
    if (!cs.free.empty()) opts.free = cs.free;
    if (cs.simplex_fraction > 0.0) opts.simplex_fraction = cs.simplex_fraction;
    opts.nm.max_evaluations = cs.max_evaluations;
    opts.rtol = c.estimation.rtol;
    opts.filter = fp;
    const IntensityDistribution dist = c.intensity.distribution();
    if (c.intensity.enabled) opts.intensity = &dist;
    return refit_before_reconstruction(rec, initial, spline_waveform(c), opts);
  }
  if (c.kind != ScenarioKind::F3Larmor) throw Error(ErrorKind::Config, "calibration.fit = \"" + cs.fit + "\" needs f3-larmor");

  FitOptions opts;
  if (!cs.free.empty()) opts.free = cs.free;
  if (cs.simplex_fraction > 0.0) opts.simplex_fraction = cs.simplex_fraction;
  opts.mode = cs.intensity_mode == "free" ? IntensityMode::Free : IntensityMode::FixedShape;
  opts.intensity = c.intensity.distribution();
  opts.nm.max_evaluations = cs.max_evaluations;
  opts.filter = fp;
  if (cs.fit == "scalar") return fit_scalar_params(rec, initial, opts);
  if (cs.fit == "basis") {
    if (cs.free.empty()) opts.free = FitOptions{}.free;
    return fit_measurement_basis(rec, initial, c.intensity.distribution(), opts);
  }
  // Intensity distribution alone at the configured parameters.
  const BuiltScenario b = build_f3_larmor(initial);
  const IntensityDistribution grid =
      IntensityDistribution::uniform_grid(c.intensity.knots, c.intensity.xi_min, c.intensity.xi_max);
  const auto per = larmor_signals(initial, grid, b.observable, fp);
  FitReport r;
  r.params = params_of(initial);
  r.f = fit_intensity_distribution(rec, per, grid);
  const RVector model = intensity_average(per, r.f);
  const int n = std::min<int>(rec.samples(), static_cast<int>(model.size()));
  r.residual = (rec.values.head(n) - model.head(n)).squaredNorm();
  r.relative_residual = r.residual / std::max(rec.values.head(n).squaredNorm(), 1e-300);
  r.jacobian_condition = 0.0;
  return r;
}

std::vector<BenchmarkRow> run_benchmark(const Model& m, const std::vector<double>& snrs, int states,
                                        std::uint64_t master_seed, int threads) {
  if (states < 1) throw invalid_argument("benchmark needs at least one state");
  if (snrs.empty()) throw invalid_argument("benchmark needs at least one SNR entry");
  std::vector<BenchmarkRow> rows(snrs.size() * states);
  for (size_t s = 0; s < snrs.size(); ++s)
    for (int i = 0; i < states; ++i) {
      BenchmarkRow& r = rows[s * states + i];
      r.snr = snrs[s];
      r.index = i;
      r.seeds = seeds_for(master_seed, i);
    }
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min<int>(threads, static_cast<int>(rows.size()));
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (size_t k; (k = next.fetch_add(1)) < rows.size();) {
      try {
        BenchmarkRow& r = rows[k];
        const CMatrix rho = make_state(m.config, r.seeds.state);
        const MeasurementRecord rec =
            simulate_record(m, rho, r.seeds.noise, r.snr > 0.0 ? std::optional<double>(r.snr) : std::nullopt);
        ReconstructionOptions opts;
        opts.rtol = m.config.estimation.rtol;
        opts.projection = m.config.estimation.projection;
        const ReconstructionResult res = reconstruct(rec, m.design, opts, &rho);
        r.fidelity = *res.fidelity;
        r.rank = res.ml.rank;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = rows.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

}  // namespace spintomo

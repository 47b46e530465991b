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

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

using namespace spintomo;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::InvalidArgument:
    case ErrorKind::ModelInconsistency: return 2;
    case ErrorKind::Io:
    case ErrorKind::NotFound: return 4;
    default: return 3;
  }
}

struct Common {
  std::string config, out = ".", record, truth;
  std::optional<std::uint64_t> seed;
  bool force = false, override_hash = false;
  int states = 0, threads = 0, screen = 0, manifold = 3;
  bool write_out = true;
};

Metadata stamp(const Config& c) {
  return {{"scenario_hash", c.hash()}, {"scenario_kind", scenario_kind_name(c.kind)}};
}

void check_hash(const Config& c, const Metadata& meta, const std::string& file, bool override_hash) {
  auto it = meta.find("scenario_hash");
  const std::string got = it == meta.end() ? std::string("<none>") : it->second;
  if (got == c.hash()) return;
  if (override_hash) {
    std::cerr << "warning: " << file << " has scenario hash " << got << ", config has " << c.hash() << "\n";
    return;
  }
  throw Error(ErrorKind::Config, file + " was produced by scenario hash " + got + " but the config hashes to " + c.hash() +
                                     " (use --override-hash to proceed)");
}

void print_summary(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_simulate(const Common& o) {
  Config c = load_config(o.config);
  std::uint64_t state_seed = c.state.seed, noise_seed = c.record.noise_seed;
  if (o.seed) {
    const SeedPair s = seeds_for(*o.seed, 0);
    state_seed = s.state;
    noise_seed = s.noise;
  }
  OutputDir dir(o.out, o.force);
  const std::string rec_path = dir.path("record.csv"), truth_path = dir.path("truth_state.json"),
                    info_path = dir.path("simulate.json");
  const Model m = build_model(c);
  const CMatrix rho = make_state(c, state_seed);
  const MeasurementRecord rec = simulate_record(m, rho, noise_seed);
  Metadata meta = stamp(c);
  write_record_csv(rec_path, rec, meta);
  meta["state_kind"] = c.state.kind;
  meta["state_seed"] = std::to_string(state_seed);
  write_state_json(truth_path, rho, m.basis_tag(), meta);
  nlohmann::ordered_json j;
  j["scenario_hash"] = m.hash;
  j["scenario_kind"] = scenario_kind_name(c.kind);
  j["samples"] = rec.samples();
  j["sample_step_s"] = rec.dt();
  j["sigma"] = rec.sigma;
  j["snr_definition"] = rec.snr_definition;
  j["filter"] = rec.filter;
  j["state_seed"] = state_seed;
  j["noise_seed"] = noise_seed;
  write_json(info_path, j);
  print_summary(j);
  return 0;
}

int cmd_reconstruct(const Common& o) {
  Config c = load_config(o.config);
  Metadata meta;
  const MeasurementRecord rec = read_record_csv(o.record, &meta);
  check_hash(c, meta, o.record, o.override_hash);
  std::string truth_path = o.truth;
  if (truth_path.empty()) {
    const auto guess = std::filesystem::path(o.record).parent_path() / "truth_state.json";
    if (std::filesystem::exists(guess)) truth_path = guess.string();
  }
  std::optional<CMatrix> truth;
  if (!truth_path.empty()) {
    Metadata tmeta;
    truth = read_state_json(truth_path, nullptr, &tmeta);
    check_hash(c, tmeta, truth_path, o.override_hash);
  }
  OutputDir dir(o.out, o.force);
  const std::string est_path = dir.path("estimate_state.json"), fid_path = dir.path("fidelity.csv"),
                    diag_path = dir.path("diagnostics.json");
  const Model m = build_model(c);
  const ReconstructionResult res = reconstruct_record(m, rec, truth ? &*truth : nullptr);
  const Metadata stamp_meta = stamp(c);
  write_state_json(est_path, res.estimate.rho, m.basis_tag(), stamp_meta);
  write_fidelity_csv(fid_path, res.trajectory, stamp_meta);
  nlohmann::ordered_json j;
  j["scenario_hash"] = m.hash;
  j["samples_used"] = res.samples_used;
  j["samples_model"] = m.design.rows();
  j["rank"] = res.ml.rank;
  j["parameters"] = m.design.cols();
  j["sigma"] = rec.sigma;
  j["projection_iterations"] = res.estimate.iterations;
  j["projection_kkt"] = res.estimate.kkt;
  j["ml_was_state"] = res.estimate.inside;
  if (res.fidelity) j["fidelity"] = *res.fidelity;
  else j["fidelity"] = nullptr;
  write_json(diag_path, j);
  print_summary(j);
  return 0;
}

int cmd_calibrate(const Common& o) {
  Config c = load_config(o.config);
  Metadata meta;
  const MeasurementRecord rec = read_record_csv(o.record, &meta);
  check_hash(c, meta, o.record, o.override_hash);
  OutputDir dir(o.out, o.force);
  const std::string report_path = dir.path("calibration_report.json"), f_path = dir.path("intensity.csv");
  const FitReport r = calibrate_record(c, rec);
  nlohmann::ordered_json j;
  j["scenario_hash"] = c.hash();
  j["fit"] = c.calibration.fit;
  j["record_samples"] = rec.samples();
  j["result"] = fit_report_json(r);
  write_json(report_path, j);
  write_intensity_csv(f_path, r.f, stamp(c));
  print_summary(j);
  return 0;
}

int cmd_benchmark(const Common& o) {
  Config c = load_config(o.config);
  const int states = o.states > 0 ? o.states : c.benchmark.states;
  const std::uint64_t seed = o.seed ? *o.seed : c.benchmark.seed;
  std::vector<double> snrs = c.benchmark.snr_sweep;
  if (snrs.empty()) snrs.push_back(0.0);
  OutputDir dir(o.out, o.force);
  const std::string rows_path = dir.path("benchmark.csv"), summary_path = dir.path("benchmark_summary.csv");
  const Model m = build_model(c);
  const auto rows = run_benchmark(m, snrs, states, seed, o.threads);
  auto label = [&](double snr) {
    if (snr > 0.0) return snr;
    return c.record.snr ? *c.record.snr : 0.0;
  };
  {
    std::ofstream out(rows_path);
    for (const auto& [k, v] : stamp(c)) out << "# " << k << ": " << v << "\n";
    out << "snr,index,state_seed,noise_seed,fidelity,rank\n";
    char buf[160];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%.17g,%d,%llu,%llu,%.17g,%d\n", label(r.snr), r.index,
                    static_cast<unsigned long long>(r.seeds.state), static_cast<unsigned long long>(r.seeds.noise),
                    r.fidelity, r.rank);
      out << buf;
    }
    if (!out) throw Error(ErrorKind::Io, "cannot write " + rows_path);
  }
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  {
    std::ofstream out(summary_path);
    for (const auto& [k, v] : stamp(c)) out << "# " << k << ": " << v << "\n";
    out << "snr,states,mean_fidelity,stddev_fidelity,min_fidelity\n";
    for (size_t s = 0; s < snrs.size(); ++s) {
      double sum = 0.0, sq = 0.0, mn = 1.0;
      for (int i = 0; i < states; ++i) {
        const double f = rows[s * states + i].fidelity;
        sum += f;
        sq += f * f;
        mn = std::min(mn, f);
      }
      const double mean = sum / states;
      const double sd = states > 1 ? std::sqrt(std::max(0.0, (sq - states * mean * mean) / (states - 1))) : 0.0;
      char buf[160];
      std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g\n", label(snrs[s]), states, mean, sd, mn);
      out << buf;
      summary.push_back({{"snr", label(snrs[s])}, {"mean_fidelity", mean}, {"stddev_fidelity", sd}, {"min_fidelity", mn}});
    }
    if (!out) throw Error(ErrorKind::Io, "cannot write " + summary_path);
  }
  print_summary({{"scenario_hash", m.hash}, {"states", states}, {"summary", summary}});
  return 0;
}

int cmd_gen_waveform(const Common& o) {
  Config c = load_config(o.config);
  if (c.kind == ScenarioKind::F3Larmor) throw Error(ErrorKind::Config, "f3-larmor has no control waveform");
  if (o.seed) c.waveform.seed = *o.seed;
  c.waveform.file.clear();
  const int n = std::max(1, o.screen);
  OutputDir dir(o.out, o.force);
  const std::string wf_path = dir.path(c.kind == ScenarioKind::Full16 ? "waveform.csv" : "knots.csv");
  const std::string screen_path = o.screen > 0 ? dir.path("screening.csv") : std::string();

  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < n; ++i) seeds.push_back(c.waveform.seed + i);
  std::function<std::pair<RMatrix, std::vector<double>>(const std::uint64_t&)> design_of = [&](const std::uint64_t& s) {
    Config ci = c;
    ci.waveform.seed = s;
    const auto filter = make_filter(ci);
    const ObservableSeries series = model_series(ci, ci.f3);
    DesignMatrix d = build_design(series, filter ? &*filter : nullptr);
    return std::make_pair(std::move(d.matrix), d.times);
  };
  std::vector<ScreeningEntry> ranking;
  if (o.screen > 0) ranking = screen_waveforms(seeds, design_of, c.estimation.rtol);
  const std::uint64_t best = o.screen > 0 ? seeds[ranking.front().candidate] : seeds.front();
  c.waveform.seed = best;
  Metadata meta = stamp(c);
  meta["waveform_seed"] = std::to_string(best);
  if (c.kind == ScenarioKind::Full16) {
    write_phase_waveform_csv(wf_path, phase_waveform(c), meta);
  } else {
    const auto knots = spline_knots(c);
    std::vector<double> times;
    for (size_t k = 0; k < knots.size(); ++k) times.push_back(k * c.waveform.knot_spacing);
    write_knots_csv(wf_path, times, knots, meta);
  }
  nlohmann::ordered_json j;
  j["waveform_seed"] = best;
  j["file"] = wf_path;
  if (o.screen > 0) {
    std::ofstream out(screen_path);
    for (const auto& [k, v] : stamp(c)) out << "# " << k << ": " << v << "\n";
    out << "seed,rank,condition,full_rank_time_s\n";
    for (const auto& e : ranking) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%llu,%d,%.17g,%.17g\n", static_cast<unsigned long long>(seeds[e.candidate]),
                    e.profile.rank, e.profile.condition, e.profile.full_rank_time);
      out << buf;
    }
    if (!out) throw Error(ErrorKind::Io, "cannot write " + screen_path);
    j["screened"] = n;
    j["condition"] = ranking.front().profile.condition;
    j["rank"] = ranking.front().profile.rank;
  }
  print_summary(j);
  return 0;
}

int cmd_magic(const Common& o) {
  Config c = o.config.empty() ? default_config(ScenarioKind::Full16) : load_config(o.config);
  const HalfInt F(o.manifold);
  const double magic = find_magic_detuning(c.atom(), c.line(), F);
  const ProbeSettings probe = ProbeSettings::make(c.line(), magic, Eigen::Vector3cd(1, 0, 0), 1.0);
  const BetaPair beta = beta_coefficients(probe, c.atom()).at(F);
  nlohmann::ordered_json j;
  j["line"] = c.line() == Line::D1 ? "D1" : "D2";
  j["manifold"] = o.manifold;
  j["magic_detuning_hz"] = magic / kTwoPi;
  j["beta0"] = {beta.beta0.real(), beta.beta0.imag()};
  j["beta2"] = {beta.beta2.real(), beta.beta2.imag()};
  if (!o.config.empty()) j["scenario_hash"] = c.hash();
  if (o.write_out) {
    OutputDir dir(o.out, o.force);
    write_json(dir.path("magic_detuning.json"), j);
  }
  print_summary(j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spintomo: continuous-measurement tomography of alkali hyperfine spins"};
  app.require_subcommand(1);
  Common o;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", o.config, "Scenario config (TOML)");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_flag("--force", o.force, "Overwrite existing outputs");
  };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { o.seed = s; }, "Master seed");
  };
  auto add_record = [&](CLI::App* sub) {
    sub->add_option("--record", o.record, "Record CSV")->required();
    sub->add_flag("--override-hash", o.override_hash, "Accept a record from a different scenario");
  };

  auto* sim = app.add_subcommand("simulate", "Synthesize a record and its truth state");
  add_common(sim, true);
  add_seed(sim);
  auto* rec = app.add_subcommand("reconstruct", "Estimate the initial state from a record");
  add_common(rec, true);
  add_record(rec);
  rec->add_option("--truth", o.truth, "Truth state for fidelity (default: truth_state.json beside the record)");
  auto* cal = app.add_subcommand("calibrate", "Fit calibration parameters to a record");
  add_common(cal, true);
  add_record(cal);
  auto* bench = app.add_subcommand("benchmark", "Fidelity over random states and SNRs");
  add_common(bench, true);
  add_seed(bench);
  bench->add_option("--states", o.states, "Number of states (default from config)")->check(CLI::PositiveNumber);
  bench->add_option("--threads", o.threads, "Worker threads (default: hardware)");
  auto* gen = app.add_subcommand("gen-waveform", "Write a control waveform file");
  add_common(gen, true);
  add_seed(gen);
  gen->add_option("--screen", o.screen, "Screen this many consecutive seeds and keep the best")->check(CLI::NonNegativeNumber);
  auto* magic = app.add_subcommand("magic-detuning", "Detuning where the scalar light shift vanishes");
  add_common(magic, false);
  magic->add_option("--manifold", o.manifold, "Ground manifold F")->check(CLI::Range(0, 20));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (*sim) return cmd_simulate(o);
    if (*rec) return cmd_reconstruct(o);
    if (*cal) return cmd_calibrate(o);
    if (*bench) return cmd_benchmark(o);
    if (*gen) return cmd_gen_waveform(o);
    if (*magic) {
      o.write_out = magic->count("--out") > 0;
      return cmd_magic(o);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

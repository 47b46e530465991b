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


#include "spintomo/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace spintomo {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void io_fail(const std::string& path, int line, const std::string& msg) {
  throw Error(ErrorKind::Io, path + (line > 0 ? ":" + std::to_string(line) : "") + ": " + msg);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail(path, 0, "cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) io_fail(path, 0, "write failed");
}

void write_meta(std::ostream& out, const Metadata& meta) {
  for (const auto& [k, v] : meta) out << "# " << k << ": " << v << "\n";
}

struct Table {
  Metadata meta;
  std::vector<std::vector<double>> rows;
  std::vector<int> lines;
};

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

Table read_table(const std::string& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) io_fail(path, 0, "cannot open for reading");
  Table t;
  const size_t ncol = std::count(header.begin(), header.end(), ',') + 1;
  std::string line;
  int lineno = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto colon = line.find(':');
      if (colon != std::string::npos) t.meta[trim(line.substr(1, colon - 1))] = trim(line.substr(colon + 1));
      continue;
    }
    if (!seen_header) {
      if (line != header) io_fail(path, lineno, "expected header '" + header + "'");
      seen_header = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        io_fail(path, lineno, "malformed number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != ncol || line.back() == ',')
      io_fail(path, lineno, "expected " + std::to_string(ncol) + " columns");
    t.rows.push_back(std::move(row));
    t.lines.push_back(lineno);
  }
  if (!seen_header) io_fail(path, 0, "missing header '" + header + "'");
  return t;
}

bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * scale; }

}  // namespace

OutputDir::OutputDir(std::string dir, bool force) : dir_(std::move(dir)), force_(force) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) throw Error(ErrorKind::Io, "cannot create output directory '" + dir_ + "'");
}

std::string OutputDir::path(const std::string& name) const {
  const std::string p = (fs::path(dir_) / name).string();
  if (!force_ && fs::exists(p)) throw Error(ErrorKind::Io, "refusing to overwrite '" + p + "' (use --force)");
  return p;
}

void write_record_csv(const std::string& path, const MeasurementRecord& rec, const Metadata& meta) {
  auto out = open_out(path);
  Metadata m = meta;
  m["sigma"] = num(rec.sigma);
  m["seed"] = std::to_string(rec.seed);
  m["filter"] = rec.filter;
  m["snr_definition"] = rec.snr_definition;
  m["samples"] = std::to_string(rec.samples());
  write_meta(out, m);
  out << "t_s,value\n";
  for (int i = 0; i < rec.samples(); ++i) out << num(rec.times[i]) << "," << num(rec.values(i)) << "\n";
  finish(out, path);
}

MeasurementRecord read_record_csv(const std::string& path, Metadata* meta) {
  Table t = read_table(path, "t_s,value");
  MeasurementRecord rec;
  rec.values.resize(t.rows.size());
  for (size_t i = 0; i < t.rows.size(); ++i) {
    if (i > 0 && !(t.rows[i][0] > t.rows[i - 1][0])) io_fail(path, t.lines[i], "time column must increase");
    rec.times.push_back(t.rows[i][0]);
    rec.values(i) = t.rows[i][1];
  }
  if (rec.times.empty()) io_fail(path, 0, "record has no samples");
  auto get = [&](const char* k) -> std::string {
    auto it = t.meta.find(k);
    return it == t.meta.end() ? std::string() : it->second;
  };
  const std::string sigma = get("sigma");
  if (!sigma.empty()) {
    char* end = nullptr;
    rec.sigma = std::strtod(sigma.c_str(), &end);
    if (*end != '\0' || rec.sigma < 0.0) io_fail(path, 0, "invalid sigma '" + sigma + "'");
  }
  if (!get("seed").empty()) rec.seed = std::strtoull(get("seed").c_str(), nullptr, 10);
  if (!get("filter").empty()) rec.filter = get("filter");
  if (!get("snr_definition").empty()) rec.snr_definition = get("snr_definition");
  if (meta) *meta = t.meta;
  return rec;
}

void write_phase_waveform_csv(const std::string& path, const PhaseWaveform& w, const Metadata& meta) {
  std::set<double> starts;
  for (size_t k = 0; k < w.phi_x.size(); ++k) starts.insert(k * w.rf_segment);
  for (size_t k = 0; k < w.phi_uw.size(); ++k) starts.insert(k * w.uw_segment);
  auto out = open_out(path);
  Metadata m = meta;
  m["duration_s"] = num(w.duration);
  m["rf_segment_s"] = num(w.rf_segment);
  m["uw_segment_s"] = num(w.uw_segment);
  m["seed"] = std::to_string(w.seed);
  write_meta(out, m);
  out << "segment_start_s,phi_x_rad,phi_y_rad,phi_uw_rad\n";
  double last = -1.0;
  for (double t : starts) {
    if (last >= 0.0 && t - last < 1e-12) continue;
    last = t;
    const int r = w.rf_index(t + 1e-12), u = w.uw_index(t + 1e-12);
    out << num(t) << "," << num(w.phi_x[r]) << "," << num(w.phi_y[r]) << "," << num(w.phi_uw[u]) << "\n";
  }
  finish(out, path);
}

PhaseWaveform read_phase_waveform_csv(const std::string& path, double duration, double rf_segment, double uw_segment) {
  Table t = read_table(path, "segment_start_s,phi_x_rad,phi_y_rad,phi_uw_rad");
  PhaseWaveform w = constant_phase_waveform(duration, rf_segment, uw_segment, 0.0);
  std::vector<bool> rf_seen(w.phi_x.size(), false), uw_seen(w.phi_uw.size(), false);
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const double s = t.rows[i][0];
    if (s < -1e-12 || s >= duration) io_fail(path, t.lines[i], "segment start outside [0, duration)");
    const double kr = std::round(s / rf_segment), ku = std::round(s / uw_segment);
    const bool on_rf = close(s, kr * rf_segment, rf_segment), on_uw = close(s, ku * uw_segment, uw_segment);
    if (!on_rf && !on_uw) io_fail(path, t.lines[i], "segment start is not a change point of the configured segments");
    if (on_rf) {
      w.phi_x[static_cast<size_t>(kr)] = t.rows[i][1];
      w.phi_y[static_cast<size_t>(kr)] = t.rows[i][2];
      rf_seen[static_cast<size_t>(kr)] = true;
    }
    if (on_uw) {
      w.phi_uw[static_cast<size_t>(ku)] = t.rows[i][3];
      uw_seen[static_cast<size_t>(ku)] = true;
    }
  }
  for (size_t k = 0; k < rf_seen.size(); ++k)
    if (!rf_seen[k]) io_fail(path, 0, "missing RF segment starting at " + num(k * rf_segment) + " s");
  for (size_t k = 0; k < uw_seen.size(); ++k)
    if (!uw_seen[k]) io_fail(path, 0, "missing microwave segment starting at " + num(k * uw_segment) + " s");
  return w;
}

void write_knots_csv(const std::string& path, const std::vector<double>& times, const std::vector<double>& values,
                     const Metadata& meta) {
  auto out = open_out(path);
  write_meta(out, meta);
  out << "t_s,phi_rad\n";
  for (size_t i = 0; i < times.size(); ++i) out << num(times[i]) << "," << num(values[i]) << "\n";
  finish(out, path);
}

std::vector<double> read_knots_csv(const std::string& path, double spacing) {
  Table t = read_table(path, "t_s,phi_rad");
  std::vector<double> v;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    if (!close(t.rows[i][0], i * spacing, spacing)) io_fail(path, t.lines[i], "knot times must be k * knot_spacing_s");
    v.push_back(t.rows[i][1]);
  }
  return v;
}

void write_state_json(const std::string& path, const CMatrix& rho, const std::string& basis_tag, const Metadata& meta) {
  nlohmann::ordered_json j;
  j["d"] = rho.rows();
  j["basis"] = basis_tag;
  for (const auto& [k, v] : meta) j[k] = v;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < rho.cols(); ++c) row.push_back({rho(r, c).real(), rho(r, c).imag()});
    rows.push_back(row);
  }
  j["rho"] = rows;
  write_json(path, j);
}

CMatrix read_state_json(const std::string& path, std::string* basis_tag, Metadata* meta) {
  const auto j = read_json(path);
  try {
    const int d = j.at("d").get<int>();
    if (d < 1) io_fail(path, 0, "state dimension must be positive");
    const auto& rows = j.at("rho");
    if (!rows.is_array() || static_cast<int>(rows.size()) != d) io_fail(path, 0, "rho must have d rows");
    CMatrix rho(d, d);
    for (int r = 0; r < d; ++r) {
      if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != d) io_fail(path, 0, "rho rows must have d entries");
      for (int c = 0; c < d; ++c) {
        const auto& e = rows[r][c];
        if (!e.is_array() || e.size() != 2) io_fail(path, 0, "entries must be [re, im] pairs");
        rho(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
      }
    }
    if (basis_tag) *basis_tag = j.value("basis", "");
    if (meta)
      for (const auto& [k, v] : j.items())
        if (v.is_string()) (*meta)[k] = v.get<std::string>();
    return rho;
  } catch (const nlohmann::json::exception& e) {
    io_fail(path, 0, std::string("invalid state file: ") + e.what());
  }
}

void write_fidelity_csv(const std::string& path, const std::vector<HorizonPoint>& points, const Metadata& meta) {
  auto out = open_out(path);
  write_meta(out, meta);
  out << "horizon_s,fidelity,rank\n";
  for (const auto& p : points) out << num(p.horizon) << "," << num(p.fidelity) << "," << p.rank << "\n";
  finish(out, path);
}

void write_intensity_csv(const std::string& path, const IntensityDistribution& f, const Metadata& meta) {
  auto out = open_out(path);
  write_meta(out, meta);
  out << "xi,f\n";
  for (int n = 0; n < f.size(); ++n) out << num(f.xi[n]) << "," << num(f.f[n]) << "\n";
  finish(out, path);
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
  finish(out, path);
}

nlohmann::ordered_json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, 0, "cannot open for reading");
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    io_fail(path, 0, e.what());
  }
}

nlohmann::ordered_json fit_report_json(const FitReport& r) {
  nlohmann::ordered_json j;
  j["larmor_x_hz"] = r.params.omega_lx / kTwoPi;
  j["larmor_y_hz"] = r.params.omega_ly / kTwoPi;
  j["gamma_sc_hz"] = r.params.gamma_sc / kTwoPi;
  j["time_origin_s"] = r.params.t0;
  j["a"] = r.params.a;
  j["b"] = r.params.b;
  j["free"] = r.free;
  j["residual"] = r.residual;
  j["relative_residual"] = r.relative_residual;
  j["jacobian_condition"] = r.jacobian_condition;
  j["degenerate"] = r.degenerate;
  j["evaluations"] = r.evaluations;
  return j;
}

}  // namespace spintomo

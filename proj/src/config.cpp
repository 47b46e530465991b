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


#include "spintomo/config.hpp"

#include <toml.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace spintomo {
namespace {

constexpr unsigned kFull = 1, kLight = 2, kLarmor = 4, kF3 = kLight | kLarmor, kAll = 7;

struct KeySpec {
  const char* name;
  unsigned kinds;
};

const std::map<std::string, std::vector<KeySpec>>& schema() {
  static const std::map<std::string, std::vector<KeySpec>> s = {
      {"scenario", {{"kind", kAll}, {"base", kAll}}},
      {"atom",
       {{"hyperfine_splitting_hz", kAll},
        {"g_lower", kAll},
        {"g_upper", kAll},
        {"d1_linewidth_hz", kAll},
        {"d2_linewidth_hz", kAll}}},
      {"probe", {{"line", kAll}, {"detuning_hz", kAll}, {"polarization", kFull}, {"gamma_sc_hz", kAll}}},
      {"drive",
       {{"bias_larmor_hz", kFull},
        {"rf_detuning_hz", kFull},
        {"uw_detuning_hz", kFull},
        {"rf_x_hz", kFull},
        {"rf_y_hz", kFull},
        {"uw_rabi_hz", kFull},
        {"second_order_rf", kFull},
        {"dissipator_phases", kFull},
        {"larmor_x_hz", kF3},
        {"larmor_y_hz", kF3},
        {"time_origin_s", kF3}}},
      {"waveform",
       {{"seed", kFull | kLight},
        {"file", kFull | kLight},
        {"rf_segment_s", kFull},
        {"uw_segment_s", kFull},
        {"knot_spacing_s", kLight}}},
      {"measurement", {{"kind", kAll}, {"a", kAll}, {"b", kAll}, {"theta_rad", kAll}}},
      {"record",
       {{"duration_s", kAll},
        {"sample_step_s", kAll},
        {"snr", kAll},
        {"sigma", kAll},
        {"noise_seed", kAll},
        {"filter", kAll},
        {"filter_order", kAll},
        {"filter_low_hz", kAll},
        {"filter_high_hz", kAll}}},
      {"state", {{"kind", kAll}, {"seed", kAll}, {"file", kAll}, {"axis", kAll}}},
      {"intensity",
       {{"enabled", kAll},
        {"shape", kAll},
        {"centre", kAll},
        {"width", kAll},
        {"knots", kAll},
        {"xi_min", kAll},
        {"xi_max", kAll}}},
      {"estimation",
       {{"rtol", kAll},
        {"horizons", kAll},
        {"first_horizon_s", kAll},
        {"barrier_mu_initial", kAll},
        {"barrier_mu_final", kAll},
        {"barrier_max_iterations", kAll}}},
      {"calibration",
       {{"fit", kAll},
        {"free", kAll},
        {"intensity_mode", kAll},
        {"simplex_fraction", kAll},
        {"max_evaluations", kAll},
        {"initial_larmor_x_hz", kAll},
        {"initial_larmor_y_hz", kAll},
        {"initial_gamma_sc_hz", kAll},
        {"initial_time_origin_s", kAll}}},
      {"benchmark", {{"states", kAll}, {"seed", kAll}, {"snr_sweep", kAll}}},
  };
  return s;
}

// Keys a custom scenario must spell out.
std::vector<std::string> custom_required(ScenarioKind base) {
  std::vector<std::string> r = {"probe.line",       "probe.detuning_hz",    "probe.gamma_sc_hz",
                                "record.duration_s", "record.sample_step_s", "record.filter",
                                "measurement.kind"};
  if (base == ScenarioKind::Full16) {
    for (const char* k : {"probe.polarization", "drive.bias_larmor_hz", "drive.rf_detuning_hz", "drive.uw_detuning_hz",
                          "drive.rf_x_hz", "drive.rf_y_hz", "drive.uw_rabi_hz", "drive.second_order_rf",
                          "drive.dissipator_phases", "waveform.rf_segment_s", "waveform.uw_segment_s"})
      r.push_back(k);
  } else {
    for (const char* k : {"drive.larmor_x_hz", "drive.larmor_y_hz", "drive.time_origin_s"}) r.push_back(k);
    if (base == ScenarioKind::F3LightShift) r.push_back("waveform.knot_spacing_s");
  }
  return r;
}

unsigned kind_bit(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Full16: return kFull;
    case ScenarioKind::F3LightShift: return kLight;
    case ScenarioKind::F3Larmor: return kLarmor;
  }
  return 0;
}

ScenarioKind kind_from_name(const std::string& s, bool& ok) {
  ok = true;
  if (s == "full16-rfuw") return ScenarioKind::Full16;
  if (s == "f3-lightshift") return ScenarioKind::F3LightShift;
  if (s == "f3-larmor") return ScenarioKind::F3Larmor;
  ok = false;
  return ScenarioKind::Full16;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Reader {
 public:
  Reader(const toml::table& root, std::string source) : root_(root), source_(std::move(source)) {}

  [[noreturn]] void fail(const toml::node* n, const std::string& msg) const {
    std::string where = source_;
    if (n) where += ":" + std::to_string(n->source().begin.line);
    throw Error(ErrorKind::Config, where + ": " + msg);
  }

  const toml::node* find(const std::string& sec, const std::string& key) const {
    const toml::table* t = root_[sec].as_table();
    return t ? t->get(key) : nullptr;
  }
  bool has(const std::string& sec, const std::string& key) const { return find(sec, key) != nullptr; }

  std::optional<double> number(const std::string& sec, const std::string& key) const {
    const toml::node* n = find(sec, key);
    if (!n) return std::nullopt;
    if (auto i = n->value_exact<int64_t>()) return static_cast<double>(*i);
    if (auto d = n->value_exact<double>()) return *d;
    fail(n, sec + "." + key + " must be a number");
  }
  void number(const std::string& sec, const std::string& key, double& out, double scale = 1.0) const {
    if (auto v = number(sec, key)) out = *v * scale;
  }
  void positive(const std::string& sec, const std::string& key, double& out, double scale = 1.0) const {
    if (auto v = number(sec, key)) {
      if (!(*v > 0.0)) fail(find(sec, key), sec + "." + key + " must be positive");
      out = *v * scale;
    }
  }
  std::optional<int64_t> integer(const std::string& sec, const std::string& key) const {
    const toml::node* n = find(sec, key);
    if (!n) return std::nullopt;
    if (auto i = n->value_exact<int64_t>()) return *i;
    fail(n, sec + "." + key + " must be an integer");
  }
  void count(const std::string& sec, const std::string& key, int& out, int min = 1) const {
    if (auto v = integer(sec, key)) {
      if (*v < min || *v > (1 << 24)) fail(find(sec, key), sec + "." + key + " is out of range");
      out = static_cast<int>(*v);
    }
  }
  void seed(const std::string& sec, const std::string& key, std::uint64_t& out) const {
    if (auto v = integer(sec, key)) {
      if (*v < 0) fail(find(sec, key), sec + "." + key + " must be non-negative");
      out = static_cast<std::uint64_t>(*v);
    }
  }
  std::optional<std::string> string(const std::string& sec, const std::string& key) const {
    const toml::node* n = find(sec, key);
    if (!n) return std::nullopt;
    if (auto s = n->value_exact<std::string>()) return *s;
    fail(n, sec + "." + key + " must be a string");
  }
  void boolean(const std::string& sec, const std::string& key, bool& out) const {
    const toml::node* n = find(sec, key);
    if (!n) return;
    if (auto b = n->value_exact<bool>()) {
      out = *b;
      return;
    }
    fail(n, sec + "." + key + " must be true or false");
  }
  std::vector<double> numbers(const std::string& sec, const std::string& key) const {
    const toml::node* n = find(sec, key);
    std::vector<double> out;
    if (!n) return out;
    const toml::array* a = n->as_array();
    if (!a) fail(n, sec + "." + key + " must be an array of numbers");
    for (const auto& e : *a) {
      if (auto i = e.value_exact<int64_t>()) out.push_back(static_cast<double>(*i));
      else if (auto d = e.value_exact<double>()) out.push_back(*d);
      else fail(&e, sec + "." + key + " must be an array of numbers");
    }
    return out;
  }
  std::vector<std::string> strings(const std::string& sec, const std::string& key) const {
    const toml::node* n = find(sec, key);
    std::vector<std::string> out;
    if (!n) return out;
    const toml::array* a = n->as_array();
    if (!a) fail(n, sec + "." + key + " must be an array of strings");
    for (const auto& e : *a) {
      auto s = e.value_exact<std::string>();
      if (!s) fail(&e, sec + "." + key + " must be an array of strings");
      out.push_back(*s);
    }
    return out;
  }

  void check_keys(unsigned kind) const {
    for (const auto& [name, node] : root_) {
      const std::string sec(name.str());
      auto it = schema().find(sec);
      if (it == schema().end()) fail(&node, "unknown section [" + sec + "]");
      const toml::table* t = node.as_table();
      if (!t) fail(&node, "'" + sec + "' must be a table");
      for (const auto& [kname, knode] : *t) {
        const std::string key(kname.str());
        const KeySpec* spec = nullptr;
        for (const auto& k : it->second)
          if (key == k.name) spec = &k;
        if (!spec) fail(&knode, "unknown key '" + sec + "." + key + "'");
        if (!(spec->kinds & kind)) fail(&knode, "key '" + sec + "." + key + "' does not apply to this scenario kind");
      }
    }
  }

  const std::string& source() const { return source_; }

 private:
  const toml::table& root_;
  std::string source_;
};

PolarimetrySettings read_measurement(const Reader& r, PolarimetrySettings p) {
  if (auto k = r.string("measurement", "kind")) {
    if (*k == "faraday") p = PolarimetrySettings::faraday();
    else if (*k == "birefringence") p = PolarimetrySettings::birefringence();
    else if (*k == "mixed") p = PolarimetrySettings::mixed(p.a, p.b);
    else if (*k == "analysis") p = PolarimetrySettings::analysis(p.theta);
    else r.fail(r.find("measurement", "kind"), "measurement.kind must be faraday, birefringence, mixed or analysis");
  }
  const bool mixed = p.kind == PolarimetryKind::Mixed;
  const bool analysis = p.kind == PolarimetryKind::Analysis;
  for (const char* k : {"a", "b"})
    if (r.has("measurement", k) && !mixed) r.fail(r.find("measurement", k), std::string("measurement.") + k + " needs kind = \"mixed\"");
  if (r.has("measurement", "theta_rad") && !analysis)
    r.fail(r.find("measurement", "theta_rad"), "measurement.theta_rad needs kind = \"analysis\"");
  r.number("measurement", "a", p.a);
  r.number("measurement", "b", p.b);
  r.number("measurement", "theta_rad", p.theta);
  return p;
}

Line read_line(const Reader& r, Line l) {
  if (auto s = r.string("probe", "line")) {
    if (*s == "D1") return Line::D1;
    if (*s == "D2") return Line::D2;
    r.fail(r.find("probe", "line"), "probe.line must be \"D1\" or \"D2\"");
  }
  return l;
}

void read_atom(const Reader& r, AtomConstants& a) {
  r.positive("atom", "hyperfine_splitting_hz", a.hyperfine_splitting, kTwoPi);
  r.number("atom", "g_lower", a.g_lower);
  r.number("atom", "g_upper", a.g_upper);
  r.positive("atom", "d1_linewidth_hz", a.d1.linewidth, kTwoPi);
  r.positive("atom", "d2_linewidth_hz", a.d2.linewidth, kTwoPi);
  if (a.g_lower == 0.0 || a.g_upper == 0.0) r.fail(nullptr, "atom g factors must be non-zero");
}

void canonical_atom(std::ostringstream& o, const AtomConstants& a) {
  o << "atom.hf=" << fmt(a.hyperfine_splitting) << "\natom.g=" << fmt(a.g_e) << "," << fmt(a.g_i) << ","
    << fmt(a.g_lower) << "," << fmt(a.g_upper) << "\n";
  for (const LineData* l : {&a.d1, &a.d2}) {
    o << "atom.line=" << l->j_excited.str() << "," << fmt(l->linewidth) << "," << fmt(l->oscillator_strength);
    for (const auto& lev : l->levels) o << "," << lev.F.str() << ":" << fmt(lev.energy);
    o << "\n";
  }
}

std::string canonical_pol(const PolarimetrySettings& p) {
  const char* names[] = {"faraday", "birefringence", "mixed", "analysis"};
  return std::string(names[static_cast<int>(p.kind)]) + "," + fmt(p.a) + "," + fmt(p.b) + "," + fmt(p.theta);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string resolve_relative(const std::string& source, const std::string& path) {
  if (path.empty() || path[0] == '/') return path;
  auto slash = source.find_last_of('/');
  if (slash == std::string::npos || source.front() == '<') return path;
  return source.substr(0, slash + 1) + path;
}

}  // namespace

std::string scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Full16: return "full16-rfuw";
    case ScenarioKind::F3LightShift: return "f3-lightshift";
    case ScenarioKind::F3Larmor: return "f3-larmor";
  }
  return "?";
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

IntensityDistribution IntensitySettings::distribution() const {
  if (!enabled) return IntensityDistribution::spike(1.0, knots, xi_min, xi_max);
  if (shape == "spike") return IntensityDistribution::spike(centre, knots, xi_min, xi_max);
  return IntensityDistribution::gaussian(centre, width, knots, xi_min, xi_max);
}

Config default_config(ScenarioKind kind) {
  Config c;
  c.kind = kind;
  if (kind == ScenarioKind::Full16) {
    c.record.filter = true;
    c.waveform.seed = 2;
  } else if (kind == ScenarioKind::F3LightShift) {
    c.state.kind = "hilbert-schmidt";
    c.waveform.seed = 4;
  } else {
    c.state.kind = "spin-coherent";
    c.f3.polarimetry = PolarimetrySettings::mixed(0.0, 1.0);
    c.calibration.fit = "scalar";
  }
  return c;
}

std::string Config::canonical() const {
  std::ostringstream o;
  o << "kind=" << scenario_kind_name(kind) << "\n";
  if (kind == ScenarioKind::Full16) {
    const Full16Scenario& s = full16;
    canonical_atom(o, s.atom);
    o << "probe=" << (s.line == Line::D1 ? "D1" : "D2") << ","
      << (s.probe_detuning ? fmt(*s.probe_detuning) : std::string("magic")) << "," << fmt(s.gamma_sc) << "\n";
    o << "probe.pol=";
    for (int i = 0; i < 3; ++i) o << fmt(s.polarization(i).real()) << "," << fmt(s.polarization(i).imag()) << ";";
    o << "\ndrive=" << fmt(s.omega_0) << "," << fmt(s.rf_detuning) << "," << fmt(s.uw_detuning) << "," << fmt(s.omega_x)
      << "," << fmt(s.omega_y) << "," << fmt(s.omega_uw) << "," << s.dissipator_phases << ","
      << (s.second_order_rf ? "rwa2" : "rwa1") << "\n";
    o << "grid=" << fmt(s.duration) << "," << fmt(s.dt) << "\n";
    o << "waveform=" << fmt(s.rf_segment) << "," << fmt(s.uw_segment) << ",";
    o << (waveform.file.empty() ? "seed:" + std::to_string(waveform.seed) : "file:" + waveform_digest) << "\n";
    o << "measurement=" << canonical_pol(s.polarimetry) << "\n";
  } else {
    const F3Scenario& s = f3;
    canonical_atom(o, s.atom);
    o << "probe=" << (s.line == Line::D1 ? "D1" : "D2") << "," << fmt(s.probe_detuning) << "," << fmt(s.gamma_sc) << "\n";
    o << "drive=" << fmt(s.omega_lx) << "," << fmt(s.omega_ly) << "," << fmt(s.t0) << "\n";
    o << "grid=" << fmt(s.duration) << "," << fmt(s.dt) << "\n";
    if (kind == ScenarioKind::F3LightShift)
      o << "waveform=" << fmt(waveform.knot_spacing) << ","
        << (waveform.file.empty() ? "seed:" + std::to_string(waveform.seed) : "file:" + waveform_digest) << "\n";
    o << "measurement=" << canonical_pol(s.polarimetry) << "\n";
  }
  o << "filter=";
  if (record.filter)
    o << record.filter_order << "," << fmt(record.filter_low_hz) << "," << fmt(record.filter_high_hz) << "\n";
  else
    o << "none\n";
  o << "intensity=";
  if (intensity.enabled)
    o << intensity.shape << "," << fmt(intensity.centre) << "," << fmt(intensity.width) << "," << intensity.knots << ","
      << fmt(intensity.xi_min) << "," << fmt(intensity.xi_max) << "\n";
  else
    o << "nominal\n";
  return o.str();
}

std::string Config::hash() const { return hex64(fnv1a(canonical())); }

Config parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorKind::Config, source + ":" + std::to_string(e.source().begin.line) + ": " +
                                       std::string(e.description()));
  }
  Reader r(root, source);

  auto kind_name = r.string("scenario", "kind");
  if (!kind_name) r.fail(nullptr, "missing required key 'scenario.kind'");
  bool custom = *kind_name == "custom";
  bool ok = false;
  ScenarioKind kind;
  if (custom) {
    auto base = r.string("scenario", "base");
    if (!base) r.fail(r.find("scenario", "kind"), "missing required key 'scenario.base' for a custom scenario");
    kind = kind_from_name(*base, ok);
    if (!ok) r.fail(r.find("scenario", "base"), "scenario.base must be full16-rfuw, f3-lightshift or f3-larmor");
  } else {
    kind = kind_from_name(*kind_name, ok);
    if (!ok) r.fail(r.find("scenario", "kind"), "scenario.kind must be full16-rfuw, f3-lightshift, f3-larmor or custom");
    if (r.has("scenario", "base")) r.fail(r.find("scenario", "base"), "scenario.base only applies to kind = \"custom\"");
  }
  r.check_keys(kind_bit(kind));
  if (custom)
    for (const std::string& k : custom_required(kind)) {
      auto dot = k.find('.');
      if (!r.has(k.substr(0, dot), k.substr(dot + 1))) r.fail(nullptr, "missing required key '" + k + "' for a custom scenario");
    }

  Config c = default_config(kind);
  c.custom = custom;
  c.source = source;

  if (kind == ScenarioKind::Full16) {
    Full16Scenario& s = c.full16;
    read_atom(r, s.atom);
    s.line = read_line(r, s.line);
    if (const toml::node* n = r.find("probe", "detuning_hz")) {
      if (auto str = n->value_exact<std::string>()) {
        if (*str != "magic") r.fail(n, "probe.detuning_hz must be a number or \"magic\"");
        s.probe_detuning.reset();
      } else {
        s.probe_detuning = *r.number("probe", "detuning_hz") * kTwoPi;
      }
    }
    if (auto p = r.string("probe", "polarization")) {
      try {
        s.polarization = polarization_from_name(*p);
      } catch (const Error& e) {
        r.fail(r.find("probe", "polarization"), e.what());
      }
    }
    r.positive("probe", "gamma_sc_hz", s.gamma_sc, kTwoPi);
    r.positive("drive", "bias_larmor_hz", s.omega_0, kTwoPi);
    r.number("drive", "rf_detuning_hz", s.rf_detuning, kTwoPi);
    r.number("drive", "uw_detuning_hz", s.uw_detuning, kTwoPi);
    r.number("drive", "rf_x_hz", s.omega_x, kTwoPi);
    r.number("drive", "rf_y_hz", s.omega_y, kTwoPi);
    r.number("drive", "uw_rabi_hz", s.omega_uw, kTwoPi);
    r.boolean("drive", "second_order_rf", s.second_order_rf);
    r.count("drive", "dissipator_phases", s.dissipator_phases);
    r.positive("waveform", "rf_segment_s", s.rf_segment);
    r.positive("waveform", "uw_segment_s", s.uw_segment);
    r.positive("record", "duration_s", s.duration);
    r.positive("record", "sample_step_s", s.dt);
    s.polarimetry = read_measurement(r, s.polarimetry);
  } else {
    F3Scenario& s = c.f3;
    read_atom(r, s.atom);
    s.line = read_line(r, s.line);
    if (const toml::node* n = r.find("probe", "detuning_hz"); n && !n->is_number())
      r.fail(n, "probe.detuning_hz must be a number for F=3 scenarios");
    r.number("probe", "detuning_hz", s.probe_detuning, kTwoPi);
    r.positive("probe", "gamma_sc_hz", s.gamma_sc, kTwoPi);
    r.number("drive", "larmor_x_hz", s.omega_lx, kTwoPi);
    r.number("drive", "larmor_y_hz", s.omega_ly, kTwoPi);
    r.number("drive", "time_origin_s", s.t0);
    r.positive("waveform", "knot_spacing_s", c.waveform.knot_spacing);
    r.positive("record", "duration_s", s.duration);
    r.positive("record", "sample_step_s", s.dt);
    s.polarimetry = read_measurement(r, s.polarimetry);
  }
  if (c.duration() / c.dt() > 1e7) r.fail(r.find("record", "duration_s"), "record has more than 1e7 samples");

  r.seed("waveform", "seed", c.waveform.seed);
  if (auto f = r.string("waveform", "file")) {
    c.waveform.file = resolve_relative(source, *f);
    c.waveform_digest = hex64(fnv1a(read_file(c.waveform.file)));
  }

  if (r.has("record", "snr") && r.has("record", "sigma"))
    r.fail(r.find("record", "sigma"), "give record.snr or record.sigma, not both");
  if (auto v = r.number("record", "snr")) {
    if (!(*v > 0.0)) r.fail(r.find("record", "snr"), "record.snr must be positive");
    c.record.snr = *v;
  }
  if (auto v = r.number("record", "sigma")) {
    if (*v < 0.0) r.fail(r.find("record", "sigma"), "record.sigma must be non-negative");
    c.record.sigma = *v;
    c.record.snr.reset();
  }
  r.seed("record", "noise_seed", c.record.noise_seed);
  r.boolean("record", "filter", c.record.filter);
  r.count("record", "filter_order", c.record.filter_order);
  r.positive("record", "filter_low_hz", c.record.filter_low_hz);
  r.positive("record", "filter_high_hz", c.record.filter_high_hz);
  if (c.record.filter && c.record.filter_high_hz >= 0.5 / c.dt())
    r.fail(r.find("record", "filter_high_hz"), "record.filter_high_hz must be below the Nyquist frequency");

  if (auto k = r.string("state", "kind")) {
    static const std::set<std::string> kinds = {"haar-pure", "hilbert-schmidt", "squeezed-cat", "spin-coherent", "file"};
    if (!kinds.count(*k)) r.fail(r.find("state", "kind"), "state.kind must be one of haar-pure, hilbert-schmidt, squeezed-cat, spin-coherent, file");
    c.state.kind = *k;
  }
  if (c.state.kind == "squeezed-cat" && kind != ScenarioKind::Full16)
    r.fail(r.find("state", "kind"), "squeezed-cat needs the full16-rfuw scenario");
  r.seed("state", "seed", c.state.seed);
  if (auto f = r.string("state", "file")) c.state.file = resolve_relative(source, *f);
  if (c.state.kind == "file" && c.state.file.empty()) r.fail(r.find("state", "kind"), "state.kind = \"file\" needs state.file");
  if (r.has("state", "axis")) {
    auto ax = r.numbers("state", "axis");
    if (ax.size() != 3 || Eigen::Vector3d(ax[0], ax[1], ax[2]).norm() == 0.0)
      r.fail(r.find("state", "axis"), "state.axis must be a non-zero 3-vector");
    c.state.axis = Eigen::Vector3d(ax[0], ax[1], ax[2]);
  }

  r.boolean("intensity", "enabled", c.intensity.enabled);
  if (auto s = r.string("intensity", "shape")) {
    if (*s != "gaussian" && *s != "spike") r.fail(r.find("intensity", "shape"), "intensity.shape must be gaussian or spike");
    c.intensity.shape = *s;
  }
  r.positive("intensity", "centre", c.intensity.centre);
  r.positive("intensity", "width", c.intensity.width);
  r.count("intensity", "knots", c.intensity.knots, 2);
  r.number("intensity", "xi_min", c.intensity.xi_min);
  r.number("intensity", "xi_max", c.intensity.xi_max);
  if (!(c.intensity.xi_min >= 0.0 && c.intensity.xi_max > c.intensity.xi_min))
    r.fail(r.find("intensity", "xi_max"), "intensity needs 0 <= xi_min < xi_max");

  r.positive("estimation", "rtol", c.estimation.rtol);
  r.count("estimation", "horizons", c.estimation.horizons, 0);
  r.positive("estimation", "first_horizon_s", c.estimation.first_horizon);
  r.positive("estimation", "barrier_mu_initial", c.estimation.projection.mu_initial);
  r.positive("estimation", "barrier_mu_final", c.estimation.projection.mu_final);
  r.count("estimation", "barrier_max_iterations", c.estimation.projection.max_total);

  if (auto f = r.string("calibration", "fit")) {
    if (*f != "scalar" && *f != "basis" && *f != "intensity" && *f != "refit")
      r.fail(r.find("calibration", "fit"), "calibration.fit must be scalar, basis, intensity or refit");
    c.calibration.fit = *f;
  }
  c.calibration.free = r.strings("calibration", "free");
  for (const auto& p : c.calibration.free)
    if (p != "omega_l" && p != "omega_lx" && p != "omega_ly" && p != "gamma_sc" && p != "t0")
      r.fail(r.find("calibration", "free"), "unknown free parameter '" + p + "' (omega_l, omega_lx, omega_ly, gamma_sc, t0)");
  if (auto m = r.string("calibration", "intensity_mode")) {
    if (*m != "free" && *m != "fixed-shape") r.fail(r.find("calibration", "intensity_mode"), "calibration.intensity_mode must be free or fixed-shape");
    c.calibration.intensity_mode = *m;
  }
  r.positive("calibration", "simplex_fraction", c.calibration.simplex_fraction);
  r.count("calibration", "max_evaluations", c.calibration.max_evaluations);
  if (auto v = r.number("calibration", "initial_larmor_x_hz")) c.calibration.larmor_x = *v * kTwoPi;
  if (auto v = r.number("calibration", "initial_larmor_y_hz")) c.calibration.larmor_y = *v * kTwoPi;
  if (auto v = r.number("calibration", "initial_gamma_sc_hz")) c.calibration.gamma_sc = *v * kTwoPi;
  if (auto v = r.number("calibration", "initial_time_origin_s")) c.calibration.t0 = *v;

  r.count("benchmark", "states", c.benchmark.states);
  r.seed("benchmark", "seed", c.benchmark.seed);
  c.benchmark.snr_sweep = r.numbers("benchmark", "snr_sweep");
  for (double v : c.benchmark.snr_sweep)
    if (!(v > 0.0)) r.fail(r.find("benchmark", "snr_sweep"), "benchmark.snr_sweep entries must be positive");
  return c;
}

Config load_config(const std::string& path) { return parse_config(read_file(path), path); }

}  // namespace spintomo

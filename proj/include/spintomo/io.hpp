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

#include "spintomo/calibration.hpp"
#include "spintomo/control.hpp"
#include "spintomo/estimation.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace spintomo {

using Metadata = std::map<std::string, std::string>;

// Refuses to replace existing files unless forced. Creates the directory.
class OutputDir {
 public:
  OutputDir(std::string dir, bool force);
  std::string path(const std::string& name) const;  // throws Io if it exists and !force
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  bool force_;
};

// "# key: value" header lines, then "t_s,value" and %.17g rows.
void write_record_csv(const std::string& path, const MeasurementRecord& rec, const Metadata& meta);
MeasurementRecord read_record_csv(const std::string& path, Metadata* meta = nullptr);

// Rows at every change point of either phase sequence.
void write_phase_waveform_csv(const std::string& path, const PhaseWaveform& w, const Metadata& meta);
PhaseWaveform read_phase_waveform_csv(const std::string& path, double duration, double rf_segment, double uw_segment);

void write_knots_csv(const std::string& path, const std::vector<double>& times, const std::vector<double>& values,
                     const Metadata& meta);
std::vector<double> read_knots_csv(const std::string& path, double spacing);

// {"d", "basis", "scenario_hash", "rho": [[[re, im], ...], ...]} in row-major order.
void write_state_json(const std::string& path, const CMatrix& rho, const std::string& basis_tag, const Metadata& meta);
CMatrix read_state_json(const std::string& path, std::string* basis_tag = nullptr, Metadata* meta = nullptr);

void write_fidelity_csv(const std::string& path, const std::vector<HorizonPoint>& points, const Metadata& meta);
void write_intensity_csv(const std::string& path, const IntensityDistribution& f, const Metadata& meta);
void write_json(const std::string& path, const nlohmann::ordered_json& j);
nlohmann::ordered_json read_json(const std::string& path);

nlohmann::ordered_json fit_report_json(const FitReport& r);

}  // namespace spintomo

// Copyright 2026 The hqsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace hqsim {

enum class SegmentKind { ramp, dwell, burst };

/// One piece of a detuning trajectory. Times in ns, energies in h*GHz,
/// frequencies in GHz. Only the fields relevant to `kind` are meaningful.
struct PulseSegment {
  SegmentKind kind = SegmentKind::dwell;
  double duration = 0.0;

  double eps_start = 0.0;  // ramp
  double eps_end = 0.0;    // ramp
  double eps = 0.0;        // dwell level, burst center

  double amplitude = 0.0;   // burst: detuning modulation amplitude A_eps
  double frequency = 0.0;   // burst: carrier f_mw
  double phase = 0.0;       // burst: carrier phase (rad)
  double edge_sigma = 0.0;  // burst: Gaussian edge width, 0 = rectangular

  static PulseSegment ramp(double eps_start, double eps_end, double duration);
  static PulseSegment dwell(double eps, double duration);
  static PulseSegment burst(double eps_center, double duration, double amplitude,
                            double frequency, double phase, double edge_sigma);

  /// Detuning without the ac term at local time t in [0, duration].
  double slow_detuning(double t) const;
  /// Full detuning including the carrier. The carrier phase is referenced to
  /// the start of the segment.
  double detuning(double t) const;
  /// Burst envelope in [0, 1]; 1 for other kinds.
  double envelope(double t) const;
  /// Smallest and largest detuning reachable inside the segment.
  std::pair<double, double> detuning_range() const;

  std::vector<std::string> errors() const;
  void validate() const;
};

using PulseProgram = std::vector<PulseSegment>;

/// Length of each Gaussian edge region as a multiple of sigma. At this
/// distance the edge has decayed below 1% of the peak.
inline constexpr double kEdgeSigmas = 3.035;

/// Sigma giving a 10-90% rise time `rise` for the Gaussian edge.
double edge_sigma_for_rise_time(double rise);

double program_duration(const PulseProgram& program);

nlohmann::json to_json(const PulseSegment& s);
PulseSegment segment_from_json(const nlohmann::json& j);
nlohmann::json program_to_json(const PulseProgram& program);
PulseProgram program_from_json(const nlohmann::json& j);

const char* to_string(SegmentKind kind);

}  // namespace hqsim

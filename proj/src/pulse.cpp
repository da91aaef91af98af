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

#include "hqsim/pulse.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "hqsim/error.hpp"
#include "hqsim/units.hpp"

namespace hqsim {

PulseSegment PulseSegment::ramp(double eps_start, double eps_end, double duration) {
  PulseSegment s;
  s.kind = SegmentKind::ramp;
  s.eps_start = eps_start;
  s.eps_end = eps_end;
  s.duration = duration;
  return s;
}

PulseSegment PulseSegment::dwell(double eps, double duration) {
  PulseSegment s;
  s.kind = SegmentKind::dwell;
  s.eps = eps;
  s.duration = duration;
  return s;
}

PulseSegment PulseSegment::burst(double eps_center, double duration, double amplitude,
                                 double frequency, double phase, double edge_sigma) {
  PulseSegment s;
  s.kind = SegmentKind::burst;
  s.eps = eps_center;
  s.duration = duration;
  s.amplitude = amplitude;
  s.frequency = frequency;
  s.phase = phase;
  s.edge_sigma = edge_sigma;
  return s;
}

double PulseSegment::slow_detuning(double t) const {
  switch (kind) {
    case SegmentKind::ramp:
      return eps_start + (eps_end - eps_start) * (t / duration);
    case SegmentKind::dwell:
    case SegmentKind::burst:
      return eps;
  }
  return eps;
}

double PulseSegment::envelope(double t) const {
  if (kind != SegmentKind::burst || edge_sigma <= 0.0) return 1.0;
  const double edge = kEdgeSigmas * edge_sigma;
  auto g = [&](double s) {
    if (s >= edge) return 1.0;
    const double d = (s - edge) / edge_sigma;
    return std::exp(-0.5 * d * d);
  };
  return g(t) * g(duration - t);
}

double PulseSegment::detuning(double t) const {
  const double slow = slow_detuning(t);
  if (kind != SegmentKind::burst || amplitude == 0.0) return slow;
  return slow + amplitude * envelope(t) * std::cos(units::kTwoPi * frequency * t + phase);
}

std::pair<double, double> PulseSegment::detuning_range() const {
  switch (kind) {
    case SegmentKind::ramp:
      return {std::min(eps_start, eps_end), std::max(eps_start, eps_end)};
    case SegmentKind::dwell:
      return {eps, eps};
    case SegmentKind::burst:
      return {eps - std::abs(amplitude), eps + std::abs(amplitude)};
  }
  return {eps, eps};
}

std::vector<std::string> PulseSegment::errors() const {
  std::vector<std::string> out;
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    out.push_back(fmt::format("{} segment duration must be > 0 (got {})", to_string(kind), duration));
  }
  if (kind == SegmentKind::burst) {
    if (!(edge_sigma >= 0.0)) out.push_back(fmt::format("edge_sigma must be >= 0 (got {})", edge_sigma));
    if (!(frequency >= 0.0)) out.push_back(fmt::format("drive frequency must be >= 0 (got {})", frequency));
    if (!std::isfinite(amplitude) || !std::isfinite(phase)) out.push_back("non-finite burst parameter");
  }
  if (!std::isfinite(eps) || !std::isfinite(eps_start) || !std::isfinite(eps_end)) {
    out.push_back("non-finite detuning");
  }
  return out;
}

void PulseSegment::validate() const {
  const auto errs = errors();
  if (!errs.empty()) throw ConfigError(errs.front());
}

double edge_sigma_for_rise_time(double rise) {
  // Gaussian edge: level x reached at distance sigma*sqrt(-2 ln x) from the top.
  const double span = std::sqrt(-2.0 * std::log(0.1)) - std::sqrt(-2.0 * std::log(0.9));
  return rise / span;
}

double program_duration(const PulseProgram& program) {
  double total = 0.0;
  for (const auto& s : program) total += s.duration;
  return total;
}

const char* to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::ramp:
      return "ramp";
    case SegmentKind::dwell:
      return "dwell";
    case SegmentKind::burst:
      return "burst";
  }
  return "?";
}

nlohmann::json to_json(const PulseSegment& s) {
  nlohmann::json j;
  j["kind"] = to_string(s.kind);
  j["duration_ns"] = s.duration;
  switch (s.kind) {
    case SegmentKind::ramp:
      j["eps_start_hghz"] = s.eps_start;
      j["eps_end_hghz"] = s.eps_end;
      break;
    case SegmentKind::dwell:
      j["eps_hghz"] = s.eps;
      break;
    case SegmentKind::burst:
      j["eps_center_hghz"] = s.eps;
      j["amplitude_hghz"] = s.amplitude;
      j["frequency_ghz"] = s.frequency;
      j["phase_rad"] = s.phase;
      j["edge_sigma_ns"] = s.edge_sigma;
      break;
  }
  return j;
}

namespace {

double required_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(fmt::format("segment is missing key '{}'", key));
  if (!j.at(key).is_number()) throw ConfigError(fmt::format("segment key '{}' must be a number", key));
  return j.at(key).get<double>();
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(fmt::format("unknown segment key '{}'", key));
  }
}

}  // namespace

PulseSegment segment_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("segment must be a JSON object");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError("segment needs a string 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  PulseSegment s;
  if (kind == "ramp") {
    reject_unknown(j, {"kind", "duration_ns", "eps_start_hghz", "eps_end_hghz"});
    s = PulseSegment::ramp(required_number(j, "eps_start_hghz"), required_number(j, "eps_end_hghz"),
                           required_number(j, "duration_ns"));
  } else if (kind == "dwell") {
    reject_unknown(j, {"kind", "duration_ns", "eps_hghz"});
    s = PulseSegment::dwell(required_number(j, "eps_hghz"), required_number(j, "duration_ns"));
  } else if (kind == "burst") {
    reject_unknown(j, {"kind", "duration_ns", "eps_center_hghz", "amplitude_hghz", "frequency_ghz",
                       "phase_rad", "edge_sigma_ns"});
    s = PulseSegment::burst(required_number(j, "eps_center_hghz"), required_number(j, "duration_ns"),
                            required_number(j, "amplitude_hghz"), required_number(j, "frequency_ghz"),
                            j.contains("phase_rad") ? required_number(j, "phase_rad") : 0.0,
                            j.contains("edge_sigma_ns") ? required_number(j, "edge_sigma_ns") : 0.0);
  } else {
    throw ConfigError(fmt::format("unknown segment kind '{}'", kind));
  }
  s.validate();
  return s;
}

nlohmann::json program_to_json(const PulseProgram& program) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : program) arr.push_back(to_json(s));
  return arr;
}

PulseProgram program_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("pulse program must be a JSON array");
  PulseProgram p;
  for (const auto& item : j) p.push_back(segment_from_json(item));
  return p;
}

}  // namespace hqsim

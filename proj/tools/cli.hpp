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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hqsim/dynamics.hpp"
#include "hqsim/error.hpp"
#include "hqsim/fci.hpp"
#include "hqsim/model.hpp"
#include "hqsim/readout.hpp"
#include "json.hpp"

namespace hqsim::cli {

/// One documented config key. `path` is dotted, e.g. "readout.tau_in_us".
struct KeyInfo {
  std::string path;
  std::string type;
  std::string unit;
  std::string default_value;
  std::string description;
};

const std::vector<KeyInfo>& config_keys();

/// Help text listing every config key with type, unit and default.
std::string config_reference();

struct Diagnostic {
  std::string key;
  std::string message;
  bool io = false;  ///< a referenced file could not be read
};

/// Schema violation tied to a config key.
class SchemaError : public ConfigError {
 public:
  SchemaError(std::string key, const std::string& message) : ConfigError(message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct SpectrumSection {
  double eps_min = -300.0;
  double eps_max = 300.0;
  int n_points = 601;
};

struct DriveSection {
  std::optional<double> eps;   ///< default: sweet spot
  std::optional<double> f_mw;  ///< default: qubit splitting at eps
  double amplitude = 4.0;
  double edge_rise = 1.0;  ///< 10-90 % rise of the Gaussian edge, 0 = rectangular
};

struct RabiSection {
  DriveSection drive;
  double phase = 0.0;
  double tau_max = 24.0;
  double tau_step = 0.2;
  std::vector<double> amplitudes = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
};

struct RamseySection {
  DriveSection drive;
  double ramp = 1.0;
  std::vector<double> eps_p = {-200.0, -160.0, -120.0, -80.0, -40.0};
  double te_step = 0.05;
  int te_count = 400;
  double t2_target = 0.0;  ///< > 0: calibrate sigma_eps first
  double calibration_eps_p = -80.0;
};

struct TomoSection {
  DriveSection drive{std::nullopt, std::nullopt, 2.0, 1.0};
  int n_phi = 24;
};

struct TracesSection {
  int n_traces = 1000;
  double p1_true = 0.5;
  int export_count = 8;
  bool binary_frame = true;
};

struct FidelitySection {
  int n_traces = 8000;
  double p1_true = 0.5;
};

struct PotentialSection {
  std::string kind = "gaussian";
  int nx = 64;
  int ny = 64;
  double half_width_x = 200.0;
  double half_width_y = 90.0;
  double v0 = 1.0;
  double sigma_x = 77.0;
  double sigma_y = 20.0;
  double hw_x = 1.0;
  double hw_y = 1.0;
  std::string path;  ///< resolved against the config file's directory
};

struct FciSection {
  PotentialSection potential;
  fci::Material material;
  int n_spatial = 20;
  std::vector<double> lambda_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double regularization = 0.0;
  int k_lowest = 8;
};

struct Config {
  std::uint64_t seed = 0;
  ModelParams model;
  NoiseModel noise;
  IntegratorOptions integrator;
  SpectrumSection spectrum;
  RabiSection rabi;
  RamseySection ramsey;
  TomoSection tomo;
  readout::TraceConfig readout;
  TracesSection traces;
  FidelitySection fidelity;
  FciSection fci;
  std::filesystem::path base_dir;
};

/// Reads and parses a JSON file. Unreadable file -> IoError, malformed JSON
/// -> ConfigError.
nlohmann::json load_json(const std::filesystem::path& path);

/// Strict schema check (unknown keys, types) followed by physical-range
/// checks. Empty means valid.
std::vector<Diagnostic> validate(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Parses a document that passed validate(); throws SchemaError otherwise.
Config parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

fci::PotentialGrid build_potential(const FciSection& section);

/// Machine-readable error document {error_code, message, context}.
nlohmann::json error_json(const std::string& code, const std::string& message,
                          nlohmann::json context = nlohmann::json::object());

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

/// Full command-line entry point. Artifacts go to --out; a JSON run record
/// goes to `out`, error JSON to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hqsim::cli

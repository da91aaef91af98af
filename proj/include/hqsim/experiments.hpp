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

#include "hqsim/dynamics.hpp"
#include "hqsim/fitting.hpp"
#include "json.hpp"

namespace hqsim {

/// P1 on a 1-D axis or a 2-D (x, y) grid. For 2-D, p1[ix * y.size() + iy].
struct ScanResult {
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> p1;
  nlohmann::json metadata = nlohmann::json::object();

  bool is_2d() const { return !y.empty(); }
  double at(std::size_t ix, std::size_t iy = 0) const { return p1[ix * (is_2d() ? y.size() : 1) + iy]; }
  /// `axis,p1` for 1-D, `x,y,p1` long form for 2-D.
  std::string to_csv() const;
};

/// Clips a P1 value to [0, 1]; values further than 1e-6 outside are an
/// integration failure.
double clip_probability(double p);

struct OperatingPoint {
  double eps = 0.0;
  double f_qubit = 0.0;
};

/// First-order insensitive point: minimum of the qubit splitting on the
/// (2,1) side of the anticrossing.
OperatingPoint sweet_spot(const ModelParams& params);

/// Default Gaussian edge giving a 1 ns 10-90% rise.
double default_edge_sigma();

/// Microwave burst parameters shared by the scans.
struct DriveSpec {
  double eps = 0.0;        ///< operation detuning
  double f_mw = 0.0;       ///< carrier frequency (GHz)
  double amplitude = 0.0;  ///< A_eps (h*GHz)
  double edge_sigma = 0.0; ///< ns
};

/// Resonant Rabi frequency in the rotating-wave picture, A * |<0|dH/deps|1>|.
double rwa_rabi_frequency(const DriveSpec& drive, const ModelParams& params);

/// Noise-free burst duration that brings P1 from 0 to `target_p1` on the
/// first rising half-period (0.5 for a pi/2 pulse, 1 for pi).
double calibrate_rotation(const DriveSpec& drive, double target_p1, const ModelParams& params,
                          const IntegratorOptions& opts = {});

struct RabiSpec {
  double eps = 0.0;
  double f_mw = 0.0;
  double edge_sigma = 0.0;
  double phase = 0.0;
  std::vector<double> tau_grid;
  std::vector<double> amplitude_grid;
};

struct RabiRow {
  double amplitude = 0.0;
  double f_rabi = 0.0;
  double fit_amplitude = 0.0;
  double rwa_f_rabi = 0.0;
  bool flagged = false;  ///< oscillation amplitude below 0.05, fit unreliable
};

struct RabiResult {
  ScanResult scan;  ///< x = tau (ns), y = amplitude (h*GHz)
  std::vector<RabiRow> rows;
  fit::LinearFit linear;  ///< f_rabi vs amplitude over the linear regime
  int linear_points = 0;
};

RabiResult rabi_scan(const RabiSpec& spec, const ModelParams& params, const NoiseModel& noise,
                     const IntegratorOptions& opts = {});

struct RamseySpec {
  DriveSpec drive;
  double pi_half_duration = 0.0;
  double ramp_time = 1.0;  ///< ns, between eps_op and eps_p
  std::vector<double> eps_p_grid;
  double te_step = 0.05;
  int te_count = 400;
};

struct RamseyRow {
  double eps_p = 0.0;
  double fft_peak = 0.0;
  double f_expected = 0.0;
  double bin_width = 0.0;
};

struct RamseyResult {
  ScanResult scan;  ///< x = eps_p, y = t_e
  std::vector<RamseyRow> rows;
};

/// Pulse sequence X_pi/2, ramp to eps_p, wait te, ramp back, X_pi/2. Returns
/// P1(te) on the te grid k * te_step.
std::vector<double> ramsey_trace(const RamseySpec& spec, double eps_p, const ModelParams& params,
                                 const NoiseModel& noise, const IntegratorOptions& opts = {});

/// Carrier phase of the second pi/2 pulse. Tracks the qubit frame through
/// both ramps so that only the dwell at eps_p contributes phase: te = 0 is
/// the back-to-back X_pi composite.
double ramsey_frame_phase(const RamseySpec& spec, double eps_p, const ModelParams& params);

/// Explicit program of the Ramsey sequence for one dwell time.
PulseProgram ramsey_program(const RamseySpec& spec, double eps_p, double te, const ModelParams& params);

RamseyResult ramsey_scan(const RamseySpec& spec, const ModelParams& params, const NoiseModel& noise,
                         const IntegratorOptions& opts = {});

/// Gaussian-envelope fit of a Ramsey trace; decay_time is the 1/e time.
fit::DampedSinusoidFit fit_ramsey_envelope(const RamseySpec& spec, std::span<const double> p1,
                                           double f_guess);

struct T2Calibration {
  double sigma_eps = 0.0;
  double t2_star = 0.0;
  int evaluations = 0;
  fit::DampedSinusoidFit fit;
};

/// Bisection on log(sigma_eps) until the Ramsey envelope at eps_p decays with
/// 1/e time `target_t2` (ns).
T2Calibration calibrate_sigma_eps(const RamseySpec& spec, double eps_p, double target_t2,
                                  const ModelParams& params, const NoiseModel& noise,
                                  const IntegratorOptions& opts = {}, double rel_tol = 0.01);

enum class Preparation { plus_y, minus_y };

struct TomographySpec {
  DriveSpec drive;
  double pi_half_duration = 0.0;
  std::vector<double> phi_grid;
};

struct TomographyResult {
  ScanResult plus_y;
  ScanResult minus_y;
  fit::PhaseFit fit_plus;
  fit::PhaseFit fit_minus;
  /// |wrap(phase_plus - phase_minus)|, pi for out-of-phase traces.
  double phase_difference = 0.0;
};

/// Preparation pulse carrier phase: pi for +Y, 0 for -Y.
double preparation_phase(Preparation prep);

ScanResult tomography_trace(const TomographySpec& spec, Preparation prep, const ModelParams& params,
                            const NoiseModel& noise, const IntegratorOptions& opts = {});

TomographyResult tomography_scan(const TomographySpec& spec, const ModelParams& params,
                                 const NoiseModel& noise, const IntegratorOptions& opts = {});

struct RampBudgetSpec {
  double eps_measure = 200.0;
  double eps_operation = 0.0;
  double ramp_in_duration = 20.0;
  double eps_intermediate = 100.0;
  double stage1_duration = 4.0;
  double stage2_duration = 2.0;
};

struct RampBudget {
  double leakage_in = 0.0;
  double relaxation_out = 0.0;
  double lz_probability = 0.0;
  double lz_from_ground = 0.0;
  double lz_from_excited = 0.0;
};

/// Adiabaticity time scale of a linear sweep between eps_a and eps_b:
/// max over the sweep of |<i|dH/deps|j>| |eps_b - eps_a| / (2 pi (E_j - E_i)^2)
/// for i below and j at or above `n_lower`.
double adiabatic_time_scale(double eps_a, double eps_b, const ModelParams& params, int n_lower = 2,
                            int samples = 4001);

RampBudget ramp_error_budget(const RampBudgetSpec& spec, const ModelParams& params,
                             const NoiseModel& noise, const IntegratorOptions& opts = {});

nlohmann::json to_json(const ModelParams& params);
nlohmann::json to_json(const NoiseModel& noise);

}  // namespace hqsim

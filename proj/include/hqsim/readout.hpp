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
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hqsim/parallel.hpp"
#include "json.hpp"

namespace hqsim::readout {

/// Single-shot readout window and detector chain. Times in us, rates in MHz,
/// signal levels dimensionless.
struct TraceConfig {
  double t_meas = 140.0;
  double internal_rate = 10.0;
  double detector_rate = 1.0;
  double tau_out = 2.04;
  double tau_in = 32.0;
  double t1_meas = 102.0;          ///< may be +inf (no relaxation)
  double p_thermal_window = 0.04;  ///< probability of >= 1 thermal blip per window
  double level_base = 0.0;
  double level_blip = -1.0;
  double t_integration = 1.0;
  double snr_sigma_ratio = 5.0;  ///< |blip - base| / sigma_eff; +inf = noiseless
  std::uint64_t seed = 0;

  std::vector<std::string> errors() const;
  void validate() const;

  double separation() const;
  /// Noise standard deviation after the boxcar filter.
  double sigma_eff() const;
  /// Per internal sample noise: sigma_eff * sqrt(boxcar length in samples).
  double sigma_sample() const;
  int internal_samples() const;
  int boxcar_length() const;
  int decimation() const;
  int detector_samples() const;
  /// Time stamp of detector sample j: end of its integration window.
  double detector_time(int j) const;
  /// Poisson rate of thermal tunnel-out events (1/us).
  double thermal_rate() const;
};

enum class Label : std::uint8_t { state0 = 0, state1 = 1 };

/// One rectangular tunneling peak. `end` is clipped to t_meas when the
/// electron has not tunneled back in by the end of the window.
struct Blip {
  double start = 0.0;
  double end = 0.0;
  bool complete = true;  ///< tunnel-in happened inside the window
};

struct EventRecord {
  Label label = Label::state0;
  std::vector<Blip> blips;
  /// State-1 only: the excited state relaxed before tunneling out.
  bool relaxed = false;
};

/// Draws the tunneling events of one trace. State 1: tunnel-out and
/// relaxation compete as exponential clocks; a blip occurs iff t_tun <
/// min(t_relax, t_meas). State 0: thermal tunnel-out as a Poisson process
/// whose clock runs only while the electron is in the dot.
EventRecord generate_events(Label label, const TraceConfig& config, std::mt19937_64& rng);

/// Tunnel-out and tunnel-in times; tunnel_in is NaN when absent.
struct TunnelEvent {
  double tunnel_out = 0.0;
  double tunnel_in = 0.0;
};

struct Trace {
  Label label = Label::state0;
  std::vector<double> samples;  ///< filtered, detector rate
  std::vector<TunnelEvent> events;
  bool had_blip = false;

  double min_value() const;
};

/// Rectangular signal at the internal rate, Gaussian noise, causal boxcar of
/// t_integration, decimation to the detector rate.
Trace synthesize_trace(const EventRecord& events, const TraceConfig& config, std::mt19937_64& rng);

struct Detection {
  bool bit = false;
  std::optional<double> first_cross_time;
  std::optional<double> recross_time;
};

/// FPGA-style threshold detector: bit 1 as soon as a sample falls below the
/// threshold.
Detection detect(const Trace& trace, double threshold, const TraceConfig& config);

struct TraceBatch {
  TraceConfig config;
  double p1_true = 0.0;
  std::vector<Trace> traces;

  std::size_t count(Label label) const;
};

/// Trace i draws its label, events and noise from RNG stream (seed, i).
TraceBatch generate_batch(const TraceConfig& config, int n_traces, double p1_true,
                          Execution exec = Execution::parallel);

struct ExponentialFit {
  double tau = 0.0;
  double std_error = 0.0;
  int n_events = 0;    ///< uncensored events in the fit
  int n_censored = 0;  ///< events still running at the window end
};

struct Histogram {
  double bin_width = 0.0;
  double origin = 0.0;
  std::vector<int> counts;
};

struct TunnelTimes {
  Histogram out_hist;
  Histogram in_hist;
  ExponentialFit tau_out;
  ExponentialFit tau_in;
};

/// Levels are fractions of the way from level_base to level_blip; times in us.
struct TunnelFitOptions {
  double out_level = 0.75;
  double out_cutoff = 4.0;
  double out_window = 20.0;
  double in_enter = 0.75;
  double in_leave = 0.25;
  double in_cutoff = 2.0;
};

/// Tunnel-time MLE. Tunnel-out: first sample of a state-1 trace past
/// out_level. Tunnel-in: blip durations from a hysteresis detector (enter past
/// in_enter, leave below in_leave) so single noisy samples do not split a
/// blip. Both use the memoryless property of the exponential on the
/// detector's time grid: counts past a cutoff are geometric once the cutoff
/// exceeds the detector's own delay. The tunnel-out fit is restricted to
/// [out_cutoff, out_cutoff + out_window) so that rare noise triggers spread
/// over the whole window carry no weight; tunnel-in durations are
/// right-censored at the window end.
TunnelTimes tunnel_time_histograms(const TraceBatch& batch, const TunnelFitOptions& options = {});

struct FidelityReport {
  Histogram histogram_0;
  Histogram histogram_1;
  std::vector<double> thresholds;
  std::vector<double> f0;
  std::vector<double> f1;
  std::vector<double> visibility;
  double v_opt = 0.0;
  double f0_opt = 0.0;
  double f1_opt = 0.0;
  double visibility_opt = 0.0;

  std::string to_csv() const;
  nlohmann::json summary() const;
};

/// Threshold grid spanning both levels +- 4 sigma_eff in steps of sigma_eff/5.
std::vector<double> default_threshold_grid(const TraceConfig& config);

/// F0(V) = fraction of state-0 minima >= V, F1(V) = fraction of state-1
/// minima < V, visibility = F0 + F1 - 1. V_opt is the smallest threshold
/// reaching the maximum visibility.
FidelityReport fidelity_report(const TraceBatch& batch, std::span<const double> thresholds);

struct P1Estimate {
  double raw = 0.0;
  double corrected = 0.0;  ///< (raw - (1 - F0)) / (F0 + F1 - 1), clipped
  int n = 0;
};

P1Estimate estimate_p1(std::span<const std::uint8_t> bits, double f0 = 1.0, double f1 = 1.0);
P1Estimate estimate_p1(const TraceBatch& batch, double threshold, double f0 = 1.0, double f1 = 1.0);

/// `t_us,value` rows for one trace.
std::string trace_csv(const Trace& trace, const TraceConfig& config);

/// Binary batch frame (little-endian): "HQTR", u32 version, u32 n_traces,
/// u32 samples_per_trace, f64 dt_us, then per trace u8 label, u8 had_blip,
/// f64 tunnel_out, f64 tunnel_in (NaN if absent), f32 samples.
void write_frame(std::ostream& os, const TraceBatch& batch);
TraceBatch read_frame(std::istream& is);

inline constexpr std::uint32_t kFrameVersion = 1;

nlohmann::json to_json(const TraceConfig& config);

}  // namespace hqsim::readout

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

#include "hqsim/readout.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include "hqsim/error.hpp"
#include "hqsim/fitting.hpp"

namespace hqsim::readout {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double draw_exp(double mean, std::mt19937_64& rng) {
  if (!std::isfinite(mean)) return std::numeric_limits<double>::infinity();
  return std::exponential_distribution<double>(1.0 / mean)(rng);
}

}  // namespace

// ---------------------------------------------------------------- TraceConfig

std::vector<std::string> TraceConfig::errors() const {
  std::vector<std::string> out;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || std::isnan(v)) out.push_back(fmt::format("{} must be > 0 (got {})", name, v));
  };
  positive(t_meas, "t_meas_us");
  positive(internal_rate, "internal_rate_mhz");
  positive(detector_rate, "detector_rate_mhz");
  positive(tau_out, "tau_out_us");
  positive(tau_in, "tau_in_us");
  positive(t1_meas, "t1_meas_us");
  positive(t_integration, "t_integration_us");
  positive(snr_sigma_ratio, "snr_sigma_ratio");
  for (double v : {t_meas, internal_rate, detector_rate, tau_out, tau_in, t_integration}) {
    if (std::isinf(v)) {
      out.push_back("window, rates, tunnel times and integration time must be finite");
      break;
    }
  }
  if (std::isfinite(t_meas) && std::isfinite(tau_in) && !(t_meas > tau_in)) {
    out.push_back(fmt::format("t_meas_us ({}) must exceed tau_in_us ({})", t_meas, tau_in));
  }
  if (!(internal_rate >= detector_rate)) out.push_back("internal_rate_mhz must be >= detector_rate_mhz");
  if (!(p_thermal_window >= 0.0 && p_thermal_window < 1.0)) {
    out.push_back(fmt::format("p_thermal_window must be in [0, 1) (got {})", p_thermal_window));
  }
  if (!std::isfinite(level_base) || !std::isfinite(level_blip) || level_base == level_blip) {
    out.push_back("signal levels must be finite and distinct");
  }
  if (out.empty()) {
    const double ratio = internal_rate / detector_rate;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
      out.push_back("internal_rate_mhz must be an integer multiple of detector_rate_mhz");
    }
    if (boxcar_length() < 1) out.push_back("t_integration_us is shorter than one internal sample");
    if (detector_samples() < 1) out.push_back("measurement window shorter than one detector sample");
  }
  return out;
}

void TraceConfig::validate() const {
  const auto errs = errors();
  if (!errs.empty()) throw ConfigError(errs.front());
}

double TraceConfig::separation() const { return std::abs(level_blip - level_base); }

double TraceConfig::sigma_eff() const {
  return std::isinf(snr_sigma_ratio) ? 0.0 : separation() / snr_sigma_ratio;
}

double TraceConfig::sigma_sample() const { return sigma_eff() * std::sqrt(static_cast<double>(boxcar_length())); }

int TraceConfig::internal_samples() const { return static_cast<int>(std::llround(t_meas * internal_rate)); }

int TraceConfig::boxcar_length() const { return static_cast<int>(std::llround(t_integration * internal_rate)); }

int TraceConfig::decimation() const { return static_cast<int>(std::llround(internal_rate / detector_rate)); }

int TraceConfig::detector_samples() const { return internal_samples() / decimation(); }

double TraceConfig::detector_time(int j) const {
  return static_cast<double>((j + 1) * decimation()) / internal_rate;
}

double TraceConfig::thermal_rate() const { return -std::log1p(-p_thermal_window) / t_meas; }

// ------------------------------------------------------------------- events

EventRecord generate_events(Label label, const TraceConfig& config, std::mt19937_64& rng) {
  EventRecord rec;
  rec.label = label;
  auto add_blip = [&](double start) {
    const double end = start + draw_exp(config.tau_in, rng);
    if (end < config.t_meas) {
      rec.blips.push_back({start, end, true});
    } else {
      rec.blips.push_back({start, config.t_meas, false});
    }
    return end;
  };
  if (label == Label::state1) {
    const double t_tun = draw_exp(config.tau_out, rng);
    const double t_relax = draw_exp(config.t1_meas, rng);
    if (t_tun < std::min(t_relax, config.t_meas)) {
      add_blip(t_tun);
    } else {
      rec.relaxed = t_relax <= t_tun && t_relax < config.t_meas;
    }
    return rec;
  }
  const double rate = config.thermal_rate();
  if (!(rate > 0.0)) return rec;
  double t = 0.0;
  while (true) {
    t += std::exponential_distribution<double>(rate)(rng);
    if (t >= config.t_meas) break;
    t = add_blip(t);
    if (t >= config.t_meas) break;
  }
  return rec;
}

// ------------------------------------------------------------------- traces

double Trace::min_value() const {
  if (samples.empty()) throw AnalysisError("empty trace");
  return *std::min_element(samples.begin(), samples.end());
}

Trace synthesize_trace(const EventRecord& events, const TraceConfig& config, std::mt19937_64& rng) {
  const int n_int = config.internal_samples();
  const int len = config.boxcar_length();
  const int dec = config.decimation();
  const double sigma = config.sigma_sample();

  std::vector<double> raw(n_int, config.level_base);
  for (const auto& b : events.blips) {
    // internal sample k sits at t = k / rate
    const int k0 = std::max(0, static_cast<int>(std::ceil(b.start * config.internal_rate)));
    const int k1 = std::min(n_int, static_cast<int>(std::ceil(b.end * config.internal_rate)));
    for (int k = k0; k < k1; ++k) raw[k] = config.level_blip;
  }
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : raw) v += noise(rng);
  }

  Trace tr;
  tr.label = events.label;
  tr.had_blip = !events.blips.empty();
  for (const auto& b : events.blips) tr.events.push_back({b.start, b.complete ? b.end : kNaN});
  const int n_det = config.detector_samples();
  tr.samples.resize(n_det);
  for (int j = 0; j < n_det; ++j) {
    // causal boxcar ending at the decimation point
    const int hi = (j + 1) * dec;
    const int lo = std::max(0, hi - len);
    double s = 0.0;
    for (int k = lo; k < hi; ++k) s += raw[k];
    tr.samples[j] = s / (hi - lo);
  }
  return tr;
}

Detection detect(const Trace& trace, double threshold, const TraceConfig& config) {
  Detection d;
  const int n = static_cast<int>(trace.samples.size());
  int j = 0;
  while (j < n && !(trace.samples[j] < threshold)) ++j;
  if (j == n) return d;
  d.bit = true;
  d.first_cross_time = config.detector_time(j);
  for (++j; j < n; ++j) {
    if (trace.samples[j] >= threshold) {
      d.recross_time = config.detector_time(j);
      break;
    }
  }
  return d;
}

// -------------------------------------------------------------------- batch

std::size_t TraceBatch::count(Label label) const {
  return static_cast<std::size_t>(
      std::count_if(traces.begin(), traces.end(), [&](const Trace& t) { return t.label == label; }));
}

TraceBatch generate_batch(const TraceConfig& config, int n_traces, double p1_true, Execution exec) {
  config.validate();
  if (n_traces < 1) throw ConfigError(fmt::format("n_traces must be >= 1 (got {})", n_traces));
  if (!(p1_true >= 0.0 && p1_true <= 1.0)) throw ConfigError(fmt::format("p1_true must be in [0, 1] (got {})", p1_true));
  TraceBatch batch;
  batch.config = config;
  batch.p1_true = p1_true;
  batch.traces.resize(n_traces);
  parallel::for_tasks(n_traces, exec, [&](int i) {
    auto rng = parallel::stream_rng(config.seed, static_cast<std::uint64_t>(i));
    const double u = std::generate_canonical<double, 53>(rng);
    const Label label = u < p1_true ? Label::state1 : Label::state0;
    batch.traces[i] = synthesize_trace(generate_events(label, config, rng), config, rng);
  });
  return batch;
}

// ------------------------------------------------------------- tunnel times

namespace {

// Geometric MLE on the detector grid: `steps` survived intervals in total,
// `n` terminations observed.
ExponentialFit geometric_fit(double steps, int n, int n_censored, double dt) {
  ExponentialFit f;
  f.n_events = n;
  f.n_censored = n_censored;
  if (n < 1 || !(steps > 0.0)) throw StatisticsError("no events past the fit cutoff");
  const double q = steps / (steps + n);
  f.tau = -dt / std::log(q);
  f.std_error = f.tau / std::sqrt(static_cast<double>(n));
  return f;
}

// Same, for counts k in [0, K) only: likelihood (1-q) q^k / (1 - q^K).
ExponentialFit truncated_geometric_fit(double steps, int n, int k_max, double dt) {
  if (n < 1 || !(steps > 0.0)) throw StatisticsError("no events inside the fit window");
  auto nll = [&](double log_tau) {
    const double q = std::exp(-dt / std::exp(log_tau));
    return -(n * std::log1p(-q) + steps * std::log(q) - n * std::log1p(-std::pow(q, k_max)));
  };
  ExponentialFit f;
  f.n_events = n;
  f.tau = std::exp(fit::golden_section(nll, std::log(dt / 50.0), std::log(dt * 1e4), 1e-12));
  f.std_error = f.tau / std::sqrt(static_cast<double>(n));
  return f;
}

void add_to(Histogram& h, double value) {
  const auto bin = static_cast<std::size_t>(std::floor((value - h.origin) / h.bin_width + 1e-9));
  if (bin >= h.counts.size()) h.counts.resize(bin + 1, 0);
  ++h.counts[bin];
}

}  // namespace

TunnelTimes tunnel_time_histograms(const TraceBatch& batch, const TunnelFitOptions& opt) {
  const auto& cfg = batch.config;
  const double dt = 1.0 / cfg.detector_rate;
  const double t_last = cfg.detector_time(cfg.detector_samples() - 1);
  const double span = cfg.level_blip - cfg.level_base;
  // position between the levels: 0 at base, 1 at blip
  auto u = [&](double s) { return (s - cfg.level_base) / span; };
  const double out_cutoff = opt.out_cutoff;
  const double in_cutoff = opt.in_cutoff;
  const int out_bins = static_cast<int>(std::llround(opt.out_window / dt));
  if (out_bins < 2) throw ConfigError("tunnel-out fit window must span at least two detector samples");

  TunnelTimes out;
  out.out_hist = {dt, 0.0, {}};
  out.in_hist = {dt, 0.0, {}};
  double out_steps = 0.0;
  int out_n = 0;
  double in_steps = 0.0;
  int in_n = 0;
  int in_censored = 0;
  int detected = 0;
  for (const auto& tr : batch.traces) {
    const int n = static_cast<int>(tr.samples.size());
    if (tr.label == Label::state1) {
      for (int j = 0; j < n; ++j) {
        if (u(tr.samples[j]) > opt.out_level) {
          const double t = cfg.detector_time(j);
          add_to(out.out_hist, t);
          const double k = std::round((t - out_cutoff) / dt);
          if (k >= 0.0 && k < out_bins) {
            out_steps += k;
            ++out_n;
          }
          break;
        }
      }
    }
    bool inside = false;
    bool seen = false;
    double t_entry = 0.0;
    for (int j = 0; j < n; ++j) {
      const double x = u(tr.samples[j]);
      const double t = cfg.detector_time(j);
      if (!inside && x > opt.in_enter) {
        inside = true;
        t_entry = t;
        if (!seen) ++detected;
        seen = true;
      } else if (inside && x < opt.in_leave) {
        inside = false;
        const double d = t - t_entry;
        add_to(out.in_hist, d);
        if (d >= in_cutoff - 1e-9) {
          in_steps += std::round((d - in_cutoff) / dt);
          ++in_n;
        }
      }
    }
    if (inside) {
      // exit stamp lies beyond the last sample
      const double survived = std::round((t_last + dt - t_entry - in_cutoff) / dt);
      if (survived >= 0.0) {
        in_steps += survived;
        ++in_censored;
      }
    }
  }
  if (detected < 100) {
    throw StatisticsError(fmt::format("only {} detected blips; need at least 100", detected));
  }
  out.tau_out = truncated_geometric_fit(out_steps, out_n, out_bins, dt);
  out.tau_in = geometric_fit(in_steps, in_n, in_censored, dt);
  return out;
}

// ----------------------------------------------------------------- fidelity

std::vector<double> default_threshold_grid(const TraceConfig& config) {
  const double sig = config.sigma_eff() > 0.0 ? config.sigma_eff() : config.separation() / 20.0;
  const double step = sig / 5.0;
  const double lo = std::min(config.level_base, config.level_blip) - 4.0 * sig;
  const double hi = std::max(config.level_base, config.level_blip) + 4.0 * sig;
  const int n = static_cast<int>(std::ceil((hi - lo) / step));
  std::vector<double> grid(n + 1);
  for (int i = 0; i <= n; ++i) grid[i] = lo + i * step;
  return grid;
}

FidelityReport fidelity_report(const TraceBatch& batch, std::span<const double> thresholds) {
  if (thresholds.empty()) throw ConfigError("empty threshold grid");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) throw ConfigError("threshold grid must be ascending");
  std::vector<double> m0, m1;
  for (const auto& tr : batch.traces) (tr.label == Label::state0 ? m0 : m1).push_back(tr.min_value());
  if (m0.empty() || m1.empty()) {
    throw AnalysisError(fmt::format("fidelity needs both labels (state0: {}, state1: {})", m0.size(), m1.size()));
  }
  std::sort(m0.begin(), m0.end());
  std::sort(m1.begin(), m1.end());

  FidelityReport r;
  const auto& cfg = batch.config;
  const double bw = (cfg.sigma_eff() > 0.0 ? cfg.sigma_eff() : cfg.separation() / 20.0) / 5.0;
  const double lo = std::min(m0.front(), m1.front());
  const double origin = std::floor(lo / bw) * bw;
  r.histogram_0 = {bw, origin, {}};
  r.histogram_1 = {bw, origin, {}};
  for (double v : m0) add_to(r.histogram_0, v);
  for (double v : m1) add_to(r.histogram_1, v);
  // common length so the two histograms share bins
  const auto bins = std::max(r.histogram_0.counts.size(), r.histogram_1.counts.size());
  r.histogram_0.counts.resize(bins, 0);
  r.histogram_1.counts.resize(bins, 0);

  const double n0 = static_cast<double>(m0.size());
  const double n1 = static_cast<double>(m1.size());
  r.thresholds.assign(thresholds.begin(), thresholds.end());
  r.visibility_opt = -std::numeric_limits<double>::infinity();
  for (double v : r.thresholds) {
    const auto below0 = std::lower_bound(m0.begin(), m0.end(), v) - m0.begin();
    const auto below1 = std::lower_bound(m1.begin(), m1.end(), v) - m1.begin();
    const double f0 = (n0 - static_cast<double>(below0)) / n0;
    const double f1 = static_cast<double>(below1) / n1;
    r.f0.push_back(f0);
    r.f1.push_back(f1);
    r.visibility.push_back(f0 + f1 - 1.0);
    if (r.visibility.back() > r.visibility_opt) {
      r.visibility_opt = r.visibility.back();
      r.v_opt = v;
      r.f0_opt = f0;
      r.f1_opt = f1;
    }
  }
  return r;
}

std::string FidelityReport::to_csv() const {
  std::string s = "threshold,F0,F1,visibility\n";
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    s += fmt::format("{},{},{},{}\n", thresholds[i], f0[i], f1[i], visibility[i]);
  }
  return s;
}

nlohmann::json FidelityReport::summary() const {
  return {{"v_opt", v_opt},
          {"f0_opt", f0_opt},
          {"f1_opt", f1_opt},
          {"visibility_opt", visibility_opt},
          {"histogram_bin_width", histogram_0.bin_width},
          {"histogram_origin", histogram_0.origin},
          {"histogram_0", histogram_0.counts},
          {"histogram_1", histogram_1.counts}};
}

// --------------------------------------------------------------- estimates

P1Estimate estimate_p1(std::span<const std::uint8_t> bits, double f0, double f1) {
  if (bits.empty()) throw ConfigError("no single-shot outcomes");
  P1Estimate e;
  e.n = static_cast<int>(bits.size());
  std::size_t ones = 0;
  for (auto b : bits) ones += b != 0;
  e.raw = static_cast<double>(ones) / e.n;
  const double vis = f0 + f1 - 1.0;
  if (!(vis > 0.0)) throw AnalysisError(fmt::format("visibility {} leaves P1 undetermined", vis));
  e.corrected = std::clamp((e.raw - (1.0 - f0)) / vis, 0.0, 1.0);
  return e;
}

P1Estimate estimate_p1(const TraceBatch& batch, double threshold, double f0, double f1) {
  std::vector<std::uint8_t> bits;
  bits.reserve(batch.traces.size());
  for (const auto& tr : batch.traces) bits.push_back(detect(tr, threshold, batch.config).bit ? 1 : 0);
  return estimate_p1(bits, f0, f1);
}

// ---------------------------------------------------------------------- I/O

std::string trace_csv(const Trace& trace, const TraceConfig& config) {
  std::string s = "t_us,value\n";
  for (std::size_t j = 0; j < trace.samples.size(); ++j) {
    s += fmt::format("{},{}\n", config.detector_time(static_cast<int>(j)), trace.samples[j]);
  }
  return s;
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(bytes.data(), bytes.size());
}

template <class T>
T get(std::istream& is) {
  std::array<char, sizeof(T)> bytes;
  if (!is.read(bytes.data(), bytes.size())) throw IoError("truncated HQTR frame");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace

void write_frame(std::ostream& os, const TraceBatch& batch) {
  const auto n_samples = static_cast<std::uint32_t>(batch.config.detector_samples());
  os.write("HQTR", 4);
  put<std::uint32_t>(os, kFrameVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(batch.traces.size()));
  put<std::uint32_t>(os, n_samples);
  put<double>(os, 1.0 / batch.config.detector_rate);
  for (const auto& tr : batch.traces) {
    if (tr.samples.size() != n_samples) throw IoError("trace length does not match the batch config");
    put<std::uint8_t>(os, static_cast<std::uint8_t>(tr.label));
    put<std::uint8_t>(os, tr.had_blip ? 1 : 0);
    put<double>(os, tr.events.empty() ? kNaN : tr.events.front().tunnel_out);
    put<double>(os, tr.events.empty() ? kNaN : tr.events.front().tunnel_in);
    for (double s : tr.samples) put<float>(os, static_cast<float>(s));
  }
  if (!os) throw IoError("failed writing HQTR frame");
}

TraceBatch read_frame(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "HQTR", 4) != 0) throw IoError("not an HQTR frame");
  const auto version = get<std::uint32_t>(is);
  if (version != kFrameVersion) throw IoError(fmt::format("unsupported HQTR version {}", version));
  const auto n = get<std::uint32_t>(is);
  const auto ns = get<std::uint32_t>(is);
  const double dt = get<double>(is);
  TraceBatch b;
  b.config.detector_rate = 1.0 / dt;
  b.config.t_meas = ns * dt;
  b.traces.resize(n);
  for (auto& tr : b.traces) {
    const auto label = get<std::uint8_t>(is);
    if (label > 1) throw IoError("bad label in HQTR frame");
    tr.label = static_cast<Label>(label);
    tr.had_blip = get<std::uint8_t>(is) != 0;
    const double t_out = get<double>(is);
    const double t_in = get<double>(is);
    if (!std::isnan(t_out)) tr.events.push_back({t_out, t_in});
    tr.samples.resize(ns);
    for (auto& s : tr.samples) s = get<float>(is);
  }
  return b;
}

nlohmann::json to_json(const TraceConfig& c) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  return {{"t_meas_us", c.t_meas},
          {"internal_rate_mhz", c.internal_rate},
          {"detector_rate_mhz", c.detector_rate},
          {"tau_out_us", c.tau_out},
          {"tau_in_us", c.tau_in},
          {"t1_meas_us", num(c.t1_meas)},
          {"p_thermal_window", c.p_thermal_window},
          {"level_base", c.level_base},
          {"level_blip", c.level_blip},
          {"t_integration_us", c.t_integration},
          {"snr_sigma_ratio", num(c.snr_sigma_ratio)},
          {"seed", c.seed}};
}

}  // namespace hqsim::readout

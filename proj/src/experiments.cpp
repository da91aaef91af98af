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

#include "hqsim/experiments.hpp"

#include <fmt/format.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

#include "hqsim/error.hpp"
#include "hqsim/units.hpp"

namespace hqsim {
namespace {

using units::kPi;
using units::kTwoPi;

// P1 in the realization's own eigenbasis after running `program` from its ground state.
double driven_p1(const PulseProgram& program, double eps_start, double eps_end,
                 const ModelParams& params, const T1Profile& t1, double offset,
                 const IntegratorOptions& opts) {
  const DensityMatrix rho0 = QubitState::eigenstate(0, eps_start + offset, params).rho;
  const auto res = evolve_realization(rho0, program, params, t1, offset, opts);
  return populations(res.rho, eps_end + offset, params)[1];
}

IntegratorOptions serial_inner(IntegratorOptions opts) {
  opts.execution = Execution::serial;
  return opts;
}

double envelope_area(const PulseSegment& seg) {
  const int n = 2000;
  const double h = seg.duration / n;
  double s = 0.5 * (seg.envelope(0.0) + seg.envelope(seg.duration));
  for (int i = 1; i < n; ++i) s += seg.envelope(i * h);
  return s * h;
}

nlohmann::json integrator_json(const IntegratorOptions& opts) {
  return {{"steps_per_period", opts.steps_per_period}, {"verify", opts.verify}};
}

}  // namespace

// ---------------------------------------------------------------- ScanResult

double clip_probability(double p) {
  if (!(p >= -1e-6 && p <= 1.0 + 1e-6)) {
    throw IntegrationAccuracyError(fmt::format("probability {} outside [0, 1]", p));
  }
  return std::clamp(p, 0.0, 1.0);
}

std::string ScanResult::to_csv() const {
  std::string out;
  if (!is_2d()) {
    out = "axis,p1\n";
    for (std::size_t i = 0; i < x.size(); ++i) out += fmt::format("{:.10g},{:.12g}\n", x[i], p1[i]);
  } else {
    out = "x,y,p1\n";
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < y.size(); ++j)
        out += fmt::format("{:.10g},{:.10g},{:.12g}\n", x[i], y[j], p1[i * y.size() + j]);
  }
  return out;
}

nlohmann::json to_json(const ModelParams& p) {
  return {{"delta_L_ghz", p.delta_l},
          {"delta_R_ghz", p.delta_r},
          {"t_ghz", {p.t[0], p.t[1], p.t[2], p.t[3]}},
          {"lever_arm", p.lever_arm}};
}

nlohmann::json to_json(const NoiseModel& n) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& k : n.t1_table) table.push_back({k.eps, k.t1_ns});
  return {{"sigma_eps_hghz", n.sigma_eps},
          {"t1_table", table},
          {"t1_extrapolate", n.t1_extrapolate},
          {"n_realizations", n.n_realizations},
          {"seed", n.seed}};
}

// ------------------------------------------------------------------- helpers

OperatingPoint sweet_spot(const ModelParams& params) {
  const auto [eps, f] = splitting_minimum(-200.0, 0.0, params);
  return {eps, f};
}

double default_edge_sigma() { return edge_sigma_for_rise_time(1.0); }

double rwa_rabi_frequency(const DriveSpec& drive, const ModelParams& params) {
  return std::abs(drive.amplitude) * drive_coupling(0, 1, drive.eps, params);
}

double calibrate_rotation(const DriveSpec& drive, double target_p1, const ModelParams& params,
                          const IntegratorOptions& opts) {
  if (!(target_p1 > 0.0 && target_p1 <= 1.0)) throw RangeError("target P1 must be in (0, 1]");
  const double f_rabi = rwa_rabi_frequency(drive, params);
  if (!(f_rabi > 0.0)) throw FitError("drive does not couple the qubit states");
  const T1Profile none;
  auto p1_at = [&](double tau) {
    const PulseProgram prog = {
        PulseSegment::burst(drive.eps, tau, drive.amplitude, drive.f_mw, 0.0, drive.edge_sigma)};
    return driven_p1(prog, drive.eps, drive.eps, params, none, 0.0, serial_inner(opts));
  };
  // rotating-wave estimate from the envelope area
  const double theta = 2.0 * std::asin(std::sqrt(target_p1));
  const double area_needed = theta / (kTwoPi * f_rabi);
  double lo = 1e-3, hi = area_needed + 2.0 * kEdgeSigmas * drive.edge_sigma + 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto seg = PulseSegment::burst(drive.eps, mid, 1.0, 0.0, 0.0, drive.edge_sigma);
    (envelope_area(seg) < area_needed ? lo : hi) = mid;
  }
  const double tau_est = 0.5 * (lo + hi);

  if (target_p1 >= 0.999) {
    return fit::golden_section([&](double tau) { return -p1_at(tau); }, 0.7 * tau_est,
                               1.3 * tau_est, 1e-6);
  }
  double a = 0.6 * tau_est;
  double b = 1.3 * tau_est;
  double pa = p1_at(a);
  double pb = p1_at(b);
  for (int it = 0; it < 20 && pa > target_p1; ++it) {
    a *= 0.7;
    pa = p1_at(a);
  }
  for (int it = 0; it < 20 && pb < target_p1; ++it) {
    b *= 1.1;
    pb = p1_at(b);
  }
  if (!(pa <= target_p1 && pb >= target_p1)) {
    throw FitError(fmt::format("could not bracket P1 = {} (got {} .. {})", target_p1, pa, pb));
  }
  for (int it = 0; it < 40 && b - a > 1e-7; ++it) {
    const double mid = 0.5 * (a + b);
    (p1_at(mid) < target_p1 ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

// ---------------------------------------------------------------------- Rabi

RabiResult rabi_scan(const RabiSpec& spec, const ModelParams& params, const NoiseModel& noise,
                     const IntegratorOptions& opts) {
  params.validate();
  if (spec.tau_grid.empty() || spec.amplitude_grid.empty()) throw ConfigError("empty Rabi grid");
  const auto offsets = quasistatic_offsets(noise);
  const T1Profile t1 = noise.t1();
  const int na = static_cast<int>(spec.amplitude_grid.size());
  const int nt = static_cast<int>(spec.tau_grid.size());
  const int nr = static_cast<int>(offsets.size());
  std::vector<double> raw(static_cast<std::size_t>(na) * nt * nr);
  const auto inner = serial_inner(opts);

  parallel::for_tasks(na * nt * nr, opts.execution, [&](int task) {
    const int r = task % nr;
    const int it = (task / nr) % nt;
    const int ia = task / (nr * nt);
    const double tau = spec.tau_grid[it];
    if (tau <= 0.0) {
      raw[task] = 0.0;
      return;
    }
    const PulseProgram prog = {PulseSegment::burst(spec.eps, tau, spec.amplitude_grid[ia],
                                                   spec.f_mw, spec.phase, spec.edge_sigma)};
    raw[task] = driven_p1(prog, spec.eps, spec.eps, params, t1, offsets[r], inner);
  });

  RabiResult out;
  out.scan.x_label = "tau_ns";
  out.scan.y_label = "amplitude_hghz";
  out.scan.x = spec.tau_grid;
  out.scan.y = spec.amplitude_grid;
  out.scan.p1.assign(static_cast<std::size_t>(nt) * na, 0.0);
  for (int ia = 0; ia < na; ++ia) {
    for (int it = 0; it < nt; ++it) {
      double s = 0.0;
      for (int r = 0; r < nr; ++r) s += raw[(static_cast<std::size_t>(ia) * nt + it) * nr + r];
      out.scan.p1[static_cast<std::size_t>(it) * na + ia] = clip_probability(s / nr);
    }
  }

  // sinusoid fits on the flat-top part of the sweep
  const double t_min = 2.0 * kEdgeSigmas * spec.edge_sigma;
  std::vector<double> amps, freqs;
  for (int ia = 0; ia < na; ++ia) {
    RabiRow row;
    row.amplitude = spec.amplitude_grid[ia];
    row.rwa_f_rabi = rwa_rabi_frequency({spec.eps, spec.f_mw, row.amplitude, spec.edge_sigma}, params);
    std::vector<double> t, y;
    for (int it = 0; it < nt; ++it) {
      if (spec.tau_grid[it] >= t_min) {
        t.push_back(spec.tau_grid[it]);
        y.push_back(out.scan.p1[static_cast<std::size_t>(it) * na + ia]);
      }
    }
    if (t.size() >= 6) {
      const double span = t.back() - t.front();
      double dt_min = span;
      for (std::size_t i = 1; i < t.size(); ++i) dt_min = std::min(dt_min, t[i] - t[i - 1]);
      const auto f = fit::sinusoid(t, y, 0.5 / span, 0.5 / dt_min);
      row.f_rabi = f.frequency;
      row.fit_amplitude = f.amplitude;
      row.flagged = f.amplitude < 0.05;
    } else {
      row.flagged = true;
    }
    if (!row.flagged && row.f_rabi < spec.f_mw / 5.0) {
      amps.push_back(row.amplitude);
      freqs.push_back(row.f_rabi);
    }
    out.rows.push_back(row);
  }
  out.linear_points = static_cast<int>(amps.size());
  if (amps.size() >= 2) out.linear = fit::linear(amps, freqs);

  out.scan.metadata = {{"experiment", "rabi"},
                       {"eps_hghz", spec.eps},
                       {"f_mw_ghz", spec.f_mw},
                       {"edge_sigma_ns", spec.edge_sigma},
                       {"model", to_json(params)},
                       {"noise", to_json(noise)},
                       {"integrator", integrator_json(opts)}};
  return out;
}

// -------------------------------------------------------------------- Ramsey

namespace {

PulseSegment pi_half(const RamseySpec& spec, double phase = 0.0) {
  return PulseSegment::burst(spec.drive.eps, spec.pi_half_duration, spec.drive.amplitude,
                             spec.drive.f_mw, phase, spec.drive.edge_sigma);
}

using Vec16 = Eigen::Matrix<Complex, 16, 1>;

Vec16 vec(const DensityMatrix& m) {
  Vec16 v;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) v[c * 4 + r] = m(r, c);
  return v;
}

// P1(te) for one realization: exact dwell propagator between a forward-evolved
// prefix and a backward-evolved measurement observable.
std::vector<double> ramsey_realization(const RamseySpec& spec, double eps_p,
                                       const ModelParams& params, const T1Profile& t1,
                                       double offset, const IntegratorOptions& opts) {
  const double eps_o = spec.drive.eps;
  const PulseProgram pre = {pi_half(spec), PulseSegment::ramp(eps_o, eps_p, spec.ramp_time)};
  const PulseProgram tail = {PulseSegment::ramp(eps_p, eps_o, spec.ramp_time),
                             pi_half(spec, ramsey_frame_phase(spec, eps_p, params))};

  const DensityMatrix rho0 = QubitState::eigenstate(0, eps_o + offset, params).rho;
  const DensityMatrix rho_a = evolve_realization(rho0, pre, params, t1, offset, opts).rho;
  const DensityMatrix obs =
      evolve_observable_backward(eigen_projector(1, eps_o + offset, params), tail, params, t1, offset, opts);

  const Liouvillian gen = liouvillian(eps_p + offset, params, t1.rate(eps_p + offset));
  const Liouvillian step = (gen * spec.te_step).exp();
  Vec16 v = vec(rho_a);
  const Vec16 w = vec(obs.transpose());
  std::vector<double> p(spec.te_count);
  for (int k = 0; k < spec.te_count; ++k) {
    p[k] = (w.transpose() * v).value().real();
    v = step * v;
  }
  return p;
}

void check_ramsey(const RamseySpec& spec) {
  if (!(spec.pi_half_duration > 0.0)) throw ConfigError("pi/2 duration must be > 0");
  if (!(spec.ramp_time > 0.0)) throw ConfigError("ramp_time must be > 0");
  if (!(spec.te_step > 0.0) || spec.te_count < 4) throw ConfigError("need te_step > 0 and te_count >= 4");
}

}  // namespace

double ramsey_frame_phase(const RamseySpec& spec, double eps_p, const ModelParams& params) {
  // carrier phase at the end of the first burst, plus the qubit phase picked
  // up on the two ramps (Simpson on the nominal dispersion)
  const int n = 200;
  double integral = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    integral += w * qubit_splitting(spec.drive.eps + (eps_p - spec.drive.eps) * k / n, params);
  }
  integral *= spec.ramp_time / (3.0 * n);
  return fit::wrap_angle(kTwoPi * (spec.drive.f_mw * spec.pi_half_duration + 2.0 * integral));
}

PulseProgram ramsey_program(const RamseySpec& spec, double eps_p, double te, const ModelParams& params) {
  const double eps_o = spec.drive.eps;
  PulseProgram prog = {pi_half(spec), PulseSegment::ramp(eps_o, eps_p, spec.ramp_time)};
  if (te > 0.0) prog.push_back(PulseSegment::dwell(eps_p, te));
  prog.push_back(PulseSegment::ramp(eps_p, eps_o, spec.ramp_time));
  prog.push_back(pi_half(spec, ramsey_frame_phase(spec, eps_p, params)));
  return prog;
}

std::vector<double> ramsey_trace(const RamseySpec& spec, double eps_p, const ModelParams& params,
                                 const NoiseModel& noise, const IntegratorOptions& opts) {
  check_ramsey(spec);
  const auto offsets = quasistatic_offsets(noise);
  const T1Profile t1 = noise.t1();
  const int nr = static_cast<int>(offsets.size());
  std::vector<std::vector<double>> per(nr);
  const auto inner = serial_inner(opts);
  parallel::for_tasks(nr, opts.execution, [&](int r) {
    per[r] = ramsey_realization(spec, eps_p, params, t1, offsets[r], inner);
  });
  std::vector<double> p(spec.te_count, 0.0);
  for (int r = 0; r < nr; ++r)
    for (int k = 0; k < spec.te_count; ++k) p[k] += per[r][k];
  for (double& v : p) v = clip_probability(v / nr);
  return p;
}

RamseyResult ramsey_scan(const RamseySpec& spec, const ModelParams& params, const NoiseModel& noise,
                         const IntegratorOptions& opts) {
  params.validate();
  check_ramsey(spec);
  if (spec.eps_p_grid.empty()) throw ConfigError("empty eps_p grid");
  const auto offsets = quasistatic_offsets(noise);
  const T1Profile t1 = noise.t1();
  const int ne = static_cast<int>(spec.eps_p_grid.size());
  const int nr = static_cast<int>(offsets.size());
  std::vector<std::vector<double>> per(static_cast<std::size_t>(ne) * nr);
  const auto inner = serial_inner(opts);
  parallel::for_tasks(ne * nr, opts.execution, [&](int task) {
    const int r = task % nr;
    const int ie = task / nr;
    per[task] = ramsey_realization(spec, spec.eps_p_grid[ie], params, t1, offsets[r], inner);
  });

  RamseyResult out;
  out.scan.x_label = "eps_p_hghz";
  out.scan.y_label = "te_ns";
  out.scan.x = spec.eps_p_grid;
  for (int k = 0; k < spec.te_count; ++k) out.scan.y.push_back(k * spec.te_step);
  out.scan.p1.assign(static_cast<std::size_t>(ne) * spec.te_count, 0.0);
  for (int ie = 0; ie < ne; ++ie) {
    std::vector<double> trace(spec.te_count, 0.0);
    for (int r = 0; r < nr; ++r)
      for (int k = 0; k < spec.te_count; ++k) trace[k] += per[static_cast<std::size_t>(ie) * nr + r][k];
    for (int k = 0; k < spec.te_count; ++k) {
      trace[k] = clip_probability(trace[k] / nr);
      out.scan.p1[static_cast<std::size_t>(ie) * spec.te_count + k] = trace[k];
    }
    const auto spec_fft = fit::magnitude_spectrum(trace, spec.te_step);
    out.rows.push_back({spec.eps_p_grid[ie], spec_fft.peak_frequency,
                        qubit_splitting(spec.eps_p_grid[ie], params), spec_fft.bin_width});
  }
  out.scan.metadata = {{"experiment", "ramsey"},
                       {"eps_op_hghz", spec.drive.eps},
                       {"f_mw_ghz", spec.drive.f_mw},
                       {"amplitude_hghz", spec.drive.amplitude},
                       {"pi_half_ns", spec.pi_half_duration},
                       {"ramp_ns", spec.ramp_time},
                       {"model", to_json(params)},
                       {"noise", to_json(noise)},
                       {"integrator", integrator_json(opts)}};
  return out;
}

fit::DampedSinusoidFit fit_ramsey_envelope(const RamseySpec& spec, std::span<const double> p1,
                                           double f_guess) {
  std::vector<double> t(p1.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = k * spec.te_step;
  return fit::gaussian_damped_sinusoid(t, p1, 0.7 * f_guess, 1.3 * f_guess, 0.2, 1e4);
}

T2Calibration calibrate_sigma_eps(const RamseySpec& spec, double eps_p, double target_t2,
                                  const ModelParams& params, const NoiseModel& noise,
                                  const IntegratorOptions& opts, double rel_tol) {
  if (!(target_t2 > 0.0)) throw ConfigError("target T2* must be > 0");
  const double f_q = qubit_splitting(eps_p, params);
  const double h = 0.01;
  const double slope =
      std::abs(qubit_splitting(eps_p + h, params) - qubit_splitting(eps_p - h, params)) / (2.0 * h);
  if (!(slope > 0.0)) throw FitError("dispersion is flat at the calibration point");
  // quasistatic Gaussian noise: envelope exp(-(2 pi f' sigma t)^2 / 2)
  const double sigma0 = std::sqrt(2.0) / (kTwoPi * slope * target_t2);

  T2Calibration out;
  auto t2_for = [&](double sigma) {
    NoiseModel n = noise;
    n.sigma_eps = sigma;
    const auto p = ramsey_trace(spec, eps_p, params, n, opts);
    out.fit = fit_ramsey_envelope(spec, p, f_q);
    ++out.evaluations;
    return out.fit.decay_time;
  };
  // walk outward from the linear-dispersion estimate until the target is
  // bracketed; large offsets sample the curvature and T2* stops falling
  double lo = std::log(sigma0);
  double t_lo = t2_for(sigma0);
  double hi = lo;
  double t_hi = t_lo;
  const double step = std::log(1.5);
  for (int k = 0; k < 6 && (t_lo > target_t2) == (t_hi > target_t2); ++k) {
    if (t_hi > target_t2) {
      lo = hi;
      t_lo = t_hi;
      hi += step;
      t_hi = t2_for(std::exp(hi));
    } else {
      hi = lo;
      t_hi = t_lo;
      lo -= step;
      t_lo = t2_for(std::exp(lo));
    }
  }
  if (!(t_lo > target_t2 && t_hi <= target_t2)) {
    throw FitError(fmt::format("T2* bracket failed: {} ns at sigma {} and {} ns at sigma {}", t_lo,
                               std::exp(lo), t_hi, std::exp(hi)));
  }
  double mid = 0.5 * (lo + hi);
  double t_mid = 0.0;
  for (int it = 0; it < 40; ++it) {
    mid = 0.5 * (lo + hi);
    t_mid = t2_for(std::exp(mid));
    if (std::abs(t_mid - target_t2) < rel_tol * target_t2) break;
    (t_mid > target_t2 ? lo : hi) = mid;
  }
  out.sigma_eps = std::exp(mid);
  out.t2_star = t_mid;
  return out;
}

// ---------------------------------------------------------------- Tomography

double preparation_phase(Preparation prep) { return prep == Preparation::plus_y ? kPi : 0.0; }

ScanResult tomography_trace(const TomographySpec& spec, Preparation prep, const ModelParams& params,
                            const NoiseModel& noise, const IntegratorOptions& opts) {
  params.validate();
  if (spec.phi_grid.empty()) throw ConfigError("empty phase grid");
  if (!(spec.pi_half_duration > 0.0)) throw ConfigError("pi/2 duration must be > 0");
  const auto offsets = quasistatic_offsets(noise);
  const T1Profile t1 = noise.t1();
  const int np = static_cast<int>(spec.phi_grid.size());
  const int nr = static_cast<int>(offsets.size());
  const auto& d = spec.drive;
  std::vector<double> raw(static_cast<std::size_t>(np) * nr);
  const auto inner = serial_inner(opts);
  parallel::for_tasks(np * nr, opts.execution, [&](int task) {
    const int r = task % nr;
    const int ip = task / nr;
    const PulseProgram prog = {
        PulseSegment::burst(d.eps, spec.pi_half_duration, d.amplitude, d.f_mw, preparation_phase(prep),
                            d.edge_sigma),
        PulseSegment::burst(d.eps, spec.pi_half_duration, d.amplitude, d.f_mw, spec.phi_grid[ip],
                            d.edge_sigma)};
    raw[task] = driven_p1(prog, d.eps, d.eps, params, t1, offsets[r], inner);
  });
  ScanResult out;
  out.x_label = "phi_rad";
  out.x = spec.phi_grid;
  out.p1.resize(np);
  for (int ip = 0; ip < np; ++ip) {
    double s = 0.0;
    for (int r = 0; r < nr; ++r) s += raw[static_cast<std::size_t>(ip) * nr + r];
    out.p1[ip] = clip_probability(s / nr);
  }
  out.metadata = {{"experiment", "tomography"},
                  {"preparation", prep == Preparation::plus_y ? "+Y" : "-Y"},
                  {"pi_half_ns", spec.pi_half_duration},
                  {"model", to_json(params)},
                  {"noise", to_json(noise)},
                  {"integrator", integrator_json(opts)}};
  return out;
}

TomographyResult tomography_scan(const TomographySpec& spec, const ModelParams& params,
                                 const NoiseModel& noise, const IntegratorOptions& opts) {
  TomographyResult out;
  out.plus_y = tomography_trace(spec, Preparation::plus_y, params, noise, opts);
  out.minus_y = tomography_trace(spec, Preparation::minus_y, params, noise, opts);
  out.fit_plus = fit::phase_sinusoid(out.plus_y.x, out.plus_y.p1);
  out.fit_minus = fit::phase_sinusoid(out.minus_y.x, out.minus_y.p1);
  out.phase_difference = std::abs(fit::wrap_angle(out.fit_plus.phase - out.fit_minus.phase));
  return out;
}

// -------------------------------------------------------------- Ramp budget

double adiabatic_time_scale(double eps_a, double eps_b, const ModelParams& params, int n_lower,
                            int samples) {
  if (n_lower < 1 || n_lower > 3) throw RangeError("n_lower must be 1..3");
  const Matrix4 d = detuning_derivative();
  const double span = std::abs(eps_b - eps_a);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double eps = eps_a + (eps_b - eps_a) * s / std::max(1, samples - 1);
    const auto ls = levels(eps, params);
    const Matrix4 g = ls.vectors.transpose() * d * ls.vectors;
    for (int i = 0; i < n_lower; ++i) {
      for (int j = n_lower; j < 4; ++j) {
        const double gap = ls.energies[j] - ls.energies[i];
        worst = std::max(worst, std::abs(g(i, j)) * span / (kTwoPi * gap * gap));
      }
    }
  }
  return worst;
}

RampBudget ramp_error_budget(const RampBudgetSpec& spec, const ModelParams& params,
                             const NoiseModel& noise, const IntegratorOptions& opts) {
  params.validate();
  if (!(spec.ramp_in_duration > 0.0 && spec.stage1_duration > 0.0 && spec.stage2_duration > 0.0)) {
    throw ConfigError("ramp durations must be > 0");
  }
  const T1Profile t1 = noise.t1();
  const T1Profile coherent;
  RampBudget out;

  // ramp-in: ground state at the readout point, coherent
  {
    const PulseProgram prog = {
        PulseSegment::ramp(spec.eps_measure, spec.eps_operation, spec.ramp_in_duration)};
    const DensityMatrix rho0 = QubitState::eigenstate(0, spec.eps_measure, params).rho;
    const auto res = evolve_realization(rho0, prog, params, coherent, 0.0, opts);
    const auto pop = populations(res.rho, spec.eps_operation, params);
    out.leakage_in = std::max(0.0, 1.0 - pop[0] - pop[1]);
  }
  // ramp-out: excited qubit state through the hot spot, relaxation flux only
  {
    const PulseProgram prog = {
        PulseSegment::ramp(spec.eps_operation, spec.eps_intermediate, spec.stage1_duration),
        PulseSegment::ramp(spec.eps_intermediate, spec.eps_measure, spec.stage2_duration)};
    const DensityMatrix rho0 = QubitState::eigenstate(1, spec.eps_operation, params).rho;
    out.relaxation_out = evolve_realization(rho0, prog, params, t1, 0.0, opts).relaxed;
  }
  // fast second stage: non-adiabatic transfer out of each qubit eigenstate
  {
    const PulseProgram prog = {
        PulseSegment::ramp(spec.eps_intermediate, spec.eps_measure, spec.stage2_duration)};
    for (int k = 0; k < 2; ++k) {
      const DensityMatrix rho0 = QubitState::eigenstate(k, spec.eps_intermediate, params).rho;
      const auto res = evolve_realization(rho0, prog, params, coherent, 0.0, opts);
      const double lost = std::max(0.0, 1.0 - populations(res.rho, spec.eps_measure, params)[k]);
      (k == 0 ? out.lz_from_ground : out.lz_from_excited) = lost;
    }
    out.lz_probability = std::max(out.lz_from_ground, out.lz_from_excited);
  }
  return out;
}

}  // namespace hqsim

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

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hqsim/error.hpp"
#include "hqsim/experiments.hpp"

namespace {

using namespace hqsim;

const ModelParams kParams{};

OperatingPoint op() {
  static const OperatingPoint o = sweet_spot(kParams);
  return o;
}

// RWA oracle built directly from a fresh diagonalization: f_R = A |<0|D|1>|
// where D = dH/deps = diag(1/2, 1/2, -1/2, -1/2).
double oracle_rabi(double eps, double amplitude) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(build_hamiltonian(eps, kParams));
  const Eigen::Vector4d d(0.5, 0.5, -0.5, -0.5);
  const auto& v = es.eigenvectors();
  double c = 0.0;
  for (int k = 0; k < 4; ++k) c += v(k, 0) * d[k] * v(k, 1);
  return amplitude * std::abs(c);
}

double p1_after(const PulseProgram& prog, double eps_read, const NoiseModel& noise = {},
                const IntegratorOptions& opts = {}) {
  const auto s = evolve(QubitState::eigenstate(0, op().eps, kParams), prog, kParams, noise, opts);
  return populations(s.rho, eps_read, kParams)[1];
}

PulseSegment drive_burst(double duration, double amplitude, double f, double phase = 0.0,
                         double sigma = default_edge_sigma()) {
  return PulseSegment::burst(op().eps, duration, amplitude, f, phase, sigma);
}

double max_abs(const DensityMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// ------------------------------------------------------------------ pulses

TEST(Pulse, EnvelopeSmallAtBoundaries) {
  const auto b = drive_burst(10.0, 1.0, 1.0);
  EXPECT_LE(b.envelope(0.0), 0.01);
  EXPECT_LE(b.envelope(10.0), 0.01);
  EXPECT_DOUBLE_EQ(b.envelope(5.0), 1.0);
}

TEST(Pulse, DefaultEdgeRisesInOneNanosecond) {
  const auto b = drive_burst(20.0, 1.0, 1.0);
  auto crossing = [&](double level) {
    return fit::golden_section([&](double t) { return std::abs(b.envelope(t) - level); }, 0.0, 4.0);
  };
  EXPECT_NEAR(crossing(0.9) - crossing(0.1), 1.0, 1e-6);
}

TEST(Pulse, RectangularBurstHasUnitEnvelope) {
  const auto b = drive_burst(3.0, 1.0, 1.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(b.envelope(0.0), 1.0);
}

TEST(Pulse, CarrierPhaseIsSegmentLocal) {
  const auto b = drive_burst(10.0, 2.0, 1.3, 0.4);
  EXPECT_NEAR(b.detuning(5.0), op().eps + 2.0 * std::cos(2.0 * M_PI * 1.3 * 5.0 + 0.4), 1e-12);
}

TEST(Pulse, RampIsLinear) {
  const auto r = PulseSegment::ramp(-10.0, 30.0, 4.0);
  EXPECT_DOUBLE_EQ(r.detuning(1.0), 0.0);
  EXPECT_DOUBLE_EQ(r.detuning(4.0), 30.0);
}

TEST(Pulse, InvalidSegmentsRejected) {
  EXPECT_THROW(PulseSegment::dwell(0.0, 0.0).validate(), ConfigError);
  EXPECT_THROW(PulseSegment::burst(0.0, 1.0, 1.0, 1.0, 0.0, -1.0).validate(), ConfigError);
  EXPECT_THROW(segment_from_json({{"kind", "dwell"}, {"duration_ns", 1.0}, {"eps_hghz", 0.0}, {"x", 1}}),
               ConfigError);
  EXPECT_THROW(segment_from_json({{"kind", "wiggle"}, {"duration_ns", 1.0}}), ConfigError);
  EXPECT_THROW(program_from_json(nlohmann::json::object()), ConfigError);
}

TEST(Pulse, ProgramJsonRoundTrip) {
  const PulseProgram prog = {PulseSegment::ramp(200.0, -50.0, 20.0), PulseSegment::dwell(-50.0, 3.5),
                             drive_burst(7.25, 4.0, 1.48, 0.3)};
  const auto back = program_from_json(nlohmann::json::parse(program_to_json(prog).dump()));
  ASSERT_EQ(back.size(), prog.size());
  for (std::size_t i = 0; i < prog.size(); ++i) {
    EXPECT_EQ(back[i].kind, prog[i].kind);
    EXPECT_EQ(back[i].duration, prog[i].duration);
    EXPECT_EQ(back[i].detuning(0.7), prog[i].detuning(0.7));
  }
}

// --------------------------------------------------------------- T1 table

TEST(T1, KnotValuesExact) {
  const T1Profile t1({{-10.0, 100.0}, {0.0, 10000.0}, {5.0, 30.0}});
  EXPECT_DOUBLE_EQ(t1.eval(-10.0), 100.0);
  EXPECT_DOUBLE_EQ(t1.eval(0.0), 10000.0);
  EXPECT_DOUBLE_EQ(t1.eval(5.0), 30.0);
}

TEST(T1, LogMidpoint) {
  const T1Profile t1({{0.0, 100.0}, {2.0, 10000.0}});
  EXPECT_NEAR(t1.eval(1.0), 1000.0, 1e-9);
}

TEST(T1, HotSpotIsTwentyNanoseconds) {
  const T1Profile t1(T1Profile::synthetic_default());
  EXPECT_DOUBLE_EQ(t1.eval(-20.0), 20.0);
  double lowest = 1e300;
  for (double e = -400.0; e <= 400.0; e += 0.5) lowest = std::min(lowest, t1.eval(e));
  EXPECT_DOUBLE_EQ(lowest, 20.0);
}

TEST(T1, OutOfHullThrowsUnlessExtrapolating) {
  EXPECT_THROW(T1Profile({{0.0, 1.0}, {1.0, 2.0}}).eval(1.5), RangeError);
  EXPECT_THROW(T1Profile({{0.0, 1.0}, {1.0, 2.0}}).eval(-0.1), RangeError);
  EXPECT_DOUBLE_EQ(T1Profile({{0.0, 1.0}, {1.0, 2.0}}, true).eval(9.0), 2.0);
}

TEST(T1, EmptyTableMeansNoRelaxation) { EXPECT_EQ(T1Profile().rate(3.0), 0.0); }

TEST(T1, TableValidation) {
  EXPECT_FALSE(T1Profile::table_errors({{0.0, 1.0}, {0.0, 2.0}}).empty());
  EXPECT_FALSE(T1Profile::table_errors({{0.0, 1.0}, {1.0, -2.0}}).empty());
  EXPECT_TRUE(T1Profile::table_errors(T1Profile::synthetic_default()).empty());
  NoiseModel n;
  n.n_realizations = 0;
  EXPECT_THROW(n.validate(), ConfigError);
}

// ------------------------------------------------------------------ noise

TEST(Noise, OffsetsZeroWithoutNoise) {
  NoiseModel n;
  n.n_realizations = 5;
  for (double o : quasistatic_offsets(n)) EXPECT_EQ(o, 0.0);
}

TEST(Noise, StratifiedOffsetsHaveRequestedSpread) {
  NoiseModel n;
  n.sigma_eps = 2.5;
  n.n_realizations = 400;
  n.seed = 17;
  const auto o = quasistatic_offsets(n);
  double m = 0.0, v = 0.0;
  for (double x : o) m += x;
  m /= o.size();
  for (double x : o) v += (x - m) * (x - m);
  v /= o.size() - 1;
  EXPECT_NEAR(m, 0.0, 0.02);
  EXPECT_NEAR(std::sqrt(v), 2.5, 0.1);
  EXPECT_EQ(o, quasistatic_offsets(n));
}

// ---------------------------------------------------------------- evolve

TEST(Evolve, ZeroDurationLeavesStateUnchanged) {
  Eigen::Vector4cd psi(1.0, Complex(0.5, 0.5), -0.3, Complex(0.0, 0.7));
  psi.normalize();
  const auto s0 = QubitState::pure(psi);
  const auto s = evolve(s0, {PulseSegment::dwell(-20.0, 1e-9)}, kParams, {});
  EXPECT_LT(max_abs(s.rho - s0.rho), 1e-6);
}

TEST(Evolve, EigenstateIsStationary) {
  for (int k = 0; k < 4; ++k) {
    const auto s0 = QubitState::eigenstate(k, -30.0, kParams);
    const auto s = evolve(s0, {PulseSegment::dwell(-30.0, 7.3)}, kParams, {});
    EXPECT_LT(max_abs(s.rho - s0.rho), 1e-8) << "level " << k;
  }
}

TEST(Evolve, ResonantPiPulse) {
  const double amp = 3.0;
  const double tau = 1.0 / (2.0 * oracle_rabi(op().eps, amp));
  const double p1 = p1_after({drive_burst(tau, amp, op().f_qubit, 0.0, 0.0)}, op().eps);
  EXPECT_GE(p1, 0.98);
}

TEST(Evolve, RwaRabiFrequencyMatchesOracle) {
  const DriveSpec d{op().eps, op().f_qubit, 5.0, 0.0};
  EXPECT_NEAR(rwa_rabi_frequency(d, kParams), oracle_rabi(op().eps, 5.0), 1e-10);
}

TEST(Evolve, InvariantsAfterMixedProgram) {
  NoiseModel n;
  n.t1_table = T1Profile::synthetic_default();
  n.sigma_eps = 1.0;
  n.n_realizations = 4;
  n.seed = 3;
  const PulseProgram prog = {PulseSegment::ramp(op().eps, -20.0, 2.0), PulseSegment::dwell(-20.0, 30.0),
                             PulseSegment::ramp(-20.0, op().eps, 2.0), drive_burst(6.0, 4.0, op().f_qubit)};
  const auto s = evolve(QubitState::eigenstate(1, op().eps, kParams), prog, kParams, n);
  EXPECT_LT(s.trace_error(), 1e-9);
  EXPECT_LT(s.hermiticity_error(), 1e-12);
  EXPECT_GE(s.min_eigenvalue(), -1e-7);
  EXPECT_TRUE(s.errors().empty());
}

TEST(Evolve, RelaxationAtHotSpotFollowsT1) {
  NoiseModel n;
  n.t1_table = T1Profile::synthetic_default();
  const auto s = evolve(QubitState::eigenstate(1, -20.0, kParams), {PulseSegment::dwell(-20.0, 20.0)},
                        kParams, n);
  EXPECT_NEAR(populations(s.rho, -20.0, kParams)[1], std::exp(-1.0), 1e-6);
}

// Amplitude damping from the maximally mixed qubit state: the excited
// population decays monotonically and purity rises toward 1.
TEST(Evolve, PurityMonotoneUnderPureRelaxation) {
  NoiseModel n;
  n.t1_table = {{-100.0, 15.0}, {100.0, 15.0}};
  DensityMatrix rho = 0.5 * (eigen_projector(0, -40.0, kParams) + eigen_projector(1, -40.0, kParams));
  double last_purity = QubitState{rho}.purity();
  double last_p1 = 0.5;
  for (int k = 0; k < 12; ++k) {
    rho = evolve(QubitState{rho}, {PulseSegment::dwell(-40.0, 2.5)}, kParams, n).rho;
    const auto pops = populations(rho, -40.0, kParams);
    const double purity = QubitState{rho}.purity();
    EXPECT_GE(purity, last_purity - 1e-12);
    EXPECT_LE(pops[1], last_p1 + 1e-12);
    EXPECT_NEAR(pops[0] + pops[1], 1.0, 1e-9);
    last_purity = purity;
    last_p1 = pops[1];
  }
  EXPECT_GT(last_purity, 0.85);
}

TEST(Evolve, ChevronSymmetricAboutResonance) {
  // small drive keeps the ac Stark shift of the resonance (~A^2) negligible
  const double amp = 2.0;
  const double f0 = op().f_qubit;
  for (double tau : {9.0, 16.0, 24.0}) {
    for (double df : {0.02, 0.05}) {
      const double up = p1_after({drive_burst(tau, amp, f0 + df)}, op().eps);
      const double dn = p1_after({drive_burst(tau, amp, f0 - df)}, op().eps);
      EXPECT_NEAR(up, dn, 0.02) << "tau " << tau << " df " << df;
    }
  }
}

TEST(Evolve, BitIdenticalAcrossThreadCounts) {
  NoiseModel n;
  n.sigma_eps = 2.0;
  n.n_realizations = 6;
  n.seed = 42;
  n.t1_table = T1Profile::synthetic_default();
  const PulseProgram prog = {drive_burst(4.0, 4.0, op().f_qubit), PulseSegment::ramp(op().eps, -80.0, 1.0)};
  const auto s0 = QubitState::eigenstate(0, op().eps, kParams);
  IntegratorOptions serial;
  serial.execution = Execution::serial;
  const auto ref = evolve(s0, prog, kParams, n, serial).rho;
  for (int threads : {1, 2, 4}) {
    parallel::set_thread_limit(threads);
    const auto par = evolve(s0, prog, kParams, n).rho;
    EXPECT_TRUE(par == ref) << threads << " threads";
  }
  parallel::set_thread_limit(0);
}

TEST(Evolve, StepHalvingConverged) {
  NoiseModel n;
  n.t1_table = T1Profile::synthetic_default();
  const PulseProgram prog = {drive_burst(8.0, 6.0, op().f_qubit), PulseSegment::ramp(op().eps, 200.0, 6.0)};
  IntegratorOptions coarse;
  IntegratorOptions fine;
  fine.steps_per_period = 80.0;
  const auto s0 = QubitState::eigenstate(0, op().eps, kParams);
  const auto a = populations(evolve(s0, prog, kParams, n, coarse).rho, 200.0, kParams);
  const auto b = populations(evolve(s0, prog, kParams, n, fine).rho, 200.0, kParams);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-4);
  IntegratorOptions verify;
  verify.verify = true;
  const PulseProgram slow = {drive_burst(8.0, 6.0, op().f_qubit), PulseSegment::ramp(op().eps, -20.0, 6.0)};
  EXPECT_NO_THROW(evolve(s0, slow, kParams, n, verify));
}

TEST(Evolve, UnderResolvedStepFailsVerification) {
  IntegratorOptions opts;
  opts.steps_per_period = 1.2;
  opts.verify = true;
  EXPECT_THROW(evolve(QubitState::eigenstate(0, op().eps, kParams), {drive_burst(10.0, 6.0, op().f_qubit)},
                      kParams, {}, opts),
               IntegrationAccuracyError);
}

TEST(Evolve, EmptyProgramRejected) {
  EXPECT_THROW(evolve(QubitState::eigenstate(0, 0.0, kParams), {}, kParams, {}), ConfigError);
}

// A generic four-level state carries ~100 GHz coherences, so the RK4 result
// is compared at a fine step and the error must shrink at fourth order.
TEST(Evolve, LiouvillianExponentialMatchesIntegrator) {
  const T1Profile t1(T1Profile::synthetic_default());
  Eigen::Vector4cd psi(0.6, Complex(0.2, -0.4), 0.5, Complex(0.1, 0.3));
  psi.normalize();
  const DensityMatrix rho0 = QubitState::pure(psi).rho;
  const double eps = -25.0;
  const double t = 6.0;
  const Liouvillian l = liouvillian(eps, kParams, t1.rate(eps));
  Eigen::Matrix<Complex, 16, 1> v;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) v[4 * c + r] = rho0(r, c);
  v = (l * t).exp() * v;
  DensityMatrix ex;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) ex(r, c) = v[4 * c + r];
  auto err = [&](double spp) {
    IntegratorOptions o;
    o.steps_per_period = spp;
    return max_abs(evolve_realization(rho0, {PulseSegment::dwell(eps, t)}, kParams, t1, 0.0, o).rho - ex);
  };
  const double e80 = err(80.0);
  const double e160 = err(160.0);
  EXPECT_LT(e160, 1e-4);
  EXPECT_NEAR(e80 / e160, 16.0, 2.0);
}

TEST(Evolve, BackwardObservableReproducesForwardExpectation) {
  NoiseModel n;
  n.t1_table = T1Profile::synthetic_default();
  const PulseProgram prog = {drive_burst(5.0, 4.0, op().f_qubit, 0.7), PulseSegment::ramp(op().eps, -10.0, 3.0)};
  const T1Profile t1(n.t1_table);
  const DensityMatrix obs = eigen_projector(1, -10.0, kParams);
  const DensityMatrix o0 = evolve_observable_backward(obs, prog, kParams, t1, 0.0);
  for (int k = 0; k < 3; ++k) {
    const DensityMatrix r0 = QubitState::eigenstate(k, op().eps, kParams).rho;
    const DensityMatrix rf = evolve_realization(r0, prog, kParams, t1, 0.0).rho;
    EXPECT_NEAR((o0 * r0).trace().real(), (obs * rf).trace().real(), 1e-7);
  }
}

// ------------------------------------------------------------------ Rabi

TEST(Rabi, ScanBehaviour) {
  RabiSpec spec;
  spec.eps = op().eps;
  spec.f_mw = op().f_qubit;
  spec.edge_sigma = default_edge_sigma();
  for (double t = 0.0; t <= 24.0 + 1e-9; t += 0.2) spec.tau_grid.push_back(t);
  spec.amplitude_grid = {0.0, 3.0, 6.0};
  const auto r = rabi_scan(spec, kParams, {});
  ASSERT_EQ(r.scan.p1.size(), spec.tau_grid.size() * 3);
  for (std::size_t i = 0; i < spec.tau_grid.size(); ++i) {
    EXPECT_LT(r.scan.at(i, 0), 1e-6);
    if (spec.tau_grid[i] < 2.0) {
      EXPECT_LT(r.scan.at(i, 1), 0.05);
      EXPECT_LT(r.scan.at(i, 2), 0.05);
    }
  }
  EXPECT_TRUE(r.rows[0].flagged);
  EXPECT_FALSE(r.rows[1].flagged);
  EXPECT_NEAR(r.rows[2].f_rabi / r.rows[1].f_rabi, 2.0, 0.1);
  EXPECT_NEAR(r.rows[1].f_rabi, oracle_rabi(op().eps, 3.0), 0.05 * oracle_rabi(op().eps, 3.0));
  EXPECT_GT(r.linear.r2, 0.99);
}

TEST(Rabi, CalibratedPiHalf) {
  const DriveSpec d{op().eps, op().f_qubit, 4.0, default_edge_sigma()};
  const double tau = calibrate_rotation(d, 0.5, kParams);
  EXPECT_NEAR(p1_after({drive_burst(tau, 4.0, op().f_qubit)}, op().eps), 0.5, 1e-4);
}

// ---------------------------------------------------------------- Ramsey

RamseySpec ramsey_spec() {
  RamseySpec s;
  s.drive = {op().eps, op().f_qubit, 4.0, default_edge_sigma()};
  s.pi_half_duration = calibrate_rotation(s.drive, 0.5, kParams);
  return s;
}

TEST(Ramsey, FastTraceMatchesExplicitProgram) {
  const auto spec = ramsey_spec();
  const auto trace = ramsey_trace(spec, -80.0, kParams, {});
  for (int k : {0, 7, 20, 133}) {
    const double te = k * spec.te_step;
    EXPECT_NEAR(trace[k], p1_after(ramsey_program(spec, -80.0, te, kParams), op().eps), 1e-7) << te;
  }
}

TEST(Ramsey, ZeroDwellIsPiComposite) {
  const auto spec = ramsey_spec();
  auto second = drive_burst(spec.pi_half_duration, 4.0, op().f_qubit);
  second.phase = 2.0 * M_PI * op().f_qubit * spec.pi_half_duration;
  const double composite =
      p1_after({drive_burst(spec.pi_half_duration, 4.0, op().f_qubit), second}, op().eps);
  EXPECT_GT(composite, 0.99);
  const auto trace = ramsey_trace(spec, -80.0, kParams, {});
  EXPECT_NEAR(trace[0], composite, 0.01);
  EXPECT_EQ(*std::max_element(trace.begin(), trace.begin() + 12), trace[0]);
}

TEST(Ramsey, FftPeakFollowsDispersion) {
  auto spec = ramsey_spec();
  spec.eps_p_grid = {-200.0, -120.0, -80.0, -40.0};
  const auto r = ramsey_scan(spec, kParams, {});
  for (const auto& row : r.rows) {
    EXPECT_LE(std::abs(row.fft_peak - qubit_splitting(row.eps_p, kParams)), row.bin_width) << row.eps_p;
  }
}

TEST(Ramsey, EnvelopeFitRecoversNoiseFreeCoherence) {
  const auto spec = ramsey_spec();
  const auto trace = ramsey_trace(spec, -80.0, kParams, {});
  const auto f = fit_ramsey_envelope(spec, trace, qubit_splitting(-80.0, kParams));
  EXPECT_GT(f.decay_time, 100.0);
  EXPECT_NEAR(f.frequency, qubit_splitting(-80.0, kParams), 2e-3);
}

// Quasistatic Gaussian noise gives exp(-(2 pi f' sigma t)^2 / 2): the
// calibrated sigma must sit near sqrt(2) / (2 pi f' T2*) and reproduce T2*
// with a fresh noise sample.
TEST(Ramsey, SigmaCalibrationHitsTarget) {
  auto spec = ramsey_spec();
  NoiseModel n;
  n.n_realizations = 24;
  n.seed = 4;
  const auto cal = calibrate_sigma_eps(spec, -80.0, 7.0, kParams, n);
  EXPECT_NEAR(cal.t2_star, 7.0, 0.07);
  const double slope = (qubit_splitting(-79.99, kParams) - qubit_splitting(-80.01, kParams)) / 0.02;
  const double linear = std::sqrt(2.0) / (2.0 * M_PI * std::abs(slope) * 7.0);
  EXPECT_NEAR(cal.sigma_eps / linear, 1.0, 0.3);
  n.sigma_eps = cal.sigma_eps;
  n.seed = 99;
  const auto trace = ramsey_trace(spec, -80.0, kParams, n);
  EXPECT_NEAR(fit_ramsey_envelope(spec, trace, qubit_splitting(-80.0, kParams)).decay_time, 7.0, 1.0);
}

// ------------------------------------------------------------ tomography

// Weak drive: the two-level rotating-wave picture is accurate and the traces
// are pure sinusoids.
TEST(Tomography, OutOfPhaseTraces) {
  TomographySpec spec;
  spec.drive = {op().eps, op().f_qubit, 2.0, default_edge_sigma()};
  spec.pi_half_duration = calibrate_rotation(spec.drive, 0.5, kParams);
  for (int k = 0; k < 24; ++k) spec.phi_grid.push_back(k * 2.0 * M_PI / 24.0);
  const auto r = tomography_scan(spec, kParams, {});
  EXPECT_NEAR(r.phase_difference, M_PI, 0.05);
  EXPECT_LE(std::abs(r.fit_plus.amplitude), 0.5 + 1e-6);
  EXPECT_LE(std::abs(r.fit_minus.amplitude), 0.5 + 1e-6);
  for (double p : r.plus_y.p1) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  // phi and phi + pi sit symmetrically about the mean
  for (const auto* s : {&r.plus_y, &r.minus_y}) {
    const double mean = 0.5 * (s->at(0) + s->at(12));
    const double offset = (s == &r.plus_y ? r.fit_plus : r.fit_minus).offset;
    EXPECT_NEAR(mean, offset, 1e-3);
  }
}

TEST(Tomography, PreparationPhases) {
  EXPECT_DOUBLE_EQ(preparation_phase(Preparation::plus_y), M_PI);
  EXPECT_DOUBLE_EQ(preparation_phase(Preparation::minus_y), 0.0);
}

// ------------------------------------------------------------ ramp budget

TEST(RampBudget, SlowRampInIsAdiabatic) {
  RampBudgetSpec spec;
  spec.eps_operation = op().eps;
  spec.ramp_in_duration = 100.0 * adiabatic_time_scale(spec.eps_measure, spec.eps_operation, kParams);
  NoiseModel n;
  n.t1_table = T1Profile::synthetic_default();
  const auto b = ramp_error_budget(spec, kParams, n);
  EXPECT_LT(b.leakage_in, 1e-4);
  EXPECT_GE(b.leakage_in, 0.0);
}

TEST(RampBudget, DefaultTwoStageRampOut) {
  RampBudgetSpec spec;
  spec.eps_operation = op().eps;
  NoiseModel n;
  n.t1_table = T1Profile::synthetic_default();
  const auto b = ramp_error_budget(spec, kParams, n);
  EXPECT_GT(b.relaxation_out, 0.005);
  EXPECT_LT(b.relaxation_out, 0.02);
  EXPECT_LT(b.lz_probability, 0.015);
  EXPECT_LT(b.leakage_in, 1e-3);
  EXPECT_DOUBLE_EQ(b.lz_probability, std::max(b.lz_from_ground, b.lz_from_excited));
}

TEST(RampBudget, NoRelaxationWithoutTable) {
  RampBudgetSpec spec;
  spec.eps_operation = op().eps;
  EXPECT_EQ(ramp_error_budget(spec, kParams, {}).relaxation_out, 0.0);
}

TEST(Scan, ClipProbability) {
  EXPECT_EQ(clip_probability(-5e-7), 0.0);
  EXPECT_EQ(clip_probability(1.0 + 5e-7), 1.0);
  EXPECT_THROW(clip_probability(1.01), IntegrationAccuracyError);
}

}  // namespace

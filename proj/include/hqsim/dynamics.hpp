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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "hqsim/model.hpp"
#include "hqsim/parallel.hpp"
#include "hqsim/pulse.hpp"

namespace hqsim {

using Complex = std::complex<double>;
using DensityMatrix = Eigen::Matrix4cd;

struct QubitState {
  DensityMatrix rho = DensityMatrix::Zero();

  /// Pure instantaneous eigenstate k of H(eps).
  static QubitState eigenstate(int k, double eps, const ModelParams& params);
  static QubitState pure(const Eigen::Vector4cd& psi);

  double trace_error() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
  double purity() const;
  /// Empty when trace, hermiticity and positivity hold to the given tolerances.
  std::vector<std::string> errors(double trace_tol = 1e-9, double herm_tol = 1e-12,
                                  double pos_tol = 1e-9) const;
};

struct T1Point {
  double eps = 0.0;    ///< h*GHz
  double t1_ns = 0.0;  ///< ns
};

/// Detuning-dependent relaxation time, log-linear between knots. An empty
/// table means no relaxation.
class T1Profile {
 public:
  T1Profile() = default;
  explicit T1Profile(std::vector<T1Point> table, bool extrapolate = false);

  /// T1 in ns. Outside the knot range: clamps to the end knot when
  /// extrapolation is enabled, otherwise throws RangeError.
  double eval(double eps) const;
  /// 1/T1 in 1/ns, 0 for an empty table.
  double rate(double eps) const;

  bool empty() const { return table_.empty(); }
  bool extrapolate() const { return extrapolate_; }
  const std::vector<T1Point>& table() const { return table_; }

  static std::vector<std::string> table_errors(const std::vector<T1Point>& table);

  /// Synthetic profile: 20 ns hot spot at eps = -20 h*GHz in the charge-like
  /// region, 102 us at the readout point eps = +200 h*GHz.
  static std::vector<T1Point> synthetic_default();

 private:
  std::vector<T1Point> table_;
  bool extrapolate_ = false;
};

struct NoiseModel {
  /// Standard deviation of the per-shot quasistatic detuning offset (h*GHz).
  double sigma_eps = 0.0;
  std::vector<T1Point> t1_table;
  bool t1_extrapolate = false;
  int n_realizations = 1;
  std::uint64_t seed = 0;

  std::vector<std::string> errors() const;
  void validate() const;
  T1Profile t1() const { return T1Profile(t1_table, t1_extrapolate); }
};

/// Stratified Gaussian offsets sigma * Phi^-1((r + u_r)/n), one per
/// realization, with u_r drawn from the realization's own RNG stream. All
/// zeros when sigma_eps == 0.
std::vector<double> quasistatic_offsets(const NoiseModel& noise);

struct IntegratorOptions {
  /// RK4 step is at most 1/(steps_per_period * f_max).
  double steps_per_period = 40.0;
  /// Repeat each run at half the step and fail if any rho entry moves by
  /// more than verify_tol.
  bool verify = false;
  double verify_tol = 1e-4;
  Execution execution = Execution::parallel;
};

/// Largest frequency the integrator must resolve inside a segment:
/// max(delta_R, f_mw, E3 - E0 over the segment's detuning range).
double max_frequency(const PulseSegment& seg, const ModelParams& params, double offset);

struct RealizationResult {
  DensityMatrix rho;
  /// Integrated relaxation flux, the probability that left eigenstate 1
  /// through the Lindblad channel.
  double relaxed = 0.0;
};

/// Single noise realization: the constant offset is added to the detuning
/// throughout. Lab-frame RK4 of
///   drho/dt = -i 2 pi [H(eps(t)), rho] + Gamma1(eps) D[|u0><u1|] rho
/// with u0, u1 the instantaneous eigenvectors of the slow detuning.
RealizationResult evolve_realization(const DensityMatrix& rho0, const PulseProgram& program,
                                     const ModelParams& params, const T1Profile& t1,
                                     double offset, const IntegratorOptions& opts = {});

/// Heisenberg-picture propagation of an observable backward through the
/// program: returns O0 with Tr(O0 rho) = Tr(obs rho_final) for every rho.
DensityMatrix evolve_observable_backward(const DensityMatrix& obs, const PulseProgram& program,
                                         const ModelParams& params, const T1Profile& t1,
                                         double offset, const IntegratorOptions& opts = {});

/// Noise-averaged evolution of a fixed initial state.
QubitState evolve(const QubitState& state, const PulseProgram& program, const ModelParams& params,
                  const NoiseModel& noise, const IntegratorOptions& opts = {});

/// Populations of the instantaneous eigenstates of H(eps).
Eigen::Vector4d populations(const DensityMatrix& rho, double eps, const ModelParams& params);

/// Projector onto eigenstate k of H(eps).
DensityMatrix eigen_projector(int k, double eps, const ModelParams& params);

using Liouvillian = Eigen::Matrix<Complex, 16, 16>;

/// Generator of the master equation at fixed detuning, acting on the
/// column-major vectorization of rho.
Liouvillian liouvillian(double eps, const ModelParams& params, double gamma);

/// |<i| dH/deps |j>| at eps.
double drive_coupling(int i, int j, double eps, const ModelParams& params);

}  // namespace hqsim

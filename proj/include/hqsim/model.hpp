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

#include <array>
#include <span>
#include <string>
#include <vector>

namespace hqsim {

using Matrix4 = Eigen::Matrix4d;
using Vector4 = Eigen::Vector4d;

/// Toy-model parameters of the four-level hybrid qubit, energies in h*GHz.
struct ModelParams {
  double delta_l = 3.0;
  double delta_r = 95.8;
  std::array<double, 4> t = {1.8, 7.1, 11.5, 6.3};
  /// Gate lever arm (eV of detuning per V of gate swing).
  double lever_arm = 0.028;

  /// Values fitted to the measured dispersion of the GaAs device.
  static ModelParams reference() { return {}; }

  /// Hard invariant violations (non-positive splittings, negative couplings).
  std::vector<std::string> errors() const;
  /// Soft warnings, e.g. delta_r <= delta_l.
  std::vector<std::string> warnings() const;
  /// Throws ConfigError when errors() is non-empty.
  void validate() const;

  double max_tunnel() const;
};

/// Basis order: (2,1)g, (2,1)e, (1,2)g, (1,2)e.
Matrix4 build_hamiltonian(double eps, const ModelParams& params);

/// d H / d eps, constant because the detuning enters linearly.
Matrix4 detuning_derivative();

struct LevelSet {
  double detuning = 0.0;
  Vector4 energies;  ///< ascending, h*GHz
  Matrix4 vectors;   ///< column k is the eigenvector of energies[k]
};

LevelSet levels(double eps, const ModelParams& params);

/// E1 - E0 in GHz.
double qubit_splitting(double eps, const ModelParams& params);

struct DispersionRow {
  double eps = 0.0;
  std::array<double, 4> energies{};
  double f_qubit = 0.0;
};

std::vector<DispersionRow> dispersion_scan(std::span<const double> eps_grid,
                                           const ModelParams& params);

/// CSV with header `eps_hghz,E0,E1,E2,E3,f_qubit_ghz`.
std::string dispersion_csv(std::span<const DispersionRow> rows);

/// Gate swing (V) to detuning energy (h*GHz) through the lever arm.
double gate_to_detuning(double delta_v, const ModelParams& params);
/// Inverse of gate_to_detuning.
double detuning_to_gate(double eps, const ModelParams& params);

/// Bisection for qubit_splitting(eps) == f_target inside [lo, hi]. Throws
/// RangeError when the bracket does not straddle the target, since the
/// dispersion is not monotonic globally.
double find_detuning_for_frequency(double f_target, double lo, double hi,
                                   const ModelParams& params, double tol = 1e-10);

/// Minimum of the qubit splitting inside [lo, hi] (golden section after a
/// coarse scan). Returns {eps, f}.
std::pair<double, double> splitting_minimum(double lo, double hi, const ModelParams& params);

}  // namespace hqsim

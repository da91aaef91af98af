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

#include "hqsim/model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "hqsim/error.hpp"
#include "hqsim/units.hpp"

namespace hqsim {

std::vector<std::string> ModelParams::errors() const {
  std::vector<std::string> out;
  if (!(delta_l > 0.0)) out.push_back(fmt::format("delta_L must be > 0 (got {})", delta_l));
  if (!(delta_r > 0.0)) out.push_back(fmt::format("delta_R must be > 0 (got {})", delta_r));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= 0.0) || !std::isfinite(t[i])) {
      out.push_back(fmt::format("t{} must be >= 0 (got {})", i + 1, t[i]));
    }
  }
  if (!(lever_arm > 0.0)) out.push_back(fmt::format("lever_arm must be > 0 (got {})", lever_arm));
  return out;
}

std::vector<std::string> ModelParams::warnings() const {
  std::vector<std::string> out;
  if (delta_r <= delta_l) {
    out.push_back(fmt::format("delta_R ({}) <= delta_L ({}): outside the asymmetric-splitting regime",
                              delta_r, delta_l));
  }
  return out;
}

void ModelParams::validate() const {
  auto errs = errors();
  if (!errs.empty()) throw ConfigError("invalid model parameters: " + errs.front());
}

double ModelParams::max_tunnel() const { return *std::max_element(t.begin(), t.end()); }

Matrix4 build_hamiltonian(double eps, const ModelParams& p) {
  const double h = 0.5 * eps;
  Matrix4 m;
  // clang-format off
  m <<  h,        0.0,           p.t[0],  -p.t[1],
        0.0,      h + p.delta_l, -p.t[2],  p.t[3],
        p.t[0],  -p.t[2],        -h,       0.0,
       -p.t[1],   p.t[3],         0.0,    -h + p.delta_r;
  // clang-format on
  return m;
}

Matrix4 detuning_derivative() { return Vector4(0.5, 0.5, -0.5, -0.5).asDiagonal(); }

LevelSet levels(double eps, const ModelParams& params) {
  Eigen::SelfAdjointEigenSolver<Matrix4> solver(build_hamiltonian(eps, params));
  LevelSet out;
  out.detuning = eps;
  out.energies = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  return out;
}

double qubit_splitting(double eps, const ModelParams& params) {
  const Vector4 e = Eigen::SelfAdjointEigenSolver<Matrix4>(build_hamiltonian(eps, params),
                                                           Eigen::EigenvaluesOnly)
                        .eigenvalues();
  return e[1] - e[0];
}

std::vector<DispersionRow> dispersion_scan(std::span<const double> eps_grid,
                                           const ModelParams& params) {
  std::vector<DispersionRow> rows;
  rows.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    const LevelSet ls = levels(eps, params);
    DispersionRow row;
    row.eps = eps;
    for (int k = 0; k < 4; ++k) row.energies[k] = ls.energies[k];
    row.f_qubit = ls.energies[1] - ls.energies[0];
    rows.push_back(row);
  }
  return rows;
}

std::string dispersion_csv(std::span<const DispersionRow> rows) {
  std::string out = "eps_hghz,E0,E1,E2,E3,f_qubit_ghz\n";
  for (const auto& r : rows) {
    out += fmt::format("{:.10g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", r.eps, r.energies[0],
                       r.energies[1], r.energies[2], r.energies[3], r.f_qubit);
  }
  return out;
}

double gate_to_detuning(double delta_v, const ModelParams& params) {
  const double micro_ev = params.lever_arm * delta_v * 1e6;
  return units::micro_ev_to_hghz(micro_ev);
}

double detuning_to_gate(double eps, const ModelParams& params) {
  return units::hghz_to_micro_ev(eps) * 1e-6 / params.lever_arm;
}

double find_detuning_for_frequency(double f_target, double lo, double hi,
                                   const ModelParams& params, double tol) {
  if (!(lo < hi)) throw RangeError(fmt::format("empty bracket [{}, {}]", lo, hi));
  double g_lo = qubit_splitting(lo, params) - f_target;
  const double g_hi = qubit_splitting(hi, params) - f_target;
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if ((g_lo > 0.0) == (g_hi > 0.0)) {
    throw RangeError(fmt::format(
        "bracket [{}, {}] does not straddle f = {} GHz (splitting {} .. {} GHz at the ends)", lo, hi,
        f_target, g_lo + f_target, g_hi + f_target));
  }
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = qubit_splitting(mid, params) - f_target;
    if ((g_mid > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::pair<double, double> splitting_minimum(double lo, double hi, const ModelParams& params) {
  constexpr int kCoarse = 400;
  double best_eps = lo;
  double best_f = qubit_splitting(lo, params);
  const double step = (hi - lo) / kCoarse;
  for (int i = 1; i <= kCoarse; ++i) {
    const double e = lo + i * step;
    const double f = qubit_splitting(e, params);
    if (f < best_f) {
      best_f = f;
      best_eps = e;
    }
  }
  double a = std::max(lo, best_eps - step);
  double b = std::min(hi, best_eps + step);
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = qubit_splitting(c, params);
  double fd = qubit_splitting(d, params);
  for (int it = 0; it < 100 && b - a > 1e-10; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = qubit_splitting(c, params);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = qubit_splitting(d, params);
    }
  }
  const double eps = 0.5 * (a + b);
  return {eps, qubit_splitting(eps, params)};
}

}  // namespace hqsim

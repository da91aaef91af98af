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

#include "hqsim/fitting.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <fmt/format.h>

#include "hqsim/error.hpp"
#include "hqsim/units.hpp"

namespace hqsim::fit {
namespace {

using units::kPi;
using units::kTwoPi;

void check_sizes(std::span<const double> x, std::span<const double> y, std::size_t min_n) {
  if (x.size() != y.size()) throw FitError("abscissa and ordinate sizes differ");
  if (x.size() < min_n) throw FitError(fmt::format("need at least {} points, got {}", min_n, x.size()));
}

struct Projection {
  Eigen::Vector3d coef;
  double sse = 0.0;
};

// Least squares onto {1, env*cos, env*sin} at frequency f.
Projection project(std::span<const double> t, std::span<const double> y, double f,
                   double decay_time) {
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d aty = Eigen::Vector3d::Zero();
  double yy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double env = decay_time > 0.0 ? std::exp(-std::pow(t[i] / decay_time, 2)) : 1.0;
    const double w = kTwoPi * f * t[i];
    const Eigen::Vector3d row(1.0, env * std::cos(w), env * std::sin(w));
    ata.noalias() += row * row.transpose();
    aty.noalias() += row * y[i];
    yy += y[i] * y[i];
  }
  Projection p;
  p.coef = ata.ldlt().solve(aty);
  if (!p.coef.allFinite()) p.coef = ata.completeOrthogonalDecomposition().solve(aty);
  p.sse = std::max(0.0, yy - p.coef.dot(aty));
  return p;
}

double scan_frequency(std::span<const double> t, std::span<const double> y, double f_lo,
                      double f_hi, int n, double decay_time) {
  double best_f = f_lo;
  double best = std::numeric_limits<double>::infinity();
  const double step = (f_hi - f_lo) / std::max(1, n - 1);
  for (int k = 0; k < n; ++k) {
    const double f = f_lo + k * step;
    const double sse = project(t, y, f, decay_time).sse;
    if (sse < best) {
      best = sse;
      best_f = f;
    }
  }
  const double a = std::max(f_lo, best_f - step);
  const double b = std::min(f_hi, best_f + step);
  return golden_section([&](double f) { return project(t, y, f, decay_time).sse; }, a, b, 1e-12);
}

}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a + kPi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a - kPi;
}

double golden_section(const std::function<double(double)>& f, double a, double b, double tol,
                      int max_iter) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

LinearFit linear(std::span<const double> x, std::span<const double> y) {
  check_sizes(x, y, 2);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw FitError("degenerate abscissa in linear fit");
  LinearFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (out.slope * x[i] + out.intercept);
    sse += r * r;
  }
  out.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return out;
}

SinusoidFit sinusoid(std::span<const double> t, std::span<const double> y, double f_lo,
                     double f_hi, int scan_points) {
  check_sizes(t, y, 4);
  if (!(f_lo > 0.0 && f_hi > f_lo)) throw FitError("invalid frequency bracket");
  const double f = scan_frequency(t, y, f_lo, f_hi, scan_points, 0.0);
  const auto p = project(t, y, f, 0.0);
  SinusoidFit out;
  out.frequency = f;
  out.offset = p.coef[0];
  out.amplitude = std::hypot(p.coef[1], p.coef[2]);
  // b cos(w) + c sin(w) = A cos(w + phase) with phase = atan2(-c, b)
  out.phase = std::atan2(-p.coef[2], p.coef[1]);
  out.rms_residual = std::sqrt(p.sse / static_cast<double>(t.size()));
  return out;
}

DampedSinusoidFit gaussian_damped_sinusoid(std::span<const double> t, std::span<const double> y,
                                           double f_lo, double f_hi, double t_lo, double t_hi) {
  check_sizes(t, y, 6);
  if (!(t_lo > 0.0 && t_hi > t_lo)) throw FitError("invalid decay-time bracket");
  const int scan = 1000;
  double f = scan_frequency(t, y, f_lo, f_hi, scan, 0.0);
  const double df = (f_hi - f_lo) / (scan - 1);
  auto sse_at = [&](double ff, double tt) { return project(t, y, ff, tt).sse; };

  // coarse log scan in T, then alternate 1-D refinements
  double log_t = std::log(t_lo);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 120; ++k) {
    const double lt = std::log(t_lo) + (std::log(t_hi) - std::log(t_lo)) * k / 120.0;
    const double s = sse_at(f, std::exp(lt));
    if (s < best) {
      best = s;
      log_t = lt;
    }
  }
  const double dlt = (std::log(t_hi) - std::log(t_lo)) / 120.0;
  double f_half = 2.0 * df;
  double lt_half = 2.0 * dlt;
  for (int round = 0; round < 8; ++round) {
    f = golden_section([&](double ff) { return sse_at(ff, std::exp(log_t)); },
                       std::max(f_lo, f - f_half), std::min(f_hi, f + f_half), 1e-13);
    log_t = golden_section([&](double lt) { return sse_at(f, std::exp(lt)); },
                           std::max(std::log(t_lo), log_t - lt_half),
                           std::min(std::log(t_hi), log_t + lt_half), 1e-13);
    f_half *= 0.6;
    lt_half *= 0.6;
  }
  const double tau = std::exp(log_t);
  const auto p = project(t, y, f, tau);
  DampedSinusoidFit out;
  out.frequency = f;
  out.decay_time = tau;
  out.offset = p.coef[0];
  out.amplitude = std::hypot(p.coef[1], p.coef[2]);
  out.phase = std::atan2(-p.coef[2], p.coef[1]);
  out.rms_residual = std::sqrt(p.sse / static_cast<double>(t.size()));
  return out;
}

PhaseFit phase_sinusoid(std::span<const double> phi, std::span<const double> y) {
  check_sizes(phi, y, 3);
  Eigen::MatrixXd a(phi.size(), 3);
  Eigen::VectorXd b(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::sin(phi[i]);
    a(i, 2) = std::cos(phi[i]);
    b[i] = y[i];
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
  // s sin + k cos = A sin(phi + phase), A cos(phase) = s, A sin(phase) = k
  PhaseFit out;
  out.offset = c[0];
  out.amplitude = std::hypot(c[1], c[2]);
  out.phase = std::atan2(c[2], c[1]);
  return out;
}

Spectrum magnitude_spectrum(std::span<const double> y, double dt) {
  const int n = static_cast<int>(y.size());
  if (n < 4) throw FitError("spectrum needs at least 4 samples");
  if (!(dt > 0.0)) throw FitError("sample spacing must be positive");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  std::vector<double> in(y.begin(), y.end());
  for (double& v : in) v -= mean;
  const int nc = n / 2 + 1;
  std::vector<fftw_complex> out(nc);
  // FFTW_ESTIMATE does not touch the input, and plan creation is not thread safe.
  fftw_plan plan;
#pragma omp critical(hqsim_fftw_plan)
  plan = fftw_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE);
  fftw_execute(plan);
#pragma omp critical(hqsim_fftw_plan)
  fftw_destroy_plan(plan);

  Spectrum s;
  s.bin_width = 1.0 / (n * dt);
  s.frequency.resize(nc);
  s.magnitude.resize(nc);
  int peak = 1;
  for (int k = 0; k < nc; ++k) {
    s.frequency[k] = k * s.bin_width;
    s.magnitude[k] = std::hypot(out[k][0], out[k][1]);
    if (k >= 1 && s.magnitude[k] > s.magnitude[peak]) peak = k;
  }
  s.peak_frequency = s.frequency[peak];
  return s;
}

}  // namespace hqsim::fit

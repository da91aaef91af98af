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

#include <functional>
#include <span>
#include <vector>

namespace hqsim::fit {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope*x + intercept. Needs >= 2 distinct x.
LinearFit linear(std::span<const double> x, std::span<const double> y);

/// y ~ offset + amplitude*cos(2 pi f t + phase).
struct SinusoidFit {
  double frequency = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  double rms_residual = 0.0;
};

/// Variable projection: the linear coefficients are solved exactly for each
/// trial frequency; the frequency is located by a dense scan over
/// [f_lo, f_hi] followed by golden-section refinement.
SinusoidFit sinusoid(std::span<const double> t, std::span<const double> y, double f_lo,
                     double f_hi, int scan_points = 2000);

/// y ~ offset + exp(-(t/T)^2) * amplitude*cos(2 pi f t + phase). Gaussian
/// envelope as produced by quasistatic detuning noise.
struct DampedSinusoidFit {
  double frequency = 0.0;
  double decay_time = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  double rms_residual = 0.0;
};

DampedSinusoidFit gaussian_damped_sinusoid(std::span<const double> t, std::span<const double> y,
                                           double f_lo, double f_hi, double t_lo, double t_hi);

/// y ~ offset + amplitude*sin(phi + phase), linear least squares.
struct PhaseFit {
  double amplitude = 0.0;
  double phase = 0.0;
  double offset = 0.0;
};

PhaseFit phase_sinusoid(std::span<const double> phi, std::span<const double> y);

struct Spectrum {
  std::vector<double> frequency;
  std::vector<double> magnitude;
  double bin_width = 0.0;
  double peak_frequency = 0.0;
};

/// Magnitude spectrum of a uniformly sampled signal with its mean removed.
/// The peak search skips the DC bin.
Spectrum magnitude_spectrum(std::span<const double> y, double dt);

/// Minimizes f on [a, b] by golden-section search; returns the abscissa.
double golden_section(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-10, int max_iter = 200);

/// Maps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace hqsim::fit

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

#include <stdexcept>
#include <string>

namespace hqsim {

/// Base class for every error raised by the toolkit. `code()` is the stable
/// machine-readable identifier reported by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Invalid input: bad parameters, schema violations, malformed files.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

/// Query outside the domain of a tabulated function or search bracket.
class RangeError : public Error {
 public:
  explicit RangeError(const std::string& message) : Error("range_error", message) {}
};

/// Family of numerical failures. The CLI maps all of these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IntegrationAccuracyError : public NumericalError {
 public:
  explicit IntegrationAccuracyError(const std::string& message)
      : NumericalError("integration_accuracy", message) {}
};

class SolverError : public NumericalError {
 public:
  SolverError(const std::string& message, double residual)
      : NumericalError("solver_nonconvergence", message), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class CapacityError : public NumericalError {
 public:
  explicit CapacityError(const std::string& message) : NumericalError("capacity", message) {}
};

class FitError : public NumericalError {
 public:
  explicit FitError(const std::string& message) : NumericalError("fit_error", message) {}
};

class StatisticsError : public NumericalError {
 public:
  explicit StatisticsError(const std::string& message)
      : NumericalError("insufficient_statistics", message) {}
};

class AnalysisError : public NumericalError {
 public:
  explicit AnalysisError(const std::string& message) : NumericalError("analysis_error", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

}  // namespace hqsim

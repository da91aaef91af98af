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

#include <string>
#include <vector>

/// Minimal self-contained SVG rendering for quick looks at CLI output. The
/// CSV files stay the canonical artifacts.
namespace hqsim::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
};

std::string line_plot(const Axes& axes, const std::vector<Series>& series);

/// z[ix * y.size() + iy], colored on a blue-yellow ramp.
std::string heatmap(const Axes& axes, const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& z);

}  // namespace hqsim::svg

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

#include "svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace hqsim::svg {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 54.0;

constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-300) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  Range xr, yr;
  double px(double x) const { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kHeight - kTop - kBottom); }
};

std::string open(const Axes& axes, const Frame& f) {
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kWidth, kHeight);
  s += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", kWidth / 2,
                   escape(axes.title));
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (kLeft + kWidth - kRight) / 2,
                   kHeight - 12, escape(axes.x_label));
  s += fmt::format("<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
                   (kTop + kHeight - kBottom) / 2, escape(axes.y_label));
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.xr.lo + k * (f.xr.hi - f.xr.lo) / 4;
    const double yv = f.yr.lo + k * (f.yr.hi - f.yr.lo) / 4;
    s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", f.px(xv),
                     kHeight - kBottom + 16, xv);
    s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n", kLeft - 6, f.py(yv) + 4, yv);
  }
  return s;
}

std::string close() {
  return fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n</svg>\n",
                     kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom);
}

std::string color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  // dark blue -> teal -> yellow
  const double r = t < 0.5 ? 30 + 2 * t * (40 - 30) : 40 + (2 * t - 1) * (250 - 40);
  const double g = t < 0.5 ? 30 + 2 * t * (150 - 30) : 150 + (2 * t - 1) * (230 - 150);
  const double b = t < 0.5 ? 110 + 2 * t * (140 - 110) : 140 - (2 * t - 1) * (140 - 40);
  return fmt::format("#{:02x}{:02x}{:02x}", int(r), int(g), int(b));
}

}  // namespace

std::string line_plot(const Axes& axes, const std::vector<Series>& series) {
  Frame f;
  for (const auto& s : series) {
    for (double v : s.x) f.xr.add(v);
    for (double v : s.y) f.yr.add(v);
  }
  f.xr.finish();
  f.yr.finish();
  std::string out = open(axes, f);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts += fmt::format("{:.2f},{:.2f} ", f.px(s.x[i]), f.py(s.y[i]));
    }
    const char* c = kPalette[k % kPalette.size()];
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", c, pts);
    if (!s.name.empty()) {
      out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kLeft + 8, kTop + 16 + 14 * k, c,
                         escape(s.name));
    }
  }
  return out + close();
}

std::string heatmap(const Axes& axes, const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& z) {
  Frame f;
  for (double v : x) f.xr.add(v);
  for (double v : y) f.yr.add(v);
  f.xr.finish();
  f.yr.finish();
  Range zr;
  for (double v : z) zr.add(v);
  zr.finish();
  std::string out = open(axes, f);
  const double cw = (kWidth - kLeft - kRight) / std::max<std::size_t>(x.size(), 1);
  const double ch = (kHeight - kTop - kBottom) / std::max<std::size_t>(y.size(), 1);
  for (std::size_t ix = 0; ix < x.size(); ++ix) {
    for (std::size_t iy = 0; iy < y.size(); ++iy) {
      const double v = z[ix * y.size() + iy];
      out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                         kLeft + ix * cw, kHeight - kBottom - (iy + 1) * ch, cw + 0.05, ch + 0.05,
                         color((v - zr.lo) / (zr.hi - zr.lo)));
    }
  }
  return out + close();
}

}  // namespace hqsim::svg

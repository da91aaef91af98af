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

#include "hqsim/dynamics.hpp"

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hqsim/error.hpp"
#include "hqsim/units.hpp"

namespace hqsim {
namespace {

using units::kTwoPi;
using Vec4c = Eigen::Vector4cd;

// Relaxation channel |u0><u1| at one detuning.
struct Channel {
  Eigen::Vector4d u0 = Eigen::Vector4d::Zero();
  Eigen::Vector4d u1 = Eigen::Vector4d::Zero();
  double gamma = 0.0;
};

Channel channel_at(double eps, const ModelParams& params, const T1Profile& t1) {
  Channel c;
  if (t1.empty()) return c;
  c.gamma = t1.rate(eps);
  if (c.gamma > 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(build_hamiltonian(eps, params));
    c.u0 = es.eigenvectors().col(0);
    c.u1 = es.eigenvectors().col(1);
  }
  return c;
}

struct State {
  DensityMatrix m;
  double j = 0.0;
};

// Schroedinger-picture generator; also returns the relaxation flux.
void forward_rhs(const Matrix4& h, const Channel& ch, const DensityMatrix& rho, DensityMatrix& out,
                 double& flux) {
  const DensityMatrix a = h.cast<Complex>() * rho;
  out = Complex(0.0, -kTwoPi) * (a - a.adjoint());
  flux = 0.0;
  if (ch.gamma > 0.0) {
    const Vec4c u1 = ch.u1.cast<Complex>();
    const Vec4c v = rho * u1;
    const double p = u1.dot(v).real();
    const Vec4c u0 = ch.u0.cast<Complex>();
    out += ch.gamma * (p * (u0 * u0.transpose()) - 0.5 * (u1 * v.adjoint() + v * u1.transpose()));
    flux = ch.gamma * p;
  }
}

// Adjoint generator L^dagger acting on an observable.
void adjoint_rhs(const Matrix4& h, const Channel& ch, const DensityMatrix& obs, DensityMatrix& out) {
  const DensityMatrix a = h.cast<Complex>() * obs;
  out = Complex(0.0, kTwoPi) * (a - a.adjoint());
  if (ch.gamma > 0.0) {
    const Vec4c u0 = ch.u0.cast<Complex>();
    const Vec4c u1 = ch.u1.cast<Complex>();
    const Vec4c w = obs * u1;
    const double q = u0.dot(obs * u0).real();
    out += ch.gamma * (q * (u1 * u1.transpose()) - 0.5 * (u1 * w.adjoint() + w * u1.transpose()));
  }
}

int step_count(const PulseSegment& seg, const ModelParams& params, double offset,
               double steps_per_period) {
  const double fmax = max_frequency(seg, params, offset);
  const double n = std::ceil(seg.duration * steps_per_period * fmax);
  return std::max(1, static_cast<int>(n));
}

// Channel cache keyed on local time; ramps need a fresh eigenbasis per stage.
class ChannelSource {
 public:
  ChannelSource(const PulseSegment& seg, const ModelParams& params, const T1Profile& t1,
                double offset)
      : seg_(seg), params_(params), t1_(t1), offset_(offset) {
    constant_ = seg.kind != SegmentKind::ramp || t1.empty();
    if (constant_) fixed_ = channel_at(seg.slow_detuning(0.0) + offset, params, t1);
  }

  const Channel& at(double t) {
    if (constant_) return fixed_;
    if (have_a_ && t == t_a_) return a_;
    if (have_b_ && t == t_b_) return b_;
    // keep the two most recent; evict the older
    std::swap(a_, b_);
    std::swap(t_a_, t_b_);
    std::swap(have_a_, have_b_);
    b_ = channel_at(seg_.slow_detuning(t) + offset_, params_, t1_);
    t_b_ = t;
    have_b_ = true;
    return b_;
  }

 private:
  const PulseSegment& seg_;
  const ModelParams& params_;
  const T1Profile& t1_;
  double offset_;
  bool constant_ = true;
  Channel fixed_;
  Channel a_, b_;
  double t_a_ = 0.0, t_b_ = 0.0;
  bool have_a_ = false, have_b_ = false;
};

State run_forward(const DensityMatrix& rho0, const PulseProgram& program, const ModelParams& params,
                  const T1Profile& t1, double offset, double steps_per_period) {
  State s{rho0, 0.0};
  DensityMatrix k1, k2, k3, k4;
  double j1, j2, j3, j4;
  for (const auto& seg : program) {
    seg.validate();
    const int n = step_count(seg, params, offset, steps_per_period);
    const double dt = seg.duration / n;
    ChannelSource channels(seg, params, t1, offset);
    for (int i = 0; i < n; ++i) {
      const double t = i * dt;
      const double tm = t + 0.5 * dt;
      const double te = (i + 1 == n) ? seg.duration : (i + 1) * dt;
      const Matrix4 h0 = build_hamiltonian(seg.detuning(t) + offset, params);
      const Matrix4 hm = build_hamiltonian(seg.detuning(tm) + offset, params);
      const Matrix4 h1 = build_hamiltonian(seg.detuning(te) + offset, params);
      const Channel c0 = channels.at(t);
      const Channel cm = channels.at(tm);
      const Channel c1 = channels.at(te);
      forward_rhs(h0, c0, s.m, k1, j1);
      forward_rhs(hm, cm, s.m + (0.5 * dt) * k1, k2, j2);
      forward_rhs(hm, cm, s.m + (0.5 * dt) * k2, k3, j3);
      forward_rhs(h1, c1, s.m + dt * k3, k4, j4);
      s.m += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      s.j += (dt / 6.0) * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
    }
    // every stage is Hermitian; this only removes rounding drift
    s.m = 0.5 * (s.m + s.m.adjoint()).eval();
  }
  return s;
}

DensityMatrix run_backward(const DensityMatrix& obs, const PulseProgram& program,
                           const ModelParams& params, const T1Profile& t1, double offset,
                           double steps_per_period) {
  DensityMatrix o = obs;
  DensityMatrix k1, k2, k3, k4;
  for (auto it = program.rbegin(); it != program.rend(); ++it) {
    const auto& seg = *it;
    seg.validate();
    const int n = step_count(seg, params, offset, steps_per_period);
    const double dt = seg.duration / n;
    ChannelSource channels(seg, params, t1, offset);
    for (int i = n; i > 0; --i) {
      // step from t to t - dt with dO/ds = -L^dagger(O)
      const double t = (i == n) ? seg.duration : i * dt;
      const double tm = t - 0.5 * dt;
      const double te = (i - 1) * dt;
      const Matrix4 h0 = build_hamiltonian(seg.detuning(t) + offset, params);
      const Matrix4 hm = build_hamiltonian(seg.detuning(tm) + offset, params);
      const Matrix4 h1 = build_hamiltonian(seg.detuning(te) + offset, params);
      const Channel c0 = channels.at(t);
      const Channel cm = channels.at(tm);
      const Channel c1 = channels.at(te);
      adjoint_rhs(h0, c0, o, k1);
      adjoint_rhs(hm, cm, o + (0.5 * dt) * k1, k2);
      adjoint_rhs(hm, cm, o + (0.5 * dt) * k2, k3);
      adjoint_rhs(h1, c1, o + dt * k3, k4);
      o += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    o = 0.5 * (o + o.adjoint()).eval();
  }
  return o;
}

void check_halving(const DensityMatrix& a, const DensityMatrix& b, double tol) {
  const double diff = (a - b).cwiseAbs().maxCoeff();
  if (!(diff <= tol)) {
    throw IntegrationAccuracyError(
        fmt::format("step halving changed rho by {:.3e} (tolerance {:.1e})", diff, tol));
  }
}

}  // namespace

// ---------------------------------------------------------------- QubitState

QubitState QubitState::eigenstate(int k, double eps, const ModelParams& params) {
  if (k < 0 || k > 3) throw RangeError(fmt::format("eigenstate index {} outside 0..3", k));
  const auto ls = levels(eps, params);
  return pure(ls.vectors.col(k).cast<Complex>());
}

QubitState QubitState::pure(const Eigen::Vector4cd& psi) {
  QubitState s;
  const Vec4c n = psi / psi.norm();
  s.rho = n * n.adjoint();
  return s;
}

double QubitState::trace_error() const { return std::abs(rho.trace() - Complex(1.0, 0.0)); }

double QubitState::hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

double QubitState::min_eigenvalue() const {
  const DensityMatrix h = 0.5 * (rho + rho.adjoint());
  return Eigen::SelfAdjointEigenSolver<DensityMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

double QubitState::purity() const { return (rho * rho).trace().real(); }

std::vector<std::string> QubitState::errors(double trace_tol, double herm_tol, double pos_tol) const {
  std::vector<std::string> out;
  if (trace_error() > trace_tol) out.push_back(fmt::format("trace off by {:.3e}", trace_error()));
  if (hermiticity_error() > herm_tol) {
    out.push_back(fmt::format("not Hermitian ({:.3e})", hermiticity_error()));
  }
  if (min_eigenvalue() < -pos_tol) out.push_back(fmt::format("negative eigenvalue {:.3e}", min_eigenvalue()));
  return out;
}

// ----------------------------------------------------------------- T1Profile

T1Profile::T1Profile(std::vector<T1Point> table, bool extrapolate)
    : table_(std::move(table)), extrapolate_(extrapolate) {
  const auto errs = table_errors(table_);
  if (!errs.empty()) throw ConfigError(errs.front());
}

std::vector<std::string> T1Profile::table_errors(const std::vector<T1Point>& table) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!(table[i].t1_ns > 0.0) || !std::isfinite(table[i].t1_ns)) {
      out.push_back(fmt::format("t1_table[{}]: T1 must be > 0 (got {})", i, table[i].t1_ns));
    }
    if (!std::isfinite(table[i].eps)) out.push_back(fmt::format("t1_table[{}]: non-finite eps", i));
    if (i > 0 && !(table[i].eps > table[i - 1].eps)) {
      out.push_back(fmt::format("t1_table[{}]: eps must be strictly increasing", i));
    }
  }
  return out;
}

double T1Profile::eval(double eps) const {
  if (table_.empty()) return std::numeric_limits<double>::infinity();
  if (table_.size() == 1) return table_.front().t1_ns;
  if (eps < table_.front().eps || eps > table_.back().eps) {
    if (!extrapolate_) {
      throw RangeError(fmt::format("T1 queried at eps = {} outside table [{}, {}]", eps,
                                   table_.front().eps, table_.back().eps));
    }
    return eps < table_.front().eps ? table_.front().t1_ns : table_.back().t1_ns;
  }
  const auto hi = std::lower_bound(table_.begin(), table_.end(), eps,
                                   [](const T1Point& p, double e) { return p.eps < e; });
  if (hi->eps == eps) return hi->t1_ns;
  const auto lo = hi - 1;
  const double w = (eps - lo->eps) / (hi->eps - lo->eps);
  return std::exp((1.0 - w) * std::log(lo->t1_ns) + w * std::log(hi->t1_ns));
}

double T1Profile::rate(double eps) const { return table_.empty() ? 0.0 : 1.0 / eval(eps); }

std::vector<T1Point> T1Profile::synthetic_default() {
  return {{-400.0, 5.0e4}, {-60.0, 2.0e3}, {-30.0, 400.0}, {-20.0, 20.0}, {-10.0, 400.0},
          {20.0, 5.0e3},   {100.0, 5.0e4}, {200.0, 1.02e5}, {400.0, 1.02e5}};
}

// ---------------------------------------------------------------- NoiseModel

std::vector<std::string> NoiseModel::errors() const {
  std::vector<std::string> out;
  if (!(sigma_eps >= 0.0) || !std::isfinite(sigma_eps)) {
    out.push_back(fmt::format("sigma_eps must be >= 0 (got {})", sigma_eps));
  }
  if (n_realizations < 1) out.push_back(fmt::format("n_realizations must be >= 1 (got {})", n_realizations));
  for (auto& e : T1Profile::table_errors(t1_table)) out.push_back(std::move(e));
  return out;
}

void NoiseModel::validate() const {
  const auto errs = errors();
  if (!errs.empty()) throw ConfigError("invalid noise model: " + errs.front());
}

std::vector<double> quasistatic_offsets(const NoiseModel& noise) {
  noise.validate();
  const int n = noise.n_realizations;
  std::vector<double> out(n, 0.0);
  if (noise.sigma_eps == 0.0) return out;
  const boost::math::normal_distribution<double> unit;
  for (int r = 0; r < n; ++r) {
    auto rng = parallel::stream_rng(noise.seed, static_cast<std::uint64_t>(r));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double u = u01(rng);
    u = std::clamp(u, 1e-12, 1.0 - 1e-12);
    out[r] = noise.sigma_eps * boost::math::quantile(unit, (r + u) / n);
  }
  return out;
}

// --------------------------------------------------------------- integration

double max_frequency(const PulseSegment& seg, const ModelParams& params, double offset) {
  const auto [lo, hi] = seg.detuning_range();
  auto spread = [&](double eps) {
    const auto e = Eigen::SelfAdjointEigenSolver<Matrix4>(build_hamiltonian(eps + offset, params),
                                                          Eigen::EigenvaluesOnly)
                       .eigenvalues();
    return e[3] - e[0];
  };
  // E3 - E0 is convex in eps, so the segment maximum sits at an end point.
  double f = std::max({params.delta_r, std::abs(seg.frequency), spread(lo), spread(hi)});
  return f;
}

RealizationResult evolve_realization(const DensityMatrix& rho0, const PulseProgram& program,
                                     const ModelParams& params, const T1Profile& t1,
                                     double offset, const IntegratorOptions& opts) {
  if (program.empty()) throw ConfigError("pulse program is empty");
  const State s = run_forward(rho0, program, params, t1, offset, opts.steps_per_period);
  if (!s.m.allFinite()) throw IntegrationAccuracyError("density matrix became non-finite");
  if (opts.verify) {
    const State half = run_forward(rho0, program, params, t1, offset, 2.0 * opts.steps_per_period);
    check_halving(s.m, half.m, opts.verify_tol);
  }
  return {s.m, s.j};
}

DensityMatrix evolve_observable_backward(const DensityMatrix& obs, const PulseProgram& program,
                                         const ModelParams& params, const T1Profile& t1,
                                         double offset, const IntegratorOptions& opts) {
  if (program.empty()) return obs;
  DensityMatrix o = run_backward(obs, program, params, t1, offset, opts.steps_per_period);
  if (opts.verify) {
    const DensityMatrix half = run_backward(obs, program, params, t1, offset, 2.0 * opts.steps_per_period);
    check_halving(o, half, opts.verify_tol);
  }
  return o;
}

QubitState evolve(const QubitState& state, const PulseProgram& program, const ModelParams& params,
                  const NoiseModel& noise, const IntegratorOptions& opts) {
  params.validate();
  const auto errs = state.errors();
  if (!errs.empty()) throw ConfigError("initial state invalid: " + errs.front());
  const auto offsets = quasistatic_offsets(noise);
  const T1Profile t1 = noise.t1();
  const int n = static_cast<int>(offsets.size());
  std::vector<DensityMatrix> results(n);
  parallel::for_tasks(n, opts.execution, [&](int r) {
    results[r] = evolve_realization(state.rho, program, params, t1, offsets[r], opts).rho;
  });
  QubitState out;
  out.rho.setZero();
  for (int r = 0; r < n; ++r) out.rho += results[r];
  out.rho /= static_cast<double>(n);
  return out;
}

Eigen::Vector4d populations(const DensityMatrix& rho, double eps, const ModelParams& params) {
  const auto ls = levels(eps, params);
  Eigen::Vector4d p;
  for (int k = 0; k < 4; ++k) {
    const Vec4c u = ls.vectors.col(k).cast<Complex>();
    p[k] = u.dot(rho * u).real();
  }
  return p;
}

DensityMatrix eigen_projector(int k, double eps, const ModelParams& params) {
  return QubitState::eigenstate(k, eps, params).rho;
}

Liouvillian liouvillian(double eps, const ModelParams& params, double gamma) {
  const Matrix4 h = build_hamiltonian(eps, params);
  const Matrix4 id = Matrix4::Identity();
  Liouvillian l = Liouvillian::Zero();
  // vec(A X B) = (B^T kron A) vec(X), column-major vec
  auto add_kron = [&](const Matrix4& p, const Matrix4& q, Complex scale) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          for (int m = 0; m < 4; ++m) l(i * 4 + k, j * 4 + m) += scale * p(i, j) * q(k, m);
  };
  add_kron(id, h, Complex(0.0, -kTwoPi));
  add_kron(h.transpose(), id, Complex(0.0, kTwoPi));
  if (gamma > 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(h);
    const Eigen::Vector4d u0 = es.eigenvectors().col(0);
    const Eigen::Vector4d u1 = es.eigenvectors().col(1);
    const Matrix4 jump = u0 * u1.transpose();
    const Matrix4 p1 = u1 * u1.transpose();
    add_kron(jump, jump, gamma);
    add_kron(id, p1, -0.5 * gamma);
    add_kron(p1, id, -0.5 * gamma);
  }
  return l;
}

double drive_coupling(int i, int j, double eps, const ModelParams& params) {
  const auto ls = levels(eps, params);
  return std::abs(ls.vectors.col(i).dot(detuning_derivative() * ls.vectors.col(j)));
}

}  // namespace hqsim

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

#include "cli.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "hqsim/experiments.hpp"
#include "hqsim/parallel.hpp"
#include "svg.hpp"

namespace hqsim::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class Type { object, number, integer, boolean, string, number_array, t1_table, number_or_inf };

struct Key {
  KeyInfo info;
  Type type;
  int length = 0;  ///< fixed array length, 0 = any
};

const char* type_name(Type t) {
  switch (t) {
    case Type::object: return "object";
    case Type::number: return "number";
    case Type::integer: return "integer";
    case Type::boolean: return "boolean";
    case Type::string: return "string";
    case Type::number_array: return "number[]";
    case Type::t1_table: return "\"synthetic\" | [[eps_hghz, t1_ns], ...]";
    case Type::number_or_inf: return "number | \"inf\"";
  }
  return "?";
}

std::string fmt_list(const std::vector<double>& v) {
  return "[" + fmt::format("{}", fmt::join(v, ", ")) + "]";
}

const std::vector<Key>& schema() {
  static const std::vector<Key> keys = [] {
    const Config d;
    const auto& r = d.readout;
    const auto& p = d.fci.potential;
    std::vector<Key> k;
    auto add = [&](std::string path, Type t, std::string unit, std::string def, std::string desc, int len = 0) {
      k.push_back({{std::move(path), type_name(t), std::move(unit), std::move(def), std::move(desc)}, t, len});
    };
    const char* none = "-";
    add("seed", Type::integer, none, "0", "RNG seed for noise realizations and traces; --seed overrides");

    add("model", Type::object, none, "{}", "toy Hamiltonian parameters");
    add("model.delta_L_ghz", Type::number, "h*GHz", "3", "left-dot singlet-triplet splitting");
    add("model.delta_R_ghz", Type::number, "h*GHz", "95.8", "right-dot singlet-triplet splitting");
    add("model.t_ghz", Type::number_array, "h*GHz", "[1.8, 7.1, 11.5, 6.3]", "tunnel couplings t1..t4", 4);
    add("model.lever_arm", Type::number, "eV/V", "0.028", "gate lever arm");

    add("noise", Type::object, none, "{}", "noise model for pulsed dynamics");
    add("noise.sigma_eps_hghz", Type::number, "h*GHz", "0", "quasistatic detuning noise std dev");
    add("noise.n_realizations", Type::integer, none, "1", "noise realizations averaged per point");
    add("noise.t1_table", Type::t1_table, "h*GHz, ns", "[] (no relaxation)",
        "T1(eps) knots, log-linear; \"synthetic\" selects the built-in hot-spot profile");
    add("noise.t1_extrapolate", Type::boolean, none, "false", "clamp T1 outside the table instead of failing");

    add("integrator", Type::object, none, "{}", "RK4 master-equation integrator");
    add("integrator.steps_per_period", Type::number, none, "40", "RK4 steps per period of the fastest frequency");
    add("integrator.verify", Type::boolean, none, "false", "rerun at half step and check agreement");
    add("integrator.verify_tol", Type::number, none, "1e-4", "max density-matrix change under step halving");

    add("spectrum", Type::object, none, "{}", "dispersion scan (command: spectrum)");
    add("spectrum.eps_min_hghz", Type::number, "h*GHz", "-300", "scan start");
    add("spectrum.eps_max_hghz", Type::number, "h*GHz", "300", "scan end");
    add("spectrum.n_points", Type::integer, none, "601", "scan points");

    auto drive = [&](const std::string& s, const DriveSection& dd) {
      add(s + ".eps_hghz", Type::number, "h*GHz", "sweet spot", "operating detuning");
      add(s + ".f_mw_ghz", Type::number, "GHz", "qubit splitting at eps", "microwave carrier");
      add(s + ".amplitude_hghz", Type::number, "h*GHz", fmt::format("{}", dd.amplitude), "detuning drive amplitude");
      add(s + ".edge_rise_ns", Type::number, "ns", fmt::format("{}", dd.edge_rise),
          "10-90% rise time of the Gaussian burst edges, 0 = rectangular");
    };
    add("rabi", Type::object, none, "{}", "Rabi chevron (command: rabi)");
    add("rabi.eps_hghz", Type::number, "h*GHz", "sweet spot", "operating detuning");
    add("rabi.f_mw_ghz", Type::number, "GHz", "qubit splitting at eps", "microwave carrier");
    add("rabi.edge_rise_ns", Type::number, "ns", "1", "10-90% rise time of the Gaussian burst edges, 0 = rectangular");
    add("rabi.phase_rad", Type::number, "rad", "0", "carrier phase");
    add("rabi.tau_max_ns", Type::number, "ns", "24", "longest burst");
    add("rabi.tau_step_ns", Type::number, "ns", "0.2", "burst duration step");
    add("rabi.amplitudes_hghz", Type::number_array, "h*GHz", fmt_list(d.rabi.amplitudes), "drive amplitudes");

    add("ramsey", Type::object, none, "{}", "Ramsey fringes (command: ramsey)");
    drive("ramsey", d.ramsey.drive);
    add("ramsey.ramp_ns", Type::number, "ns", "1", "ramp between operating point and eps_p");
    add("ramsey.eps_p_hghz", Type::number_array, "h*GHz", fmt_list(d.ramsey.eps_p), "free-evolution detunings");
    add("ramsey.te_step_ns", Type::number, "ns", "0.05", "dwell time step");
    add("ramsey.te_count", Type::integer, none, "400", "dwell times per trace");
    add("ramsey.t2_target_ns", Type::number, "ns", "0",
        "if > 0, calibrate sigma_eps so the envelope 1/e time at calibration_eps_p equals this");
    add("ramsey.calibration_eps_p_hghz", Type::number, "h*GHz", "-80", "detuning of the T2* calibration");

    add("tomo", Type::object, none, "{}", "+Y/-Y tomography (command: tomo)");
    drive("tomo", d.tomo.drive);
    add("tomo.n_phi", Type::integer, none, "24", "analysis phases over [0, 2 pi)");

    add("readout", Type::object, none, "{}", "single-shot readout traces (commands: traces, fidelity)");
    add("readout.t_meas_us", Type::number, "us", fmt::format("{}", r.t_meas), "readout window");
    add("readout.internal_rate_mhz", Type::number, "MHz", fmt::format("{}", r.internal_rate), "internal sampling rate");
    add("readout.detector_rate_mhz", Type::number, "MHz", fmt::format("{}", r.detector_rate), "detector output rate");
    add("readout.tau_out_us", Type::number, "us", fmt::format("{}", r.tau_out), "tunnel-out time of state 1");
    add("readout.tau_in_us", Type::number, "us", fmt::format("{}", r.tau_in), "tunnel-in time");
    add("readout.t1_meas_us", Type::number_or_inf, "us", fmt::format("{}", r.t1_meas), "T1 at the readout point");
    add("readout.p_thermal_window", Type::number, "probability", fmt::format("{}", r.p_thermal_window),
        "chance of a thermal blip in a state-0 window");
    add("readout.level_base", Type::number, "signal", fmt::format("{}", r.level_base), "signal with the dot occupied");
    add("readout.level_blip", Type::number, "signal", fmt::format("{}", r.level_blip), "signal while tunneled out");
    add("readout.t_integration_us", Type::number, "us", fmt::format("{}", r.t_integration), "boxcar integration time");
    add("readout.snr_sigma_ratio", Type::number_or_inf, "-", fmt::format("{}", r.snr_sigma_ratio),
        "level separation / filtered noise std dev");

    add("traces", Type::object, none, "{}", "trace batch export (command: traces)");
    add("traces.n_traces", Type::integer, none, fmt::format("{}", d.traces.n_traces), "traces generated");
    add("traces.p1_true", Type::number, "probability", "0.5", "fraction of state-1 traces");
    add("traces.export_count", Type::integer, none, fmt::format("{}", d.traces.export_count),
        "leading traces written as t_us,value CSV");
    add("traces.binary_frame", Type::boolean, none, "true", "write the whole batch as an HQTR binary frame");

    add("fidelity", Type::object, none, "{}", "threshold optimization (command: fidelity)");
    add("fidelity.n_traces", Type::integer, none, fmt::format("{}", d.fidelity.n_traces), "traces generated");
    add("fidelity.p1_true", Type::number, "probability", "0.5", "fraction of state-1 traces");

    add("fci", Type::object, none, "{}", "two-electron FCI (command: fci)");
    add("fci.potential", Type::object, none, "{}", "confinement potential");
    add("fci.potential.kind", Type::string, none, p.kind, "\"gaussian\", \"harmonic\" or \"csv\"");
    add("fci.potential.nx", Type::integer, none, fmt::format("{}", p.nx), "interior grid points along x");
    add("fci.potential.ny", Type::integer, none, fmt::format("{}", p.ny), "interior grid points along y");
    add("fci.potential.half_width_x_nm", Type::number, "nm", fmt::format("{}", p.half_width_x), "Dirichlet wall at +-x");
    add("fci.potential.half_width_y_nm", Type::number, "nm", fmt::format("{}", p.half_width_y), "Dirichlet wall at +-y");
    add("fci.potential.v0_mev", Type::number, "meV", fmt::format("{}", p.v0), "gaussian: well depth");
    add("fci.potential.sigma_x_nm", Type::number, "nm", fmt::format("{}", p.sigma_x), "gaussian: width along x");
    add("fci.potential.sigma_y_nm", Type::number, "nm", fmt::format("{}", p.sigma_y), "gaussian: width along y");
    add("fci.potential.hw_x_mev", Type::number, "meV", "1", "harmonic: confinement energy along x");
    add("fci.potential.hw_y_mev", Type::number, "meV", "1", "harmonic: confinement energy along y");
    add("fci.potential.path", Type::string, none, "", "csv: potential file, relative to the config");
    add("fci.material", Type::object, none, "{}", "host material");
    add("fci.material.m_star", Type::number, "m_e", "0.067", "effective mass");
    add("fci.material.kappa", Type::number, "-", "12.9", "relative permittivity");
    add("fci.n_spatial", Type::integer, none, fmt::format("{}", d.fci.n_spatial), "single-particle orbitals");
    add("fci.lambda_grid", Type::number_array, "-", fmt_list(d.fci.lambda_grid), "interaction scaling factors");
    add("fci.regularization_nm", Type::number, "nm", "0", "Coulomb softening length, <= 0 selects min(h)/2");
    add("fci.k_lowest", Type::integer, none, fmt::format("{}", d.fci.k_lowest), "eigenvalues kept");
    return k;
  }();
  return keys;
}

const Key* find_key(const std::string& path) {
  for (const auto& k : schema())
    if (k.info.path == path) return &k;
  return nullptr;
}

bool type_ok(const Key& k, const json& v) {
  switch (k.type) {
    case Type::object: return v.is_object();
    case Type::number: return v.is_number();
    case Type::integer: return v.is_number_integer();
    case Type::boolean: return v.is_boolean();
    case Type::string: return v.is_string();
    case Type::number_array:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); }) &&
             (k.length == 0 || static_cast<int>(v.size()) == k.length);
    case Type::t1_table:
      if (v.is_string()) return v.get<std::string>() == "synthetic";
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) {
               return e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number();
             });
    case Type::number_or_inf: return v.is_number() || (v.is_string() && v.get<std::string>() == "inf");
  }
  return false;
}

void walk(const json& obj, const std::string& prefix, std::vector<Diagnostic>& out) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    const Key* k = find_key(path);
    if (k == nullptr) {
      out.push_back({path, fmt::format("unknown key '{}'", path)});
      continue;
    }
    if (!type_ok(*k, it.value())) {
      const std::string expect =
          k->length > 0 ? fmt::format("{} of length {}", k->info.type, k->length) : k->info.type;
      out.push_back({path, fmt::format("key '{}' must be {} (got {})", path, expect, it.value().dump())});
      continue;
    }
    if (k->type == Type::object) walk(it.value(), path, out);
  }
}

std::vector<Diagnostic> schema_diagnostics(const json& j) {
  std::vector<Diagnostic> out;
  if (!j.is_object()) {
    out.push_back({"", "config must be a JSON object"});
    return out;
  }
  walk(j, "", out);
  return out;
}

// ------------------------------------------------------------------ parsing

const json* child(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

void get(const json& j, const char* key, double& dst) {
  if (auto* v = child(j, key)) {
    dst = v->is_string() ? std::numeric_limits<double>::infinity() : v->get<double>();
  }
}
void get(const json& j, const char* key, int& dst) {
  if (auto* v = child(j, key)) dst = v->get<int>();
}
void get(const json& j, const char* key, bool& dst) {
  if (auto* v = child(j, key)) dst = v->get<bool>();
}
void get(const json& j, const char* key, std::string& dst) {
  if (auto* v = child(j, key)) dst = v->get<std::string>();
}
void get(const json& j, const char* key, std::vector<double>& dst) {
  if (auto* v = child(j, key)) dst = v->get<std::vector<double>>();
}
void get(const json& j, const char* key, std::optional<double>& dst) {
  if (auto* v = child(j, key)) dst = v->get<double>();
}

void get_drive(const json& j, DriveSection& d) {
  get(j, "eps_hghz", d.eps);
  get(j, "f_mw_ghz", d.f_mw);
  get(j, "amplitude_hghz", d.amplitude);
  get(j, "edge_rise_ns", d.edge_rise);
}

const json kEmpty = json::object();

const json& section(const json& j, const char* key) {
  auto* v = child(j, key);
  return v ? *v : kEmpty;
}

Config parse_unchecked(const json& j, const fs::path& base_dir) {
  Config c;
  c.base_dir = base_dir;
  if (auto* v = child(j, "seed")) c.seed = v->get<std::uint64_t>();

  const auto& m = section(j, "model");
  get(m, "delta_L_ghz", c.model.delta_l);
  get(m, "delta_R_ghz", c.model.delta_r);
  if (auto* v = child(m, "t_ghz")) {
    const auto t = v->get<std::vector<double>>();
    std::copy_n(t.begin(), std::min<std::size_t>(t.size(), 4), c.model.t.begin());
  }
  get(m, "lever_arm", c.model.lever_arm);

  const auto& n = section(j, "noise");
  get(n, "sigma_eps_hghz", c.noise.sigma_eps);
  get(n, "n_realizations", c.noise.n_realizations);
  if (auto* v = child(n, "t1_table")) {
    if (v->is_string()) {
      c.noise.t1_table = T1Profile::synthetic_default();
    } else {
      for (const auto& e : *v) c.noise.t1_table.push_back({e[0].get<double>(), e[1].get<double>()});
    }
  }
  get(n, "t1_extrapolate", c.noise.t1_extrapolate);
  c.noise.seed = c.seed;

  const auto& in = section(j, "integrator");
  get(in, "steps_per_period", c.integrator.steps_per_period);
  get(in, "verify", c.integrator.verify);
  get(in, "verify_tol", c.integrator.verify_tol);

  const auto& s = section(j, "spectrum");
  get(s, "eps_min_hghz", c.spectrum.eps_min);
  get(s, "eps_max_hghz", c.spectrum.eps_max);
  get(s, "n_points", c.spectrum.n_points);

  const auto& ra = section(j, "rabi");
  get(ra, "eps_hghz", c.rabi.drive.eps);
  get(ra, "f_mw_ghz", c.rabi.drive.f_mw);
  get(ra, "edge_rise_ns", c.rabi.drive.edge_rise);
  get(ra, "phase_rad", c.rabi.phase);
  get(ra, "tau_max_ns", c.rabi.tau_max);
  get(ra, "tau_step_ns", c.rabi.tau_step);
  get(ra, "amplitudes_hghz", c.rabi.amplitudes);

  const auto& rm = section(j, "ramsey");
  get_drive(rm, c.ramsey.drive);
  get(rm, "ramp_ns", c.ramsey.ramp);
  get(rm, "eps_p_hghz", c.ramsey.eps_p);
  get(rm, "te_step_ns", c.ramsey.te_step);
  get(rm, "te_count", c.ramsey.te_count);
  get(rm, "t2_target_ns", c.ramsey.t2_target);
  get(rm, "calibration_eps_p_hghz", c.ramsey.calibration_eps_p);

  const auto& to = section(j, "tomo");
  get_drive(to, c.tomo.drive);
  get(to, "n_phi", c.tomo.n_phi);

  const auto& ro = section(j, "readout");
  get(ro, "t_meas_us", c.readout.t_meas);
  get(ro, "internal_rate_mhz", c.readout.internal_rate);
  get(ro, "detector_rate_mhz", c.readout.detector_rate);
  get(ro, "tau_out_us", c.readout.tau_out);
  get(ro, "tau_in_us", c.readout.tau_in);
  get(ro, "t1_meas_us", c.readout.t1_meas);
  get(ro, "p_thermal_window", c.readout.p_thermal_window);
  get(ro, "level_base", c.readout.level_base);
  get(ro, "level_blip", c.readout.level_blip);
  get(ro, "t_integration_us", c.readout.t_integration);
  get(ro, "snr_sigma_ratio", c.readout.snr_sigma_ratio);
  c.readout.seed = c.seed;

  const auto& tr = section(j, "traces");
  get(tr, "n_traces", c.traces.n_traces);
  get(tr, "p1_true", c.traces.p1_true);
  get(tr, "export_count", c.traces.export_count);
  get(tr, "binary_frame", c.traces.binary_frame);

  const auto& fi = section(j, "fidelity");
  get(fi, "n_traces", c.fidelity.n_traces);
  get(fi, "p1_true", c.fidelity.p1_true);

  const auto& f = section(j, "fci");
  const auto& p = section(f, "potential");
  auto& cp = c.fci.potential;
  get(p, "kind", cp.kind);
  get(p, "nx", cp.nx);
  get(p, "ny", cp.ny);
  get(p, "half_width_x_nm", cp.half_width_x);
  get(p, "half_width_y_nm", cp.half_width_y);
  get(p, "v0_mev", cp.v0);
  get(p, "sigma_x_nm", cp.sigma_x);
  get(p, "sigma_y_nm", cp.sigma_y);
  get(p, "hw_x_mev", cp.hw_x);
  get(p, "hw_y_mev", cp.hw_y);
  get(p, "path", cp.path);
  if (!cp.path.empty() && fs::path(cp.path).is_relative()) cp.path = (base_dir / cp.path).string();
  const auto& mat = section(f, "material");
  get(mat, "m_star", c.fci.material.m_star);
  get(mat, "kappa", c.fci.material.kappa);
  get(f, "n_spatial", c.fci.n_spatial);
  get(f, "lambda_grid", c.fci.lambda_grid);
  get(f, "regularization_nm", c.fci.regularization);
  get(f, "k_lowest", c.fci.k_lowest);
  return c;
}

// --------------------------------------------------------- physical checks

void physical_diagnostics(const Config& c, const json& j, std::vector<Diagnostic>& out) {
  auto add = [&](const std::string& key, const std::string& msg) { out.push_back({key, key + ": " + msg}); };
  if (auto* s = child(j, "seed"); s && !s->is_number_unsigned() && s->get<std::int64_t>() < 0) {
    add("seed", "must be >= 0");
  }
  for (const auto& e : c.model.errors()) add("model", e);
  for (const auto& e : c.noise.errors()) add("noise", e);
  if (!(c.integrator.steps_per_period >= 4.0)) add("integrator.steps_per_period", "must be >= 4");
  if (!(c.integrator.verify_tol > 0.0)) add("integrator.verify_tol", "must be > 0");

  if (!(c.spectrum.eps_max > c.spectrum.eps_min)) add("spectrum", "eps_max_hghz must exceed eps_min_hghz");
  if (c.spectrum.n_points < 2) add("spectrum.n_points", "must be >= 2");

  auto drive = [&](const std::string& s, const DriveSection& d, bool check_amplitude) {
    if (check_amplitude && !(d.amplitude > 0.0)) add(s + ".amplitude_hghz", "must be > 0");
    if (!(d.edge_rise >= 0.0)) add(s + ".edge_rise_ns", "must be >= 0");
    if (d.f_mw && !(*d.f_mw > 0.0)) add(s + ".f_mw_ghz", "must be > 0");
  };
  drive("rabi", c.rabi.drive, false);
  if (!(c.rabi.tau_step > 0.0)) add("rabi.tau_step_ns", "must be > 0");
  if (!(c.rabi.tau_max > c.rabi.tau_step)) add("rabi.tau_max_ns", "must exceed tau_step_ns");
  if (c.rabi.amplitudes.size() < 2) add("rabi.amplitudes_hghz", "needs at least two amplitudes");
  for (std::size_t i = 0; i < c.rabi.amplitudes.size(); ++i) {
    if (!(c.rabi.amplitudes[i] >= 0.0)) add(fmt::format("rabi.amplitudes_hghz[{}]", i), "must be >= 0");
  }

  drive("ramsey", c.ramsey.drive, true);
  if (!(c.ramsey.ramp > 0.0)) add("ramsey.ramp_ns", "must be > 0");
  if (c.ramsey.eps_p.empty()) add("ramsey.eps_p_hghz", "must not be empty");
  if (!(c.ramsey.te_step > 0.0)) add("ramsey.te_step_ns", "must be > 0");
  if (c.ramsey.te_count < 8) add("ramsey.te_count", "must be >= 8");
  if (!(c.ramsey.t2_target >= 0.0)) add("ramsey.t2_target_ns", "must be >= 0");

  drive("tomo", c.tomo.drive, true);
  if (c.tomo.n_phi < 4) add("tomo.n_phi", "must be >= 4");

  for (const auto& e : c.readout.errors()) add("readout", e);
  if (c.traces.n_traces < 1) add("traces.n_traces", "must be >= 1");
  if (!(c.traces.p1_true >= 0.0 && c.traces.p1_true <= 1.0)) add("traces.p1_true", "must be in [0, 1]");
  if (c.traces.export_count < 0) add("traces.export_count", "must be >= 0");
  if (c.fidelity.n_traces < 2) add("fidelity.n_traces", "must be >= 2");
  if (!(c.fidelity.p1_true > 0.0 && c.fidelity.p1_true < 1.0)) add("fidelity.p1_true", "must be in (0, 1)");

  // potential: only the keys of the selected kind may appear
  const auto& pj = section(section(j, "fci"), "potential");
  const auto& p = c.fci.potential;
  static const std::map<std::string, std::vector<std::string>> allowed = {
      {"gaussian", {"kind", "nx", "ny", "half_width_x_nm", "half_width_y_nm", "v0_mev", "sigma_x_nm", "sigma_y_nm"}},
      {"harmonic", {"kind", "nx", "ny", "half_width_x_nm", "half_width_y_nm", "hw_x_mev", "hw_y_mev"}},
      {"csv", {"kind", "path"}}};
  const auto kind = allowed.find(p.kind);
  bool potential_ok = true;
  if (kind == allowed.end()) {
    add("fci.potential.kind", fmt::format("unknown kind '{}' (gaussian, harmonic, csv)", p.kind));
    potential_ok = false;
  } else {
    for (auto it = pj.begin(); it != pj.end(); ++it) {
      const auto& names = kind->second;
      if (std::find(names.begin(), names.end(), it.key()) == names.end()) {
        add("fci.potential." + it.key(), fmt::format("not used by potential kind '{}'", p.kind));
      }
    }
    if (p.kind == "csv" && p.path.empty()) {
      add("fci.potential.path", "required for kind 'csv'");
      potential_ok = false;
    }
  }
  if (!(c.fci.material.m_star > 0.0)) add("fci.material.m_star", "must be > 0");
  if (!(c.fci.material.kappa > 0.0)) add("fci.material.kappa", "must be > 0");
  if (c.fci.n_spatial < 2) add("fci.n_spatial", "must be >= 2");
  if (c.fci.k_lowest < 2) add("fci.k_lowest", "must be >= 2");
  if (c.fci.lambda_grid.empty()) add("fci.lambda_grid", "must not be empty");
  for (std::size_t i = 0; i < c.fci.lambda_grid.size(); ++i) {
    const double l = c.fci.lambda_grid[i];
    if (!(l >= 0.0 && l <= 1.0)) add(fmt::format("fci.lambda_grid[{}]", i), "must be in [0, 1]");
  }
  if (potential_ok && c.fci.material.m_star > 0.0 && c.fci.material.kappa > 0.0) {
    try {
      const auto g = build_potential(c.fci);
      if (c.fci.n_spatial >= 2 && !(4 * c.fci.n_spatial < g.size()) && c.fci.n_spatial != g.size()) {
        add("fci.n_spatial", fmt::format("must be below a quarter of the {} grid points", g.size()));
      }
    } catch (const IoError& e) {
      out.push_back({"fci.potential.path", std::string("fci.potential.path: ") + e.what(), true});
    } catch (const Error& e) {
      add("fci.potential", e.what());
    }
  }
}

// ------------------------------------------------------------------ output

class Artifacts {
 public:
  Artifacts(fs::path dir, bool svg) : dir_(std::move(dir)), svg_(svg) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw IoError(fmt::format("cannot create output directory '{}': {}", dir_.string(), ec.message()));
    }
  }

  bool svg() const { return svg_; }

  void write(const std::string& name, const std::string& bytes) {
    const fs::path p = dir_ / name;
    std::ofstream os(p, std::ios::binary);
    os << bytes;
    os.close();
    if (!os) throw IoError(fmt::format("cannot write '{}'", p.string()));
    files_.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
  void write_svg(const std::string& name, const std::string& s) {
    if (svg_) write(name, s);
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  bool svg_;
  std::vector<std::string> files_;
};

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

double edge_sigma(double rise) { return rise > 0.0 ? edge_sigma_for_rise_time(rise) : 0.0; }

DriveSpec resolve_drive(const DriveSection& d, const ModelParams& params) {
  DriveSpec s;
  s.eps = d.eps ? *d.eps : sweet_spot(params).eps;
  s.f_mw = d.f_mw ? *d.f_mw : qubit_splitting(s.eps, params);
  s.amplitude = d.amplitude;
  s.edge_sigma = edge_sigma(d.edge_rise);
  return s;
}

json drive_json(const DriveSpec& d) {
  return {{"eps_hghz", d.eps}, {"f_mw_ghz", d.f_mw}, {"amplitude_hghz", d.amplitude}, {"edge_sigma_ns", d.edge_sigma}};
}

json exp_fit_json(const readout::ExponentialFit& f) {
  return {{"tau_us", f.tau}, {"std_error_us", f.std_error}, {"n_events", f.n_events}, {"n_censored", f.n_censored}};
}

std::string histogram_csv(const readout::Histogram& h, const char* x) {
  std::string s = fmt::format("{},count\n", x);
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    s += fmt::format("{},{}\n", h.origin + (i + 0.5) * h.bin_width, h.counts[i]);
  }
  return s;
}

json tunnel_json(const readout::TraceBatch& batch, Artifacts& a) {
  try {
    const auto t = readout::tunnel_time_histograms(batch);
    a.write("tunnel_out_hist.csv", histogram_csv(t.out_hist, "t_us"));
    a.write("tunnel_in_hist.csv", histogram_csv(t.in_hist, "t_us"));
    return {{"tau_out", exp_fit_json(t.tau_out)}, {"tau_in", exp_fit_json(t.tau_in)}};
  } catch (const NumericalError& e) {
    return {{"error_code", e.code()}, {"message", e.what()}};
  }
}

json run_spectrum(const Config& c, Artifacts& a) {
  const auto eps = linspace(c.spectrum.eps_min, c.spectrum.eps_max, c.spectrum.n_points);
  const auto rows = dispersion_scan(eps, c.model);
  a.write("spectrum.csv", dispersion_csv(rows));
  const auto op = sweet_spot(c.model);
  json j = {{"model", to_json(c.model)},
            {"sweet_spot", {{"eps_hghz", op.eps}, {"f_qubit_ghz", op.f_qubit}}},
            {"asymptotes",
             {{"eps_hghz", 1e5},
              {"f_qubit_minus_ghz", qubit_splitting(-1e5, c.model)},
              {"f_qubit_plus_ghz", qubit_splitting(1e5, c.model)}}},
            {"n_points", rows.size()}};
  a.write_json("spectrum.json", j);
  if (a.svg()) {
    std::vector<svg::Series> s(5);
    for (int k = 0; k < 4; ++k) s[k].name = fmt::format("E{}", k);
    s[4].name = "f_qubit";
    for (const auto& r : rows) {
      for (int k = 0; k < 4; ++k) {
        s[k].x.push_back(r.eps);
        s[k].y.push_back(r.energies[k]);
      }
      s[4].x.push_back(r.eps);
      s[4].y.push_back(r.f_qubit);
    }
    a.write_svg("spectrum.svg", svg::line_plot({"Energy levels", "eps (h*GHz)", "E (h*GHz)"}, s));
  }
  return j;
}

json run_rabi(const Config& c, Artifacts& a) {
  RabiSpec spec;
  const auto d = resolve_drive(c.rabi.drive, c.model);
  spec.eps = d.eps;
  spec.f_mw = d.f_mw;
  spec.edge_sigma = d.edge_sigma;
  spec.phase = c.rabi.phase;
  const int n = static_cast<int>(std::floor(c.rabi.tau_max / c.rabi.tau_step + 1e-9)) + 1;
  for (int i = 0; i < n; ++i) spec.tau_grid.push_back(i * c.rabi.tau_step);
  spec.amplitude_grid = c.rabi.amplitudes;
  const auto r = rabi_scan(spec, c.model, c.noise, c.integrator);
  a.write("rabi.csv", r.scan.to_csv());
  std::string fits = "amplitude_hghz,f_rabi_ghz,fit_amplitude,rwa_f_rabi_ghz,flagged\n";
  json rows = json::array();
  for (const auto& row : r.rows) {
    fits += fmt::format("{},{},{},{},{}\n", row.amplitude, row.f_rabi, row.fit_amplitude, row.rwa_f_rabi,
                        row.flagged ? 1 : 0);
    rows.push_back({{"amplitude_hghz", row.amplitude},
                    {"f_rabi_ghz", row.f_rabi},
                    {"rwa_f_rabi_ghz", row.rwa_f_rabi},
                    {"flagged", row.flagged}});
  }
  a.write("rabi_fits.csv", fits);
  json j = {{"operating_point", {{"eps_hghz", spec.eps}, {"f_mw_ghz", spec.f_mw}}},
            {"edge_sigma_ns", spec.edge_sigma},
            {"linear_fit",
             {{"slope_ghz_per_hghz", r.linear.slope},
              {"intercept_ghz", r.linear.intercept},
              {"r2", r.linear.r2},
              {"points", r.linear_points}}},
            {"rows", rows},
            {"model", to_json(c.model)},
            {"noise", to_json(c.noise)}};
  a.write_json("rabi.json", j);
  a.write_svg("rabi.svg", svg::heatmap({"Rabi P1", "tau_mw (ns)", "A_eps (h*GHz)"}, r.scan.x, r.scan.y, r.scan.p1));
  return j;
}

json run_ramsey(const Config& c, Artifacts& a) {
  RamseySpec spec;
  spec.drive = resolve_drive(c.ramsey.drive, c.model);
  spec.ramp_time = c.ramsey.ramp;
  spec.eps_p_grid = c.ramsey.eps_p;
  spec.te_step = c.ramsey.te_step;
  spec.te_count = c.ramsey.te_count;
  spec.pi_half_duration = calibrate_rotation(spec.drive, 0.5, c.model, c.integrator);
  NoiseModel noise = c.noise;
  json j = {{"drive", drive_json(spec.drive)}, {"pi_half_duration_ns", spec.pi_half_duration}};
  if (c.ramsey.t2_target > 0.0) {
    const auto cal =
        calibrate_sigma_eps(spec, c.ramsey.calibration_eps_p, c.ramsey.t2_target, c.model, noise, c.integrator);
    noise.sigma_eps = cal.sigma_eps;
    j["calibration"] = {{"eps_p_hghz", c.ramsey.calibration_eps_p},
                        {"t2_target_ns", c.ramsey.t2_target},
                        {"sigma_eps_hghz", cal.sigma_eps},
                        {"t2_star_ns", cal.t2_star},
                        {"evaluations", cal.evaluations}};
  }
  const auto r = ramsey_scan(spec, c.model, noise, c.integrator);
  a.write("ramsey.csv", r.scan.to_csv());
  std::string fft = "eps_p_hghz,fft_peak_ghz,f_expected_ghz,bin_width_ghz\n";
  json rows = json::array();
  for (const auto& row : r.rows) {
    fft += fmt::format("{},{},{},{}\n", row.eps_p, row.fft_peak, row.f_expected, row.bin_width);
    rows.push_back({{"eps_p_hghz", row.eps_p},
                    {"fft_peak_ghz", row.fft_peak},
                    {"f_expected_ghz", row.f_expected},
                    {"within_one_bin", std::abs(row.fft_peak - row.f_expected) <= row.bin_width}});
  }
  a.write("ramsey_fft.csv", fft);
  j["rows"] = rows;
  j["noise"] = to_json(noise);
  a.write_json("ramsey.json", j);
  a.write_svg("ramsey.svg", svg::heatmap({"Ramsey P1", "eps_p (h*GHz)", "t_e (ns)"}, r.scan.x, r.scan.y, r.scan.p1));
  return j;
}

json run_tomo(const Config& c, Artifacts& a) {
  TomographySpec spec;
  spec.drive = resolve_drive(c.tomo.drive, c.model);
  spec.pi_half_duration = calibrate_rotation(spec.drive, 0.5, c.model, c.integrator);
  for (int k = 0; k < c.tomo.n_phi; ++k) spec.phi_grid.push_back(k * 2.0 * std::numbers::pi / c.tomo.n_phi);
  const auto r = tomography_scan(spec, c.model, c.noise, c.integrator);
  std::string csv = "phi_rad,p1_plus_y,p1_minus_y\n";
  for (std::size_t i = 0; i < spec.phi_grid.size(); ++i) {
    csv += fmt::format("{},{},{}\n", spec.phi_grid[i], r.plus_y.at(i), r.minus_y.at(i));
  }
  a.write("tomo.csv", csv);
  auto fit = [](const fit::PhaseFit& f) {
    return json{{"amplitude", f.amplitude}, {"phase_rad", f.phase}, {"offset", f.offset}};
  };
  json j = {{"drive", drive_json(spec.drive)},
            {"pi_half_duration_ns", spec.pi_half_duration},
            {"fit_plus_y", fit(r.fit_plus)},
            {"fit_minus_y", fit(r.fit_minus)},
            {"phase_difference_rad", r.phase_difference}};
  a.write_json("tomo.json", j);
  a.write_svg("tomo.svg", svg::line_plot({"Tomography", "phi (rad)", "P1"},
                                         {{"+Y", spec.phi_grid, r.plus_y.p1}, {"-Y", spec.phi_grid, r.minus_y.p1}}));
  return j;
}

json run_traces(const Config& c, Artifacts& a) {
  const auto batch = readout::generate_batch(c.readout, c.traces.n_traces, c.traces.p1_true);
  if (c.traces.binary_frame) {
    std::ostringstream os;
    readout::write_frame(os, batch);
    a.write("traces.hqtr", os.str());
  }
  const int k = std::min<int>(c.traces.export_count, static_cast<int>(batch.traces.size()));
  std::vector<svg::Series> series;
  for (int i = 0; i < k; ++i) {
    a.write(fmt::format("trace_{:04d}.csv", i), readout::trace_csv(batch.traces[i], c.readout));
    if (i < 4) {
      svg::Series s;
      s.name = fmt::format("trace {} (state {})", i, static_cast<int>(batch.traces[i].label));
      for (std::size_t t = 0; t < batch.traces[i].samples.size(); ++t) {
        s.x.push_back(c.readout.detector_time(static_cast<int>(t)));
        s.y.push_back(batch.traces[i].samples[t]);
      }
      series.push_back(std::move(s));
    }
  }
  json j = {{"readout", readout::to_json(c.readout)},
            {"n_traces", batch.traces.size()},
            {"n_state1", batch.count(readout::Label::state1)},
            {"p1_true", c.traces.p1_true},
            {"tunnel_times", tunnel_json(batch, a)}};
  a.write_json("traces.json", j);
  a.write_svg("traces.svg", svg::line_plot({"Detector traces", "t (us)", "signal"}, series));
  return j;
}

json run_fidelity(const Config& c, Artifacts& a) {
  const auto batch = readout::generate_batch(c.readout, c.fidelity.n_traces, c.fidelity.p1_true);
  const auto thresholds = readout::default_threshold_grid(c.readout);
  const auto report = readout::fidelity_report(batch, thresholds);
  a.write("fidelity.csv", report.to_csv());
  std::string hist = "min_value,count_0,count_1\n";
  for (std::size_t i = 0; i < report.histogram_0.counts.size(); ++i) {
    hist += fmt::format("{},{},{}\n", report.histogram_0.origin + (i + 0.5) * report.histogram_0.bin_width,
                        report.histogram_0.counts[i], report.histogram_1.counts[i]);
  }
  a.write("min_histogram.csv", hist);
  const auto p1 = readout::estimate_p1(batch, report.v_opt, report.f0_opt, report.f1_opt);
  json summary = report.summary();
  summary.erase("histogram_0");
  summary.erase("histogram_1");
  json j = {{"readout", readout::to_json(c.readout)},
            {"n_traces", batch.traces.size()},
            {"p1_true", c.fidelity.p1_true},
            {"fidelity", summary},
            {"p1_estimate", {{"raw", p1.raw}, {"corrected", p1.corrected}}},
            {"tunnel_times", tunnel_json(batch, a)}};
  a.write_json("fidelity.json", j);
  a.write_svg("fidelity.svg", svg::line_plot({"Readout fidelity", "threshold", "fraction"},
                                             {{"F0", report.thresholds, report.f0},
                                              {"F1", report.thresholds, report.f1},
                                              {"visibility", report.thresholds, report.visibility}}));
  return j;
}

json run_fci(const Config& c, Artifacts& a) {
  const auto grid = build_potential(c.fci);
  fci::IntegralOptions opts;
  opts.regularization = c.fci.regularization;
  const auto problem = fci::FciProblem::build(grid, c.fci.n_spatial, opts);
  const auto rows = fci::splitting_vs_lambda(problem, c.fci.lambda_grid);
  a.write("fci_splitting.csv", fci::splitting_csv(rows));
  json j = fci::summary_json(problem, rows);
  std::vector<double> lam, split;
  for (const auto& r : rows) {
    lam.push_back(r.lambda);
    split.push_back(r.splitting);
  }
  const auto top = fci::solve(problem, c.fci.lambda_grid.back(), c.fci.k_lowest);
  j["spectrum_at_last_lambda"] = {{"lambda", top.lambda},
                                  {"levels_hghz", top.levels},
                                  {"degeneracies", top.degeneracies},
                                  {"max_residual", top.max_residual}};
  a.write_json("fci_summary.json", j);
  a.write_svg("fci.svg", svg::line_plot({"Singlet-triplet splitting", "lambda", "E1 - E0 (h*GHz)"},
                                        {{"splitting", lam, split}}));
  return j;
}

struct CommandInfo {
  const char* name;
  const char* description;
  json (*run)(const Config&, Artifacts&);
};

constexpr CommandInfo kCommands[] = {
    {"spectrum", "energy levels and qubit frequency versus detuning", run_spectrum},
    {"rabi", "Rabi chevron and f_Rabi versus drive amplitude", run_rabi},
    {"ramsey", "Ramsey fringes versus free-evolution detuning", run_ramsey},
    {"tomo", "+Y / -Y preparation tomography", run_tomo},
    {"traces", "synthetic single-shot readout traces", run_traces},
    {"fidelity", "threshold scan, F0 / F1 / visibility", run_fidelity},
    {"fci", "two-electron FCI singlet-triplet splitting versus interaction strength", run_fci},
};

json diagnostics_json(const std::vector<Diagnostic>& d) {
  json a = json::array();
  for (const auto& x : d) a.push_back({{"key", x.key}, {"message", x.message}});
  return a;
}

int exit_code(const Error& e) {
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  return kExitNumerical;
}

}  // namespace

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = [] {
    std::vector<KeyInfo> v;
    for (const auto& k : schema()) v.push_back(k.info);
    return v;
  }();
  return keys;
}

std::string config_reference() {
  std::string s =
      "CONFIG KEYS (one JSON object; unknown keys are rejected)\n"
      "  key [type, unit] (default): description\n";
  for (const auto& k : config_keys()) {
    if (k.type == "object") {
      s += fmt::format("  {} {{}}: {}\n", k.path, k.description);
    } else {
      s += fmt::format("  {} [{}, {}] ({}): {}\n", k.path, k.type, k.unit, k.default_value, k.description);
    }
  }
  s += "\nENVIRONMENT\n  HQSIM_THREADS  worker thread cap (0 or unset = all cores)\n"
       "\nEXIT CODES\n  0 ok, 2 config/usage error, 3 numerical failure, 4 I/O failure\n";
  return s;
}

nlohmann::json load_json(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(fmt::format("cannot read config '{}'", path.string()));
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed JSON in '{}': {}", path.string(), e.what()));
  }
}

std::vector<Diagnostic> validate(const json& j, const fs::path& base_dir) {
  auto out = schema_diagnostics(j);
  if (!out.empty()) return out;
  physical_diagnostics(parse_unchecked(j, base_dir), j, out);
  return out;
}

Config parse_config(const json& j, const fs::path& base_dir) {
  const auto d = validate(j, base_dir);
  if (!d.empty()) throw SchemaError(d.front().key, d.front().message);
  return parse_unchecked(j, base_dir);
}

fci::PotentialGrid build_potential(const FciSection& s) {
  const auto& p = s.potential;
  if (p.kind == "gaussian") {
    return fci::gaussian_well(p.nx, p.ny, p.half_width_x, p.half_width_y, p.v0, p.sigma_x, p.sigma_y, s.material);
  }
  if (p.kind == "harmonic") {
    return fci::harmonic_well(p.nx, p.ny, p.half_width_x, p.half_width_y, p.hw_x, p.hw_y, s.material);
  }
  if (p.kind == "csv") {
    std::ifstream is(p.path);
    if (!is) throw IoError(fmt::format("cannot read potential '{}'", p.path));
    return fci::read_potential_csv(is, s.material);
  }
  throw ConfigError(fmt::format("unknown potential kind '{}'", p.kind));
}

json error_json(const std::string& code, const std::string& message, json context) {
  return {{"error_code", code}, {"message", message}, {"context", std::move(context)}};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"hqsim: hybrid-qubit dynamics, single-shot readout and two-electron FCI", "hqsim"};
  app.footer("\n" + config_reference());
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool svg = false;
  std::vector<std::pair<CLI::App*, const CommandInfo*>> subs;
  for (const auto& cmd : kCommands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.description);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "RNG seed, overrides the config's \"seed\"");
    sub->add_option("--out", out_dir, "artifact directory (created if missing)")->capture_default_str();
    sub->add_flag("--svg", svg, "also write SVG plots");
    subs.emplace_back(sub, &cmd);
  }
  auto* validate_cmd = app.add_subcommand("validate", "check a config without running");
  validate_cmd->add_option("--config", config_path, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << error_json("usage_error", e.what()).dump() << "\n";
    return kExitConfig;
  }

  parallel::apply_env_thread_limit();
  const fs::path cfg_path(config_path);
  json context = {{"config", config_path}};
  try {
    const json j = load_json(cfg_path);
    const auto diags = validate(j, cfg_path.parent_path());
    if (validate_cmd->parsed()) {
      out << json{{"config", config_path}, {"valid", diags.empty()}, {"diagnostics", diagnostics_json(diags)}}.dump(2)
          << "\n";
      return diags.empty() ? kExitOk : kExitConfig;
    }
    if (!diags.empty()) {
      const auto first = std::find_if(diags.begin(), diags.end(), [](const Diagnostic& d) { return !d.io; });
      const bool io_only = first == diags.end();
      const auto& lead = io_only ? diags.front() : *first;
      context["key"] = lead.key;
      context["diagnostics"] = diagnostics_json(diags);
      err << error_json(io_only ? "io_error" : "config_error", lead.message, context).dump() << "\n";
      return io_only ? kExitIo : kExitConfig;
    }
    Config c = parse_unchecked(j, cfg_path.parent_path());
    for (const auto& [sub, cmd] : subs) {
      if (!sub->parsed()) continue;
      context["command"] = cmd->name;
      if (sub->count("--seed") > 0) {
        c.seed = seed;
        c.noise.seed = seed;
        c.readout.seed = seed;
      }
      Artifacts artifacts(out_dir, svg);
      cmd->run(c, artifacts);
      out << json{{"command", cmd->name},
                  {"seed", c.seed},
                  {"out", out_dir},
                  {"artifacts", artifacts.files()}}
                 .dump(2)
          << "\n";
      return kExitOk;
    }
    return kExitOk;
  } catch (const SolverError& e) {
    context["residual"] = e.residual();
    err << error_json(e.code(), e.what(), context).dump() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << error_json(e.code(), e.what(), context).dump() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    err << error_json("internal_error", e.what(), context).dump() << "\n";
    return kExitNumerical;
  }
}

}  // namespace hqsim::cli

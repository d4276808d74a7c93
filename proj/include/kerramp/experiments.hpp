// Copyright 2026 The kerramp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Declarative parameter sweeps over the library: configuration, grid
// evaluation with cutoff control, normalization and CSV / JSON output.

#ifndef KERRAMP_EXPERIMENTS_HPP
#define KERRAMP_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kerramp/channels.hpp"
#include "kerramp/convergence.hpp"
#include "kerramp/gate.hpp"
#include "kerramp/squeeze.hpp"
#include "kerramp/tolerances.hpp"

namespace kerramp {

using json = nlohmann::ordered_json;

enum class Experiment { fig2a, fig2b, figS1, figS2, custom };
enum class Frame { literal, corrected };
enum class Format { csv, json };
enum class CustomNoise { none, limit_channel, dilated_steps };

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::fig2a: return "fig2a";
    case Experiment::fig2b: return "fig2b";
    case Experiment::figS1: return "figs1";
    case Experiment::figS2: return "figs2";
    case Experiment::custom: return "custom";
  }
  return "?";
}

inline Experiment experiment_from_string(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "fig2a") return Experiment::fig2a;
  if (s == "fig2b") return Experiment::fig2b;
  if (s == "figs1") return Experiment::figS1;
  if (s == "figs2") return Experiment::figS2;
  if (s == "custom") return Experiment::custom;
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

inline std::string to_string(Frame f) { return f == Frame::literal ? "literal" : "corrected"; }
inline Frame frame_from_string(const std::string& s) {
  if (s == "literal") return Frame::literal;
  if (s == "corrected") return Frame::corrected;
  throw std::invalid_argument("unknown frame '" + s + "' (literal|corrected)");
}

inline std::string to_string(Format f) { return f == Format::csv ? "csv" : "json"; }
inline Format format_from_string(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw std::invalid_argument("unknown format '" + s + "' (csv|json)");
}

inline std::string to_string(CustomNoise n) {
  switch (n) {
    case CustomNoise::none: return "none";
    case CustomNoise::limit_channel: return "limit_channel";
    case CustomNoise::dilated_steps: return "dilated_steps";
  }
  return "?";
}
inline CustomNoise noise_from_string(const std::string& s) {
  if (s == "none") return CustomNoise::none;
  if (s == "limit_channel") return CustomNoise::limit_channel;
  if (s == "dilated_steps") return CustomNoise::dilated_steps;
  throw std::invalid_argument("unknown noise model '" + s + "' (none|limit_channel|dilated_steps)");
}

//============================================================================
// Configuration
//============================================================================

// A grid is either an explicit list or {"start", "stop", "count"} (inclusive,
// evenly spaced).
inline std::vector<double> parse_grid(const json& j, const std::string& name) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_number()) throw std::invalid_argument(name + ": grid entries must be numbers");
      out.push_back(v.get<double>());
    }
  } else if (j.is_object()) {
    for (const char* key : {"start", "stop", "count"}) {
      if (!j.contains(key)) throw std::invalid_argument(name + ": range grid needs '" + key + "'");
    }
    const double a = j.at("start").get<double>();
    const double b = j.at("stop").get<double>();
    const int n = j.at("count").get<int>();
    if (n < 1) throw std::invalid_argument(name + ": count must be >= 1");
    for (int k = 0; k < n; ++k) out.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
  } else if (j.is_number()) {
    out.push_back(j.get<double>());
  } else {
    throw std::invalid_argument(name + ": expected a list or a {start, stop, count} range");
  }
  return out;
}

inline std::vector<double> linspace(double a, double b, int n) {
  return parse_grid(json{{"start", a}, {"stop", b}, {"count", n}}, "linspace");
}

struct SweepConfig {
  Experiment experiment = Experiment::fig2a;
  double chi = 1.0;
  double chi_t = 1.2e-3;   // bare phase of the reference experiment
  double eta_db = 5.76e-4; // loss accumulated over chi_t / chi
  std::vector<double> r;   // natural units
  std::vector<double> phi_grid;
  std::vector<double> phi_max;  // fig2a panels
  int phi_count = 40;           // fig2a points per panel
  std::vector<int> n_list;
  std::vector<std::pair<double, double>> s1_pairs;  // figS1 (chi t, lambda)
  CutoffPolicy cutoffs;
  int guard = -1;  // < 0: default_guard(r)
  int ancilla = 3;
  bool normalize = true;
  Frame frame = Frame::literal;
  // custom only
  Variant variant = Variant::two_mode;
  int modes = 2;
  CustomNoise noise = CustomNoise::none;
  std::vector<double> chi_t_list;
  std::vector<double> eta_db_list;
  double memory_limit_mb = 2048.0;
  // output
  std::string out_path;
  Format format = Format::csv;

  // Loss rate in units where chi is the given coupling: the reference loss
  // eta_db is accumulated over t_ref = chi_t / chi.
  double eta_rate() const { return loss_db_to_rate(eta_db) * chi / chi_t; }
  double eta_rate(double db) const { return loss_db_to_rate(db) * chi / chi_t; }

  static SweepConfig defaults(Experiment e) {
    SweepConfig c;
    c.experiment = e;
    switch (e) {
      case Experiment::fig2a:
        for (double db : linspace(0.0, 24.0, 40)) c.r.push_back(db_to_r(db));
        c.phi_max = {pi, pi / 100};
        c.phi_count = 40;
        c.cutoffs = {4, 2, 40, tol::convergence, 1e-12};
        break;
      case Experiment::fig2b:
        for (double db : linspace(0.0, 8.0, 9)) c.r.push_back(db_to_r(db));
        c.phi_grid = {pi, pi / 100};
        c.n_list = {1, 5, 10};
        c.cutoffs = {4, 2, 14, tol::convergence, 1e-12};
        break;
      case Experiment::figS1:
        c.s1_pairs = {{pi / 2, 2.0}, {pi / 7, 7.0}, {pi / 10, 10.0}};
        c.n_list = {1, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 24, 32, 40, 48, 64};
        c.cutoffs = {40, 5, 400, tol::convergence, 1e-12};
        break;
      case Experiment::figS2:
        c.phi_grid = {pi / 100, pi / 50, pi / 10};
        c.n_list = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        c.cutoffs = {6, 1, 7, tol::convergence, 1e-12};
        break;
      case Experiment::custom:
        for (double db : {0.0, 4.0, 8.0}) c.r.push_back(db_to_r(db));
        c.phi_grid = {pi};
        c.n_list = {1, 4};
        c.cutoffs = {10, 5, 60, tol::convergence, 1e-12};
        break;
    }
    return c;
  }

  // Keys missing from `j` keep the defaults of the experiment.
  static SweepConfig from_json(const json& j, std::optional<Experiment> forced = std::nullopt) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    static const std::vector<std::string> known = {
        "experiment", "chi", "chi_t", "eta_db", "r_grid", "r_unit", "phi_grid", "phi_max", "phi_count",
        "n_list", "pairs", "cutoffs", "normalize", "frame", "variant", "modes", "noise", "chi_t_list",
        "eta_db_list", "memory_limit_mb", "output"};
    for (const auto& item : j.items()) {
      if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
        throw std::invalid_argument("config: unknown key '" + item.key() + "'");
      }
    }
    Experiment e = forced.value_or(Experiment::fig2a);
    if (j.contains("experiment")) {
      const Experiment named = experiment_from_string(j.at("experiment").get<std::string>());
      if (forced && named != *forced) {
        throw std::invalid_argument("config: experiment '" + to_string(named) + "' does not match subcommand '" +
                                    to_string(*forced) + "'");
      }
      e = named;
    }
    SweepConfig c = defaults(e);
    try {
      if (j.contains("chi")) c.chi = j.at("chi").get<double>();
      if (j.contains("chi_t")) c.chi_t = j.at("chi_t").get<double>();
      if (j.contains("eta_db")) c.eta_db = j.at("eta_db").get<double>();
      if (j.contains("r_grid")) {
        const std::string unit = j.value("r_unit", std::string("db"));
        if (unit != "db" && unit != "natural") throw std::invalid_argument("config: r_unit must be db or natural");
        c.r.clear();
        for (double v : parse_grid(j.at("r_grid"), "r_grid")) {
          if (unit == "db") {
            c.r.push_back(db_to_r(v));
          } else {
            if (v < 0.0) throw std::invalid_argument("r_grid: r must be >= 0");
            c.r.push_back(v);
          }
        }
      } else if (j.contains("r_unit")) {
        throw std::invalid_argument("config: r_unit given without r_grid");
      }
      if (j.contains("phi_grid")) c.phi_grid = parse_grid(j.at("phi_grid"), "phi_grid");
      if (j.contains("phi_max")) c.phi_max = parse_grid(j.at("phi_max"), "phi_max");
      if (j.contains("phi_count")) c.phi_count = j.at("phi_count").get<int>();
      if (j.contains("n_list")) c.n_list = j.at("n_list").get<std::vector<int>>();
      if (j.contains("pairs")) {
        c.s1_pairs.clear();
        for (const auto& p : j.at("pairs")) {
          c.s1_pairs.emplace_back(p.at("chi_t").get<double>(), p.at("lambda").get<double>());
        }
      }
      if (j.contains("cutoffs")) {
        const json& cj = j.at("cutoffs");
        if (cj.contains("start")) c.cutoffs.start = cj.at("start").get<int>();
        if (cj.contains("step")) c.cutoffs.step = cj.at("step").get<int>();
        if (cj.contains("max")) c.cutoffs.max_cutoff = cj.at("max").get<int>();
        if (cj.contains("rel_tol")) c.cutoffs.rel_tol = cj.at("rel_tol").get<double>();
        if (cj.contains("guard")) c.guard = cj.at("guard").get<int>();
        if (cj.contains("ancilla")) c.ancilla = cj.at("ancilla").get<int>();
      }
      if (j.contains("normalize")) c.normalize = j.at("normalize").get<bool>();
      if (j.contains("frame")) c.frame = frame_from_string(j.at("frame").get<std::string>());
      if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
      if (j.contains("modes")) c.modes = j.at("modes").get<int>();
      if (j.contains("noise")) c.noise = noise_from_string(j.at("noise").get<std::string>());
      if (j.contains("chi_t_list")) {
        c.chi_t_list = parse_grid(j.at("chi_t_list"), "chi_t_list");
        if (!j.contains("phi_grid")) c.phi_grid.clear();
      }
      if (j.contains("eta_db_list")) c.eta_db_list = parse_grid(j.at("eta_db_list"), "eta_db_list");
      if (j.contains("memory_limit_mb")) c.memory_limit_mb = j.at("memory_limit_mb").get<double>();
      if (j.contains("output")) {
        const json& o = j.at("output");
        if (o.contains("path")) c.out_path = o.at("path").get<std::string>();
        if (o.contains("format")) c.format = format_from_string(o.at("format").get<std::string>());
      }
    } catch (const json::exception& ex) {
      throw std::invalid_argument(std::string("config: ") + ex.what());
    }
    return c;
  }

  void validate() const {
    auto require = [](bool ok, const std::string& msg) {
      if (!ok) throw std::invalid_argument("config: " + msg);
    };
    require(std::isfinite(chi) && chi > 0.0, "chi must be > 0");
    require(std::isfinite(chi_t) && chi_t > 0.0, "chi_t must be > 0");
    require(std::isfinite(eta_db) && eta_db >= 0.0, "eta_db must be >= 0");
    for (double x : r) require(std::isfinite(x) && x >= 0.0, "squeezing values must be finite and >= 0");
    for (double x : phi_grid) require(std::isfinite(x) && x > 0.0, "phi values must be finite and > 0");
    for (double x : phi_max) require(std::isfinite(x) && x > 0.0, "phi_max values must be finite and > 0");
    for (int n : n_list) require(n >= 1, "Trotter step counts must be >= 1");
    require(ancilla >= 2, "ancilla cutoff must be >= 2");
    cutoffs.validate();
    switch (experiment) {
      case Experiment::fig2a:
        require(!r.empty(), "r_grid is empty");
        require(!phi_max.empty(), "phi_max is empty");
        require(phi_count >= 1, "phi_count must be >= 1");
        break;
      case Experiment::fig2b:
        require(!r.empty(), "r_grid is empty");
        require(!phi_grid.empty(), "phi_grid is empty");
        require(!n_list.empty(), "n_list is empty");
        break;
      case Experiment::figS1:
        require(!s1_pairs.empty(), "pairs is empty");
        require(!n_list.empty(), "n_list is empty");
        for (const auto& [ct, lam] : s1_pairs) {
          require(ct > 0.0 && std::isfinite(ct), "pair chi_t must be > 0");
          require(lam >= 1.0 && std::isfinite(lam), "pair lambda must be >= 1");
        }
        break;
      case Experiment::figS2:
        require(!phi_grid.empty(), "phi_grid is empty");
        require(!n_list.empty(), "n_list is empty");
        for (double phi : phi_grid) require(phi >= chi_t, "figs2 needs phi >= chi_t so that cosh^2(2r) = phi / chi_t");
        break;
      case Experiment::custom:
        require(!r.empty(), "r_grid is empty");
        require(!n_list.empty(), "n_list is empty");
        require(phi_grid.empty() != chi_t_list.empty(), "give exactly one of phi_grid and chi_t_list");
        require(modes >= 2, "modes must be >= 2");
        require(variant == Variant::n_mode || modes == 2, "single_mode and two_mode variants use modes = 2");
        if (noise != CustomNoise::none) {
          require(variant == Variant::two_mode, "lossy channels are implemented for the two_mode variant only");
          require(!eta_db_list.empty() || eta_db >= 0.0, "no loss values");
        } else {
          require(eta_db_list.empty(), "eta_db_list given but noise is none");
        }
        for (double x : eta_db_list) require(std::isfinite(x) && x >= 0.0, "eta_db_list values must be >= 0");
        for (double x : chi_t_list) require(std::isfinite(x) && x > 0.0, "chi_t_list values must be > 0");
        require(memory_limit_mb > 0.0, "memory_limit_mb must be > 0");
        break;
    }
  }

  // Canonical resolved form; also the input of the config hash.
  json to_json() const {
    json j;
    j["experiment"] = to_string(experiment);
    j["chi"] = chi;
    j["chi_t"] = chi_t;
    j["eta_db"] = eta_db;
    j["r_unit"] = "natural";
    j["r_grid"] = r;
    j["phi_grid"] = phi_grid;
    j["phi_max"] = phi_max;
    j["phi_count"] = phi_count;
    j["n_list"] = n_list;
    json pairs = json::array();
    for (const auto& [ct, lam] : s1_pairs) pairs.push_back({{"chi_t", ct}, {"lambda", lam}});
    j["pairs"] = pairs;
    j["cutoffs"] = {{"start", cutoffs.start}, {"step", cutoffs.step}, {"max", cutoffs.max_cutoff},
                    {"rel_tol", cutoffs.rel_tol}, {"guard", guard}, {"ancilla", ancilla}};
    j["normalize"] = normalize;
    j["frame"] = to_string(frame);
    if (experiment == Experiment::custom) {
      j["variant"] = to_string(variant);
      j["modes"] = modes;
      j["noise"] = to_string(noise);
      j["chi_t_list"] = chi_t_list;
      j["eta_db_list"] = eta_db_list;
      j["memory_limit_mb"] = memory_limit_mb;
    }
    return j;
  }
};

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash(const SweepConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.to_json().dump())));
  return buf;
}

//============================================================================
// Results
//============================================================================

struct ResultRow {
  std::string series;  // normalization group
  json params = json::object();
  double raw_error = 0.0;
  std::optional<double> normalized_error;
  json extras = json::object();  // further numeric columns, e.g. the bound
  int cutoff_used = 0;
  bool converged = false;
  std::optional<double> wall_time;
};

struct ResultTable {
  Experiment experiment = Experiment::fig2a;
  std::vector<std::string> param_columns;
  std::vector<std::string> extra_columns;
  std::vector<ResultRow> rows;
  json metadata = json::object();

  bool all_converged() const {
    return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.converged; });
  }
};

struct RunOptions {
  int threads = 1;
  bool timing = false;
  std::optional<int> seed;
};

// Divide each series by its own maximum; the maximum maps to exactly 1.
inline void normalize_rows(std::vector<ResultRow>& rows, const std::vector<std::string>& extra_keys = {}) {
  std::map<std::string, double> peak;
  std::map<std::string, std::map<std::string, double>> peak_extra;
  for (const auto& r : rows) {
    peak[r.series] = std::max(peak[r.series], r.raw_error);
    for (const auto& k : extra_keys) {
      auto& p = peak_extra[r.series][k];
      p = std::max(p, r.extras.at(k).get<double>());
    }
  }
  for (auto& r : rows) {
    const double p = peak[r.series];
    r.normalized_error = p > 0.0 ? r.raw_error / p : 0.0;
    for (const auto& k : extra_keys) {
      const double pe = peak_extra[r.series][k];
      const double v = r.extras.at(k).get<double>();
      r.extras["normalized_" + k] = pe > 0.0 ? v / pe : 0.0;
    }
  }
}

//============================================================================
// Parallel evaluation
//============================================================================

// Runs body(i) for i in [0, n) on up to `threads` threads. The first
// exception is rethrown after all workers stop.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads < 1 ? 1 : threads, n));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mutex;
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t k = 1; k < workers; ++k) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);
}

// One unit of work yields one or more rows; rows keep task order.
using Task = std::function<std::vector<ResultRow>()>;

inline std::vector<ResultRow> run_tasks(const std::vector<Task>& tasks, const RunOptions& opt) {
  std::vector<std::vector<ResultRow>> out(tasks.size());
  parallel_for(tasks.size(), opt.threads, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    out[i] = tasks[i]();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opt.timing) {
      for (auto& r : out[i]) r.wall_time = dt / static_cast<double>(out[i].size());
    }
  });
  std::vector<ResultRow> rows;
  for (auto& v : out) {
    for (auto& r : v) rows.push_back(std::move(r));
  }
  return rows;
}

inline ResultRow make_row(std::string series, json params, const Converged& c) {
  ResultRow row;
  row.series = std::move(series);
  row.params = std::move(params);
  row.raw_error = c.value;
  row.cutoff_used = c.cutoff;
  row.converged = c.converged;
  return row;
}

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

//============================================================================
// Shared evaluations
//============================================================================

// Amplification time for a target phase: t = phi / (chi cosh^2 2r).
inline double two_mode_time(double phi, double chi, double r) { return phi / (chi * std::pow(std::cosh(2 * r), 2)); }

inline double limit_gate_error(const SweepConfig& cfg, double r, double phi, double t, int d, double eta) {
  const KerrSpec kerr = KerrSpec::two_mode(cfg.chi);
  const FockSpace space({d, d});
  if (cfg.frame == Frame::literal) {
    return channel_gate_error_block(limit_channel_block(kerr, r, eta, t, space, KerrTerm::amplified), phi);
  }
  const CompSubspace sub(space);
  return channel_gate_error_block(limit_channel_block(kerr, r, eta, t, space, KerrTerm::averaged), phi,
                                  limit_frame(kerr, r, t, sub));
}

inline double dilated_gate_error(const SweepConfig& cfg, double r, double phi, double t, int steps, int d,
                                 double eta) {
  const KerrSpec kerr = KerrSpec::two_mode(cfg.chi);
  const int guard = cfg.guard >= 0 ? cfg.guard : default_guard(r);
  const FockSpace space({d, d}, guard);
  const CompSubspace sub(space);
  const auto step = dilated_trotter_step(kerr, r, eta, t, steps, space, cfg.ancilla);
  const Matrix block = propagate_block(step, steps, sub);
  const PhaseFrame frame = cfg.frame == Frame::literal ? PhaseFrame::identity() : limit_frame(kerr, r, t, sub);
  return channel_gate_error_block(block, phi, frame);
}

inline json base_metadata(const SweepConfig& cfg, const RunOptions& opt) {
  json m;
  m["experiment"] = to_string(cfg.experiment);
  m["config_hash"] = config_hash(cfg);
  m["config"] = cfg.to_json();
  m["frame"] = to_string(cfg.frame);
  m["tolerances"] = {{"herm", tol::herm},   {"trace", tol::trace}, {"pos", tol::pos},
                     {"unitary", tol::unitary}, {"expm", tol::expm}, {"cptp", tol::cptp},
                     {"trunc", tol::trunc}, {"convergence", cfg.cutoffs.rel_tol}, {"kraus_drop", tol::kraus_drop}};
  m["cutoffs"] = {{"start", cfg.cutoffs.start}, {"step", cfg.cutoffs.step}, {"max", cfg.cutoffs.max_cutoff},
                  {"ancilla", cfg.ancilla}};
  m["seed"] = opt.seed ? json(*opt.seed) : json(nullptr);
  return m;
}

//============================================================================
// Runners
//============================================================================

// Gate error of the limit channel over (phi, r) in two panels.
inline ResultTable run_fig2a(const SweepConfig& cfg, const RunOptions& opt = {}) {
  if (cfg.experiment != Experiment::fig2a) throw std::invalid_argument("run_fig2a: config is not fig2a");
  cfg.validate();
  ResultTable table;
  table.experiment = cfg.experiment;
  table.param_columns = {"panel_phi_max", "phi", "r_db", "r", "t"};
  std::vector<Task> tasks;
  for (double pmax : cfg.phi_max) {
    const std::string series = "phi_max=" + fmt(pmax);
    for (int k = 1; k <= cfg.phi_count; ++k) {
      const double phi = pmax * k / cfg.phi_count;
      for (double r : cfg.r) {
        tasks.push_back([&cfg, series, pmax, phi, r] {
          const double t = two_mode_time(phi, cfg.chi, r);
          const Converged c =
              converge_cutoff([&](int d) { return limit_gate_error(cfg, r, phi, t, d, cfg.eta_rate()); }, cfg.cutoffs);
          return std::vector<ResultRow>{
              make_row(series, {{"panel_phi_max", pmax}, {"phi", phi}, {"r_db", r_to_db(r)}, {"r", r}, {"t", t}}, c)};
        });
      }
    }
  }
  table.rows = run_tasks(tasks, opt);
  if (cfg.normalize) normalize_rows(table.rows);
  table.metadata = base_metadata(cfg, opt);
  return table;
}

// Composed dilated channel for each N plus the limit channel, over r.
inline ResultTable run_fig2b(const SweepConfig& cfg, const RunOptions& opt = {}) {
  if (cfg.experiment != Experiment::fig2b) throw std::invalid_argument("run_fig2b: config is not fig2b");
  cfg.validate();
  ResultTable table;
  table.experiment = cfg.experiment;
  table.param_columns = {"phi", "curve", "steps", "r_db", "r", "t"};
  std::vector<Task> tasks;
  for (double phi : cfg.phi_grid) {
    for (std::size_t c = 0; c <= cfg.n_list.size(); ++c) {
      const bool limit = c == cfg.n_list.size();
      const int n = limit ? 0 : cfg.n_list[c];
      const std::string curve = limit ? "limit" : "N=" + std::to_string(n);
      const std::string series = "phi=" + fmt(phi) + ";" + curve;
      for (double r : cfg.r) {
        tasks.push_back([&cfg, series, curve, limit, n, phi, r] {
          const double t = two_mode_time(phi, cfg.chi, r);
          const Converged cv = converge_cutoff(
              [&](int d) {
                return limit ? limit_gate_error(cfg, r, phi, t, d, cfg.eta_rate())
                             : dilated_gate_error(cfg, r, phi, t, n, d, cfg.eta_rate());
              },
              cfg.cutoffs);
          json params = {{"phi", phi}, {"curve", curve}, {"steps", limit ? json(nullptr) : json(n)},
                         {"r_db", r_to_db(r)}, {"r", r}, {"t", t}};
          return std::vector<ResultRow>{make_row(series, std::move(params), cv)};
        });
      }
    }
  }
  table.rows = run_tasks(tasks, opt);
  if (cfg.normalize) normalize_rows(table.rows);
  table.metadata = base_metadata(cfg, opt);
  return table;
}

// Single-mode sequence error against the bound for each (chi t, lambda).
inline double single_mode_sequence_error(const SweepConfig& cfg, double chi_t, double r, int steps, int d) {
  const KerrSpec kerr = KerrSpec::two_mode(cfg.chi);
  const int guard = cfg.guard >= 0 ? cfg.guard : default_guard(r);
  const FockSpace space({d, 2}, guard);
  const CompSubspace sub(space);
  const SequenceSpec seq(Variant::single_mode, steps, chi_t / cfg.chi, r, kerr);
  const Matrix cols = sequence_on_kets(seq, space, sub.kets());
  Matrix restricted(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) restricted(i, j) = cols(sub.basis()[i], j);
  }
  const double phi = seq.amplification() * chi_t;
  const PhaseFrame frame = cfg.frame == Frame::literal ? PhaseFrame::identity() : sequence_frame(seq, sub);
  return gate_error_restricted(restricted, phi, frame);
}

inline ResultTable run_figS1(const SweepConfig& cfg, const RunOptions& opt = {}) {
  if (cfg.experiment != Experiment::figS1) throw std::invalid_argument("run_figS1: config is not figs1");
  cfg.validate();
  ResultTable table;
  table.experiment = cfg.experiment;
  table.param_columns = {"chi_t", "lambda", "r", "phi", "steps"};
  table.extra_columns = {"bound"};
  if (cfg.normalize) table.extra_columns.push_back("normalized_bound");
  std::vector<Task> tasks;
  for (const auto& [chi_t, lambda] : cfg.s1_pairs) {
    const double r = std::acosh(lambda) / 2;
    const std::string series = "chi_t=" + fmt(chi_t) + ";lambda=" + fmt(lambda);
    for (int n : cfg.n_list) {
      tasks.push_back([&cfg, series, chi_t, lambda, r, n] {
        const Converged c =
            converge_cutoff([&](int d) { return single_mode_sequence_error(cfg, chi_t, r, n, d); }, cfg.cutoffs);
        ResultRow row = make_row(
            series, {{"chi_t", chi_t}, {"lambda", lambda}, {"r", r}, {"phi", lambda * chi_t}, {"steps", n}}, c);
        row.extras["bound"] = trotter_bound(cfg.chi, chi_t / cfg.chi, r, n);
        return std::vector<ResultRow>{row};
      });
    }
  }
  table.rows = run_tasks(tasks, opt);
  if (cfg.normalize) normalize_rows(table.rows, {"bound"});
  table.metadata = base_metadata(cfg, opt);
  return table;
}

// Full-superoperator distance of the composed dilated channel from the
// limit channel, at the reference chi t and loss, for each phi.
inline ResultTable run_figS2(const SweepConfig& cfg, const RunOptions& opt = {}) {
  if (cfg.experiment != Experiment::figS2) throw std::invalid_argument("run_figS2: config is not figs2");
  cfg.validate();
  ResultTable table;
  table.experiment = cfg.experiment;
  table.param_columns = {"phi", "r_db", "r", "steps"};
  const KerrSpec kerr = KerrSpec::two_mode(cfg.chi);
  const double t = cfg.chi_t / cfg.chi;
  const KerrTerm term = cfg.frame == Frame::literal ? KerrTerm::amplified : KerrTerm::averaged;
  std::vector<Task> tasks;
  for (double phi : cfg.phi_grid) {
    tasks.push_back([&cfg, kerr, t, term, phi] {
      const double r = std::acosh(std::sqrt(phi / cfg.chi_t)) / 2;
      const int guard = cfg.guard >= 0 ? cfg.guard : default_guard(r);
      const auto conv = converge_cutoff_all(
          [&](int d) {
            return channel_convergence_errors(kerr, r, cfg.eta_rate(), t, cfg.n_list, FockSpace({d, d}, guard),
                                              cfg.ancilla, term);
          },
          cfg.cutoffs);
      std::vector<ResultRow> rows;
      const std::string series = "phi=" + fmt(phi);
      for (std::size_t k = 0; k < cfg.n_list.size(); ++k) {
        rows.push_back(make_row(series, {{"phi", phi}, {"r_db", r_to_db(r)}, {"r", r}, {"steps", cfg.n_list[k]}},
                                conv[k]));
      }
      return rows;
    });
  }
  table.rows = run_tasks(tasks, opt);
  if (cfg.normalize) normalize_rows(table.rows);
  table.metadata = base_metadata(cfg, opt);
  return table;
}

// Bytes needed by the largest dense object of one custom evaluation.
inline double custom_memory_bytes(const SweepConfig& cfg, int d) {
  const double c16 = 16.0;
  switch (cfg.noise) {
    case CustomNoise::none: {
      const double dim = std::pow(double(d), cfg.modes);
      const int guard = cfg.guard >= 0 ? cfg.guard : 20;
      const double sq = std::pow(double(d + guard), 2);
      return c16 * (dim * std::pow(2.0, cfg.modes) * 2 + sq * 4);
    }
    case CustomNoise::limit_channel: {
      const double sector = double(d) * d;
      return c16 * sector * sector * 4;
    }
    case CustomNoise::dilated_steps: {
      const double full = double(d) * d * cfg.ancilla * cfg.ancilla;
      return c16 * full * full * 3;
    }
  }
  return 0.0;
}

// Projected error on the 2^n occupation-{0,1} kets of the Kerr modes.
inline double custom_unitary_error(const SweepConfig& cfg, double r, double t, int steps, int d) {
  std::vector<int> modes(cfg.modes);
  for (int k = 0; k < cfg.modes; ++k) modes[k] = k;
  const KerrSpec kerr(cfg.chi, modes);
  const int guard = cfg.guard >= 0 ? cfg.guard : default_guard(r);
  std::vector<int> dims(cfg.modes, d);
  if (cfg.variant == Variant::single_mode) dims[1] = 2;
  const FockSpace space(dims, guard);
  const int nk = 1 << cfg.modes;
  Matrix kets = Matrix::Zero(space.dim(), nk);
  for (int q = 0; q < nk; ++q) {
    std::vector<int> occ(cfg.modes);
    for (int k = 0; k < cfg.modes; ++k) occ[k] = (q >> (cfg.modes - 1 - k)) & 1;
    kets(space.index(occ), q) = 1.0;
  }
  const SequenceSpec seq(cfg.variant, steps, t, r, kerr);
  const Matrix v = sequence_on_kets(seq, space, kets);
  // Both targets are diagonal: read their phases on the kets.
  const Operator h = cfg.frame == Frame::literal ? Operator(space, seq.amplification() * cross_kerr_h(kerr, space).mat)
                                                 : trotter_limit_hamiltonian(seq, space);
  Matrix target = Matrix::Zero(space.dim(), nk);
  for (int q = 0; q < nk; ++q) {
    for (Index i = 0; i < space.dim(); ++i) {
      if (kets(i, q) != cplx(0.0)) target(i, q) = std::polar(1.0, -t * h.mat(i, i).real());
    }
  }
  return projected_error(v, target);
}

inline ResultTable run_custom(const SweepConfig& cfg, const RunOptions& opt = {}) {
  if (cfg.experiment != Experiment::custom) throw std::invalid_argument("run_custom: config is not custom");
  cfg.validate();
  const double need = custom_memory_bytes(cfg, cfg.cutoffs.max_cutoff);
  if (need > cfg.memory_limit_mb * 1024.0 * 1024.0) {
    std::ostringstream msg;
    const double dim = cfg.noise == CustomNoise::none ? std::pow(double(cfg.cutoffs.max_cutoff), cfg.modes)
                                                      : std::pow(double(cfg.cutoffs.max_cutoff), 2);
    msg << "custom: refusing to run; max cutoff " << cfg.cutoffs.max_cutoff << " over " << cfg.modes
        << " modes gives Hilbert dimension " << fmt(dim) << " and needs about " << fmt(need / (1024.0 * 1024.0))
        << " MiB, above the limit of " << fmt(cfg.memory_limit_mb) << " MiB";
    throw std::invalid_argument(msg.str());
  }
  ResultTable table;
  table.experiment = cfg.experiment;
  table.param_columns = {"variant", "modes", "noise", "r_db", "r", "amplification", "phi", "chi_t", "steps", "eta_db"};
  const std::vector<double> etas = cfg.noise == CustomNoise::none
                                       ? std::vector<double>{0.0}
                                       : (cfg.eta_db_list.empty() ? std::vector<double>{cfg.eta_db} : cfg.eta_db_list);
  const bool by_phi = !cfg.phi_grid.empty();
  const std::vector<double>& phase_axis = by_phi ? cfg.phi_grid : cfg.chi_t_list;
  std::vector<Task> tasks;
  for (double eta_db : etas) {
    for (double x : phase_axis) {
      for (int n : cfg.n_list) {
        const std::string series = "eta_db=" + fmt(eta_db) + ";" + (by_phi ? "phi=" : "chi_t=") + fmt(x) +
                                   ";N=" + std::to_string(n);
        for (double r : cfg.r) {
          tasks.push_back([&cfg, series, eta_db, x, by_phi, n, r] {
            std::vector<int> modes(cfg.modes);
            for (int k = 0; k < cfg.modes; ++k) modes[k] = k;
            const SequenceSpec probe(cfg.variant, n, 1.0, r, KerrSpec(cfg.chi, modes));
            const double lambda = probe.amplification();
            const double chi_t = by_phi ? x / lambda : x;
            const double phi = lambda * chi_t;
            const double t = chi_t / cfg.chi;
            const Converged c = converge_cutoff(
                [&](int d) {
                  switch (cfg.noise) {
                    case CustomNoise::none: return custom_unitary_error(cfg, r, t, n, d);
                    case CustomNoise::limit_channel: return limit_gate_error(cfg, r, phi, t, d, cfg.eta_rate(eta_db));
                    case CustomNoise::dilated_steps:
                      return dilated_gate_error(cfg, r, phi, t, n, d, cfg.eta_rate(eta_db));
                  }
                  return 0.0;
                },
                cfg.cutoffs);
            json params = {{"variant", to_string(cfg.variant)}, {"modes", cfg.modes}, {"noise", to_string(cfg.noise)},
                           {"r_db", r_to_db(r)}, {"r", r}, {"amplification", lambda}, {"phi", phi},
                           {"chi_t", chi_t}, {"steps", n}, {"eta_db", eta_db}};
            return std::vector<ResultRow>{make_row(series, std::move(params), c)};
          });
        }
      }
    }
  }
  table.rows = run_tasks(tasks, opt);
  if (cfg.normalize) normalize_rows(table.rows);
  table.metadata = base_metadata(cfg, opt);
  return table;
}

inline ResultTable run_experiment(const SweepConfig& cfg, const RunOptions& opt = {}) {
  switch (cfg.experiment) {
    case Experiment::fig2a: return run_fig2a(cfg, opt);
    case Experiment::fig2b: return run_fig2b(cfg, opt);
    case Experiment::figS1: return run_figS1(cfg, opt);
    case Experiment::figS2: return run_figS2(cfg, opt);
    case Experiment::custom: return run_custom(cfg, opt);
  }
  throw std::invalid_argument("run_experiment: unknown experiment");
}

//============================================================================
// Output
//============================================================================

inline std::string csv_cell(const json& v) {
  if (v.is_null()) return "inf";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return fmt(v.get<double>());
}

inline void write_csv(std::ostream& os, const ResultTable& t, bool with_normalized, bool with_timing) {
  os << "series";
  for (const auto& c : t.param_columns) os << ',' << c;
  os << ",raw_error";
  if (with_normalized) os << ",normalized_error";
  for (const auto& c : t.extra_columns) os << ',' << c;
  os << ",cutoff_used,converged";
  if (with_timing) os << ",wall_time";
  os << '\n';
  for (const auto& r : t.rows) {
    os << r.series;
    for (const auto& c : t.param_columns) os << ',' << csv_cell(r.params.at(c));
    os << ',' << fmt(r.raw_error);
    if (with_normalized) os << ',' << (r.normalized_error ? fmt(*r.normalized_error) : "");
    for (const auto& c : t.extra_columns) os << ',' << csv_cell(r.extras.at(c));
    os << ',' << r.cutoff_used << ',' << (r.converged ? "true" : "false");
    if (with_timing) os << ',' << (r.wall_time ? fmt(*r.wall_time) : "");
    os << '\n';
  }
}

inline json table_to_json(const ResultTable& t, bool with_normalized, bool with_timing) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row;
    row["series"] = r.series;
    for (const auto& c : t.param_columns) row[c] = r.params.at(c);
    row["raw_error"] = r.raw_error;
    if (with_normalized) row["normalized_error"] = r.normalized_error ? json(*r.normalized_error) : json(nullptr);
    for (const auto& c : t.extra_columns) row[c] = r.extras.at(c);
    row["cutoff_used"] = r.cutoff_used;
    row["converged"] = r.converged;
    if (with_timing) row["wall_time"] = r.wall_time ? json(*r.wall_time) : json(nullptr);
    rows.push_back(std::move(row));
  }
  json out;
  out["metadata"] = t.metadata;
  out["rows"] = std::move(rows);
  return out;
}

inline void write_table(std::ostream& os, const ResultTable& t, Format format, bool with_normalized,
                        bool with_timing) {
  if (format == Format::csv) {
    write_csv(os, t, with_normalized, with_timing);
  } else {
    os << table_to_json(t, with_normalized, with_timing).dump(2) << '\n';
  }
}

}  // namespace kerramp

#endif  // KERRAMP_EXPERIMENTS_HPP

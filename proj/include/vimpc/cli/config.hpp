#pragma once

// JSON experiment configuration.
//
//   {
//     "experiment": "sweep1d",
//     "output_dir": "out/sweep1d",
//     "parameters": { "k_max": 500, "alpha_grid": {"lo": 0.1, "hi": 316, "points": 36} }
//   }
//
// Every key inside "parameters" is optional; missing ones take the nominal
// values. Keys not accepted by the chosen experiment raise UnknownKey.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vimpc/analysis.hpp"
#include "vimpc/core.hpp"
#include "vimpc/errors.hpp"
#include "vimpc/slip2d.hpp"
#include "vimpc/sweep.hpp"

namespace vimpc::cli {

using nlohmann::json;

enum class Experiment { Sweep1D, Robustness, Slip2D, Conservative, Thresholds };

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::Sweep1D: return "sweep1d";
    case Experiment::Robustness: return "robustness";
    case Experiment::Slip2D: return "slip2d";
    case Experiment::Conservative: return "conservative";
    case Experiment::Thresholds: return "thresholds";
  }
  return "";
}

inline Experiment parse_experiment(const std::string& tag) {
  for (auto e : {Experiment::Sweep1D, Experiment::Robustness, Experiment::Slip2D, Experiment::Conservative,
                 Experiment::Thresholds}) {
    if (tag == to_string(e)) return e;
  }
  throw ConfigError("unknown experiment '" + tag + "'");
}

struct GridSpec {
  double lo = 0.1;
  double hi = 316.0;
  std::size_t points = 36;

  std::vector<double> values() const { return log_grid(lo, hi, points); }
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Sweep1D;
  std::string output_dir = "out";

  TaskParams1D task;
  SlipParams slip;
  GridSpec alpha_grid;
  std::vector<double> v_td_ensemble{1.5, 2.0, 2.5};
  std::vector<ControllerKind> controllers{ParamBased{}, StiffnessAsState{}};
  std::vector<RobustnessCombo> combos = default_robustness_combos();
  std::vector<double> angles_deg{15.0, 20.0};
  std::vector<double> spot_angles_deg{30.0};
  std::vector<double> spot_alphas{0.5, 1.0};
  double alpha = 12.5;  // thresholds: single operating point
  bool with_costs = true;
  unsigned threads = 0;

  json echo;  // parameters block as read
};

namespace detail {

inline const std::set<std::string>& allowed_keys(Experiment e) {
  static const std::set<std::string> sweep{"m", "g", "l0", "T", "k_min", "k_max", "alpha_grid", "v_td_ensemble",
                                           "controllers", "threads"};
  static const std::set<std::string> robust{"g", "l0", "alpha_grid", "v_td_ensemble", "combos", "threads"};
  static const std::set<std::string> slip{"m", "g", "l0", "k_min", "k_max", "mu", "v_forward", "h_drop",
                                          "T_nominal", "alpha_grid", "angles_deg", "spot_angles_deg",
                                          "spot_alphas", "threads"};
  static const std::set<std::string> conservative{"m", "g", "l0", "T", "k_min", "k_max", "v_td", "alpha_grid",
                                                  "with_costs"};
  static const std::set<std::string> thresholds{"m", "g", "l0", "T", "k_min", "k_max", "v_td", "alpha"};
  switch (e) {
    case Experiment::Sweep1D: return sweep;
    case Experiment::Robustness: return robust;
    case Experiment::Slip2D: return slip;
    case Experiment::Conservative: return conservative;
    case Experiment::Thresholds: return thresholds;
  }
  return sweep;
}

inline void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw UnknownKey("unknown key '" + key + "' in " + where);
  }
}

inline double number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

inline std::vector<double> numbers(const json& obj, const std::string& key, std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError("'" + key + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline unsigned count(const json& obj, const std::string& key, unsigned fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) throw ConfigError("'" + key + "' must be a non-negative integer");
  return v.get<unsigned>();
}

inline GridSpec grid(const json& obj, GridSpec g) {
  if (!obj.contains("alpha_grid")) return g;
  const auto& v = obj.at("alpha_grid");
  check_keys(v, {"lo", "hi", "points"}, "alpha_grid");
  g.lo = number(v, "lo", g.lo);
  g.hi = number(v, "hi", g.hi);
  g.points = count(v, "points", static_cast<unsigned>(g.points));
  return g;
}

inline ControllerKind parse_controller(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "param") return ParamBased{};
    if (s == "state") return StiffnessAsState{};
    throw ConfigError("unknown controller '" + s + "'");
  }
  if (v.is_object()) {
    check_keys(v, {"conservative"}, "controller");
    const auto& c = v.at("conservative");
    check_keys(c, {"k_max_prime"}, "conservative controller");
    if (!c.contains("k_max_prime")) throw ConfigError("conservative controller needs k_max_prime");
    return ConservativeParamBased{number(c, "k_max_prime", 0.0)};
  }
  throw ConfigError("controller must be \"param\", \"state\" or {\"conservative\": {...}}");
}

inline TaskParams1D task_params(const json& p) {
  TaskParams1D t;
  t.m = number(p, "m", t.m);
  t.g = number(p, "g", t.g);
  t.l0 = number(p, "l0", t.l0);
  t.T = number(p, "T", t.T);
  t.k_min = number(p, "k_min", t.k_min);
  t.k_max = number(p, "k_max", t.k_max);
  t.v_td = number(p, "v_td", t.v_td);
  return t;
}

inline SlipParams slip_params(const json& p) {
  SlipParams s;
  s.m = number(p, "m", s.m);
  s.g = number(p, "g", s.g);
  s.l0 = number(p, "l0", s.l0);
  s.k_min = number(p, "k_min", s.k_min);
  s.k_max = number(p, "k_max", s.k_max);
  s.mu = number(p, "mu", s.mu);
  s.v_forward = number(p, "v_forward", s.v_forward);
  s.h_drop = number(p, "h_drop", s.h_drop);
  s.T_nominal = number(p, "T_nominal", s.T_nominal);
  s.omega_s = 25.0 / s.T_nominal;
  return s;
}

}  // namespace detail

/// Checks everything a run depends on, so failures surface before computation.
inline void validate(const ExperimentConfig& c) {
  const auto grid = c.alpha_grid.values();
  switch (c.experiment) {
    case Experiment::Sweep1D: {
      if (c.controllers.empty()) throw ValidationError("controllers must not be empty");
      SweepConfig sc{grid, c.v_td_ensemble, c.task, c.controllers, c.threads};
      validate(sc);
      for (const auto& k : c.controllers) {
        for (double v : c.v_td_ensemble) validate(k, c.task.with_v_td(v));
      }
      break;
    }
    case Experiment::Robustness:
      if (c.combos.empty()) throw ValidationError("combos must not be empty");
      if (c.v_td_ensemble.empty()) throw ValidationError("v_td_ensemble must not be empty");
      for (const auto& cb : c.combos) {
        TaskParams1D p = c.task;
        p.m = cb.m;
        p.T = cb.T;
        p.k_min = cb.k_min;
        p.k_max = cb.k_max;
        for (double v : c.v_td_ensemble) validate(p.with_v_td(v));
      }
      break;
    case Experiment::Slip2D:
      validate(c.slip);
      for (double a : c.angles_deg) validate(c.slip.with_angle_deg(a));
      for (double a : c.spot_angles_deg) validate(c.slip.with_angle_deg(a));
      for (double a : c.spot_alphas) validate(c.slip.with_alpha(a));
      break;
    case Experiment::Conservative:
      validate(c.task);
      break;
    case Experiment::Thresholds:
      validate(c.task.with_alpha(c.alpha));
      break;
  }
}

inline ExperimentConfig parse_config(const json& doc) {
  detail::check_keys(doc, {"experiment", "output_dir", "parameters"}, "config");
  if (!doc.contains("experiment") || !doc.at("experiment").is_string()) {
    throw ConfigError("config needs a string 'experiment'");
  }
  ExperimentConfig c;
  c.experiment = parse_experiment(doc.at("experiment").get<std::string>());
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string()) throw ConfigError("'output_dir' must be a string");
    c.output_dir = doc.at("output_dir").get<std::string>();
  } else {
    c.output_dir = std::string("out/") + to_string(c.experiment);
  }

  const json p = doc.contains("parameters") ? doc.at("parameters") : json::object();
  detail::check_keys(p, detail::allowed_keys(c.experiment), "parameters");
  c.echo = p;

  c.task = detail::task_params(p);
  c.slip = detail::slip_params(p);
  c.alpha_grid = detail::grid(p, c.alpha_grid);
  c.v_td_ensemble = detail::numbers(p, "v_td_ensemble", c.v_td_ensemble);
  c.angles_deg = detail::numbers(p, "angles_deg", c.angles_deg);
  c.spot_angles_deg = detail::numbers(p, "spot_angles_deg", c.spot_angles_deg);
  c.spot_alphas = detail::numbers(p, "spot_alphas", c.spot_alphas);
  c.alpha = detail::number(p, "alpha", c.alpha);
  c.threads = detail::count(p, "threads", c.threads);
  if (p.contains("with_costs")) {
    if (!p.at("with_costs").is_boolean()) throw ConfigError("'with_costs' must be a boolean");
    c.with_costs = p.at("with_costs").get<bool>();
  }
  if (p.contains("controllers")) {
    if (!p.at("controllers").is_array()) throw ConfigError("'controllers' must be an array");
    c.controllers.clear();
    for (const auto& v : p.at("controllers")) c.controllers.push_back(detail::parse_controller(v));
  }
  if (p.contains("combos")) {
    if (!p.at("combos").is_array()) throw ConfigError("'combos' must be an array");
    c.combos.clear();
    for (const auto& v : p.at("combos")) {
      detail::check_keys(v, {"m", "T", "k_min", "k_max"}, "combo");
      RobustnessCombo cb;
      cb.m = detail::number(v, "m", cb.m);
      cb.T = detail::number(v, "T", cb.T);
      cb.k_min = detail::number(v, "k_min", cb.k_min);
      cb.k_max = detail::number(v, "k_max", cb.k_max);
      c.combos.push_back(cb);
    }
  }
  validate(c);
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  return parse_config(doc);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Nominal configuration for an experiment, as if loaded from an empty
/// parameter block.
inline ExperimentConfig default_config(Experiment e) {
  return parse_config(json{{"experiment", to_string(e)}});
}

}  // namespace vimpc::cli

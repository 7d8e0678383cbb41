// Copyright 2026 The ddopt Authors
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

#include "ddopt/scenario_config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "ddopt/error.hpp"
#include "json.hpp"

namespace ddopt {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void Fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kConfigError, path + ": " + what);
}

// Value conversions. Each FromJson checks the JSON type and reports the
// key path on mismatch.
void FromJson(const json& j, double& v, const std::string& p) {
  if (!j.is_number()) Fail(p, "expected a number");
  v = j.get<double>();
}
void FromJson(const json& j, int& v, const std::string& p) {
  if (!j.is_number_integer()) Fail(p, "expected an integer");
  v = j.get<int>();
}
void FromJson(const json& j, std::uint64_t& v, const std::string& p) {
  if (!j.is_number_unsigned()) Fail(p, "expected a non-negative integer");
  v = j.get<std::uint64_t>();
}
void FromJson(const json& j, bool& v, const std::string& p) {
  if (!j.is_boolean()) Fail(p, "expected true or false");
  v = j.get<bool>();
}
void FromJson(const json& j, std::string& v, const std::string& p) {
  if (!j.is_string()) Fail(p, "expected a string");
  v = j.get<std::string>();
}
void FromJson(const json& j, WorldKind& v, const std::string& p) {
  std::string s;
  FromJson(j, s, p);
  try {
    v = ParseWorldKind(s);
  } catch (const Error& e) {
    Fail(p, e.what());
  }
}
void FromJson(const json& j, TrackerModel& v, const std::string& p) {
  std::string s;
  FromJson(j, s, p);
  try {
    v = ParseTrackerModel(s);
  } catch (const Error& e) {
    Fail(p, e.what());
  }
}
void FromJson(const json& j, ScenarioKind& v, const std::string& p) {
  std::string s;
  FromJson(j, s, p);
  try {
    v = ParseScenarioKind(s);
  } catch (const Error& e) {
    Fail(p, e.what());
  }
}
template <int N>
void FromJson(const json& j, Eigen::Matrix<double, N, 1>& v, const std::string& p) {
  if (!j.is_array() || j.size() != N) Fail(p, "expected an array of " + std::to_string(N) + " numbers");
  for (int k = 0; k < N; ++k) FromJson(j[static_cast<std::size_t>(k)], v(k), p + "[" + std::to_string(k) + "]");
}
template <class T>
void FromJson(const json& j, std::vector<T>& v, const std::string& p) {
  if (!j.is_array()) Fail(p, "expected an array");
  v.assign(j.size(), T{});
  for (std::size_t k = 0; k < j.size(); ++k) FromJson(j[k], v[k], p + "[" + std::to_string(k) + "]");
}
template <class T>
void FromJson(const json& j, std::optional<T>& v, const std::string& p) {
  if (j.is_null()) {
    v.reset();
    return;
  }
  T t{};
  FromJson(j, t, p);
  v = t;
}

json ToJson(WorldKind v) { return std::string(ToString(v)); }
json ToJson(TrackerModel v) { return std::string(ToString(v)); }
json ToJson(ScenarioKind v) { return std::string(ToString(v)); }
template <class T>
json ToJson(const T& v) {
  return v;
}
template <int N>
json ToJson(const Eigen::Matrix<double, N, 1>& v) {
  json a = json::array();
  for (int k = 0; k < N; ++k) a.push_back(v(k));
  return a;
}
template <class T>
json ToJson(const std::vector<T>& v) {
  json a = json::array();
  for (const T& x : v) a.push_back(ToJson(x));
  return a;
}
template <class T>
json ToJson(const std::optional<T>& v) {
  return v ? ToJson(*v) : json(nullptr);
}

// Reads into or writes from the same field list, so both directions share
// one schema definition.
class Binder {
 public:
  Binder(json* j, bool reading, std::string path)
      : j_(j), reading_(reading), path_(std::move(path)) {
    if (reading_ && !j_->is_object()) Fail(Name(), "expected an object");
  }

  template <class T>
  void Field(const char* key, T& value) {
    if (reading_) {
      seen_.insert(key);
      if (j_->contains(key)) FromJson((*j_)[key], value, Join(key));
    } else {
      (*j_)[key] = ToJson(value);
    }
  }

  template <class F>
  void Section(const char* key, F&& bind) {
    if (reading_) {
      seen_.insert(key);
      if (!j_->contains(key)) return;
      Binder sub(&(*j_)[key], true, Join(key));
      bind(sub);
      sub.Finish();
    } else {
      json obj = json::object();
      Binder sub(&obj, false, Join(key));
      bind(sub);
      (*j_)[key] = std::move(obj);
    }
  }

  void Finish() const {
    if (!reading_) return;
    for (const auto& [k, v] : j_->items()) {
      if (!seen_.count(k)) Fail(Join(k), "unknown key");
    }
  }

 private:
  std::string Join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  std::string Name() const { return path_.empty() ? "config" : path_; }

  json* j_;
  bool reading_;
  std::string path_;
  std::set<std::string> seen_;
};

void BindLbfgs(Binder& b, LbfgsParams& p) {
  b.Field("memory", p.memory);
  b.Field("g_tol", p.g_tol);
  b.Field("f_tol", p.f_tol);
  b.Field("past", p.past);
  b.Field("max_iterations", p.max_iterations);
  b.Field("max_linesearch", p.max_linesearch);
  b.Field("c1", p.c1);
  b.Field("c2", p.c2);
}

void BindIcr(Binder& b, IcrParams& icr) {
  b.Field("y_il", icr.y_il);
  b.Field("y_ir", icr.y_ir);
  b.Field("x_iv", icr.x_iv);
}

void BindAll(Binder& b, ScenarioConfig& c) {
  b.Field("seed", c.seed);
  b.Field("output_dir", c.output_dir);
  b.Section("world", [&](Binder& s) {
    s.Field("kind", c.world.kind);
    s.Field("seed", c.world.seed);
    s.Field("map_file", c.world.map_file);
  });
  Limits& lim = c.problem.limits;
  b.Section("limits", [&](Binder& s) {
    s.Field("v_max", lim.v_max);
    s.Field("v_min", lim.v_min);
    s.Field("omega_max", lim.omega_max);
    s.Field("a_max", lim.a_max);
    s.Field("alpha_max", lim.alpha_max);
    s.Field("safety_distance", lim.safety_distance);
    s.Field("eps_low", lim.eps_low);
    s.Field("eps_upp", lim.eps_upp);
    std::vector<Eigen::Vector2d> contour(lim.contour.begin(), lim.contour.end());
    s.Field("contour", contour);
    lim.contour.assign(contour.begin(), contour.end());
  });
  b.Section("icr", [&](Binder& s) { BindIcr(s, c.problem.icr); });
  ProblemConfig& pc = c.problem;
  b.Section("solver", [&](Binder& s) {
    s.Field("rho0", pc.alm.rho0);
    s.Field("growth", pc.alm.growth);
    s.Field("rho_max", pc.alm.rho_max);
    s.Field("e_max", pc.alm.e_max);
    s.Field("max_outer", pc.alm.max_outer);
    s.Field("escalation", pc.alm.escalation);
    s.Field("max_escalations", pc.alm.max_escalations);
    s.Field("energy_weight", pc.energy_weight);
    s.Field("time_weight", pc.time_weight);
    s.Field("intervals", pc.intervals);
    s.Field("segment_length", pc.segment_length);
    s.Field("initial_duration", pc.initial_duration);
    s.Field("robot_radius", pc.robot_radius);
    s.Field("max_violation", pc.max_violation);
    s.Field("max_junction_residual", pc.max_junction_residual);
    s.Field("preprocess_enabled", pc.preprocess_enabled);
    s.Section("weights", [&](Binder& w) {
      w.Field("velocity", pc.weights.velocity);
      w.Field("accel", pc.weights.accel);
      w.Field("yaw_accel", pc.weights.yaw_accel);
      w.Field("safety", pc.weights.safety);
      w.Field("duration", pc.weights.duration);
      w.Field("anchor", pc.weights.anchor);
    });
    s.Section("inner", [&](Binder& l) { BindLbfgs(l, pc.inner); });
    s.Section("preprocess", [&](Binder& l) { BindLbfgs(l, pc.preprocess); });
  });
  b.Section("plan", [&](Binder& s) {
    s.Field("start", c.plan.start);
    s.Field("goal", c.plan.goal);
  });
  b.Section("bench", [&](Binder& s) {
    s.Field("obstacle_counts", c.bench.obstacle_counts);
    s.Field("obstacle_size", c.bench.obstacle_size);
    s.Field("runs", c.bench.runs);
    s.Field("min_length", c.bench.min_length);
    s.Field("max_length", c.bench.max_length);
    s.Field("bucket_edges", c.bench.bucket_edges);
  });
  b.Section("integral", [&](Binder& s) {
    s.Field("worlds", c.integral.worlds);
    s.Field("runs", c.integral.runs);
    s.Field("intervals", c.integral.intervals);
    s.Field("refine", c.integral.refine);
    s.Field("min_length", c.integral.min_length);
    s.Field("max_length", c.integral.max_length);
    s.Field("threshold", c.integral.threshold);
  });
  b.Section("slip", [&](Binder& s) {
    s.Field("runs", c.slip.runs);
    s.Field("min_length", c.slip.min_length);
    s.Field("max_length", c.slip.max_length);
    s.Field("tracked_runs", c.slip.tracked_runs);
    s.Section("icr", [&](Binder& i) { BindIcr(i, c.slip.slip_icr); });
  });
  SimulationConfig& sim = c.simulation.config;
  b.Section("simulation", [&](Binder& s) {
    s.Field("scenario", c.simulation.scenario);
    s.Field("runs", c.simulation.runs);
    s.Field("control_dt", sim.control_dt);
    s.Field("time_limit", sim.time_limit);
    s.Field("sensing_range", sim.sensing_range);
    s.Field("goal_tolerance", sim.goal_tolerance);
    s.Field("actuation_noise", sim.actuation_noise);
    s.Field("known_map", sim.known_map);
    s.Section("plant_icr", [&](Binder& i) { BindIcr(i, sim.plant_icr); });
  });
  b.Section("policy", [&](Binder& s) {
    ReplanPolicy& p = sim.policy;
    s.Field("compute_time", p.compute_time);
    s.Field("search_window", p.search_window);
    s.Field("max_length", p.max_length);
    s.Field("relaxed_e_max", p.relaxed_e_max);
    s.Field("rate", p.rate);
    s.Field("extend_margin", p.extend_margin);
    s.Field("sample_dt", p.sample_dt);
    s.Field("brake_horizon", p.brake_horizon);
    s.Field("max_map_age", p.max_map_age);
  });
  b.Section("tracker", [&](Binder& s) {
    HorizonProblem& t = sim.tracker;
    s.Field("horizon", t.horizon);
    s.Field("dt", t.dt);
    s.Field("w_pose", t.w_pose);
    s.Field("w_input", t.w_input);
    s.Field("u_min", t.u_min);
    s.Field("u_max", t.u_max);
    s.Field("model", t.model);
    s.Field("max_iterations", t.max_iterations);
    s.Field("memory", t.memory);
  });
}

}  // namespace

void ScenarioConfig::Validate() const {
  problem.Validate();
  simulation.config.Validate(problem);
  if (simulation.runs < 1) Fail("simulation.runs", "must be >= 1");
  if (bench.runs < 1) Fail("bench.runs", "must be >= 1");
  if (!(bench.obstacle_size > 0.0)) Fail("bench.obstacle_size", "must be > 0");
  for (int n : bench.obstacle_counts) {
    if (n < 0) Fail("bench.obstacle_counts", "counts must be >= 0");
  }
  for (std::size_t k = 1; k < bench.bucket_edges.size(); ++k) {
    if (!(bench.bucket_edges[k] > bench.bucket_edges[k - 1])) {
      Fail("bench.bucket_edges", "must be increasing");
    }
  }
  if (integral.runs < 1) Fail("integral.runs", "must be >= 1");
  if (integral.intervals < 1) Fail("integral.intervals", "must be >= 1");
  if (integral.refine < 2) Fail("integral.refine", "must be >= 2");
  if (integral.worlds.empty()) Fail("integral.worlds", "needs at least one world");
  if (slip.runs < 1) Fail("slip.runs", "must be >= 1");
  if (!slip.slip_icr.Valid()) Fail("slip.icr", "y_il must exceed y_ir");
}

ScenarioConfig ParseScenarioConfig(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  ScenarioConfig cfg;
  Binder b(&j, true, "");
  BindAll(b, cfg);
  b.Finish();
  cfg.bench.world = cfg.world.kind;
  cfg.Validate();
  return cfg;
}

ScenarioConfig LoadScenarioConfig(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIoError, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ParseScenarioConfig(ss.str());
}

std::string ScenarioConfigToJson(const ScenarioConfig& cfg, int indent) {
  json j = json::object();
  ScenarioConfig copy = cfg;
  Binder b(&j, false, "");
  BindAll(b, copy);
  return j.dump(indent);
}

}  // namespace ddopt

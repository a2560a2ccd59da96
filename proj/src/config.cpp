#include "handover/config.hpp"

#include <json.hpp>
#include <set>
#include <sstream>

#include "handover/textio.hpp"

namespace handover {

using nlohmann::json;

BoundsSet make_bounds(const BoundsKnobs& k, const SamplingBoxes& box, const QuadrotorParams& quad) {
  BoundsSet b;
  const double xy_lo = box.xy_min - k.position_margin;
  const double xy_hi = box.xy_max + k.position_margin;
  const double z_lo = box.z_min - k.position_margin;
  const double z_hi = box.z_max + k.position_margin;

  b.uav_state_lo << xy_lo, xy_lo, z_lo, -k.tilt_max, -k.tilt_max, -k.yaw_max, -k.uav_speed_max,
      -k.uav_speed_max, -k.uav_speed_max, -k.omega_max, -k.omega_max, -k.omega_max;
  b.uav_state_hi << xy_hi, xy_hi, z_hi, k.tilt_max, k.tilt_max, k.yaw_max, k.uav_speed_max,
      k.uav_speed_max, k.uav_speed_max, k.omega_max, k.omega_max, k.omega_max;
  b.ugv_state_lo << xy_lo, xy_lo, -k.ugv_speed_max, -k.ugv_speed_max;
  b.ugv_state_hi << xy_hi, xy_hi, k.ugv_speed_max, k.ugv_speed_max;
  b.uav_input_lo.setZero();
  b.uav_input_hi.setConstant(k.thrust_fraction * quad.mass * quad.gravity);
  b.ugv_input_lo << 0.0, -M_PI;
  b.ugv_input_hi << k.ugv_force_max, M_PI;
  b.slack_max = k.slack_max;
  b.dt_min = k.dt_min;
  b.dt_max = k.dt_max;
  return b;
}

namespace {

// section writer with fixed key order
class Writer {
 public:
  void section(const std::string& name) {
    if (!first_section_) out_ << ',';
    first_section_ = false;
    out_ << '"' << name << "\":{";
    first_key_ = true;
  }
  void key(const std::string& name, double v) {
    sep();
    out_ << '"' << name << "\":" << format_double(v);
  }
  void key(const std::string& name, int v) {
    sep();
    out_ << '"' << name << "\":" << v;
  }
  void key(const std::string& name, const Vec3& v) {
    sep();
    out_ << '"' << name << "\":[" << format_double(v[0]) << ',' << format_double(v[1]) << ','
         << format_double(v[2]) << ']';
  }
  void end_section() { out_ << '}'; }
  std::string str() { return "{" + out_.str() + "}"; }

 private:
  void sep() {
    if (!first_key_) out_ << ',';
    first_key_ = false;
  }
  std::ostringstream out_;
  bool first_section_ = true;
  bool first_key_ = true;
};

void expect_keys(const json& j, const std::string& section, const std::set<std::string>& known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError("unknown key \"" + it.key() + "\" in section \"" + section + "\"");
    }
  }
}

void read(const json& j, const char* key, double& out) {
  if (j.contains(key)) {
    if (!j[key].is_number()) throw ConfigError(std::string("key \"") + key + "\" must be a number");
    out = j[key].get<double>();
  }
}

void read(const json& j, const char* key, int& out) {
  if (j.contains(key)) {
    if (!j[key].is_number_integer())
      throw ConfigError(std::string("key \"") + key + "\" must be an integer");
    out = j[key].get<int>();
  }
}

void read(const json& j, const char* key, Vec3& out) {
  if (j.contains(key)) {
    if (!j[key].is_array() || j[key].size() != 3)
      throw ConfigError(std::string("key \"") + key + "\" must be an array of 3 numbers");
    for (int i = 0; i < 3; ++i) out[i] = j[key][i].get<double>();
  }
}

}  // namespace

std::string RunConfig::canonical_json() const {
  Writer w;
  w.section("bounds");
  w.key("dt_max", bounds_knobs.dt_max);
  w.key("dt_min", bounds_knobs.dt_min);
  w.key("omega_max", bounds_knobs.omega_max);
  w.key("position_margin", bounds_knobs.position_margin);
  w.key("slack_max", bounds_knobs.slack_max);
  w.key("thrust_fraction", bounds_knobs.thrust_fraction);
  w.key("tilt_max", bounds_knobs.tilt_max);
  w.key("uav_speed_max", bounds_knobs.uav_speed_max);
  w.key("ugv_force_max", bounds_knobs.ugv_force_max);
  w.key("ugv_speed_max", bounds_knobs.ugv_speed_max);
  w.key("yaw_max", bounds_knobs.yaw_max);
  w.end_section();

  w.section("cost");
  w.key("progress_weight", weights.progress_weight);
  w.key("state_weight", weights.state_weight);
  w.key("time_weight", weights.time_weight);
  w.end_section();

  w.section("handover");
  w.key("deactivation_distance", handover.deactivation_distance);
  w.key("hover_height", handover.hover_height);
  w.end_section();

  w.section("horizon");
  w.key("intervals", horizon.intervals);
  w.end_section();

  w.section("quadrotor");
  w.key("arm_length", quad.arm_length);
  w.key("drag_torque_coeff", quad.drag_torque_coeff);
  w.key("gravity", quad.gravity);
  w.key("inertia", quad.inertia_diag);
  w.key("mass", quad.mass);
  w.end_section();

  w.section("sampling");
  w.key("xy_max", sampling.xy_max);
  w.key("xy_min", sampling.xy_min);
  w.key("z_max", sampling.z_max);
  w.key("z_min", sampling.z_min);
  w.end_section();

  w.section("solver");
  w.key("constraint_tol", solver.constraint_tol);
  w.key("initial_penalty", solver.initial_penalty);
  w.key("max_inner", solver.max_inner);
  w.key("max_outer", solver.max_outer);
  w.key("memory", solver.memory);
  w.key("multiplier_estimation_threshold", solver.multiplier_estimation_threshold);
  w.key("optimality_tol", solver.optimality_tol);
  w.key("penalty_growth", solver.penalty_growth);
  w.key("time_budget_s", solver.time_budget_s);
  w.end_section();

  w.section("training");
  w.key("batch_size", training.loss.batch_size);
  w.key("epochs", training.epochs);
  w.key("event_halfwidth", training.loss.event_halfwidth);
  w.key("grad_clip", training.grad_clip);
  w.key("hidden", training.hidden);
  w.key("layers", training.layers);
  w.key("learning_rate", training.learning_rate);
  w.key("min_learning_rate", training.min_learning_rate);
  w.key("plateau_factor", training.plateau_factor);
  w.key("plateau_patience", training.plateau_patience);
  w.key("schedule_denominator_factor", training.schedule.denominator_factor);
  w.key("teacher_floor", training.schedule.floor);
  w.key("val_fraction", training.val_fraction);
  w.key("weight_base", training.loss.weight_base);
  w.key("weight_event", training.loss.weight_event);
  w.key("weight_goal", training.loss.weight_goal);
  w.key("weight_start", training.loss.weight_start);
  w.end_section();

  w.section("ugv");
  w.key("mass", ugv.mass);
  w.end_section();

  return w.str();
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical_json())); }

RunConfig RunConfig::load(const std::string& path) { return parse(read_text_file(path)); }

RunConfig RunConfig::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  RunConfig c;
  expect_keys(j, "root",
              {"bounds", "cost", "handover", "horizon", "quadrotor", "sampling", "solver",
               "training", "ugv"});

  if (j.contains("quadrotor")) {
    const json& s = j["quadrotor"];
    expect_keys(s, "quadrotor", {"arm_length", "drag_torque_coeff", "gravity", "inertia", "mass"});
    read(s, "arm_length", c.quad.arm_length);
    read(s, "drag_torque_coeff", c.quad.drag_torque_coeff);
    read(s, "gravity", c.quad.gravity);
    read(s, "inertia", c.quad.inertia_diag);
    read(s, "mass", c.quad.mass);
  }
  if (j.contains("ugv")) {
    const json& s = j["ugv"];
    expect_keys(s, "ugv", {"mass"});
    read(s, "mass", c.ugv.mass);
  }
  if (j.contains("horizon")) {
    const json& s = j["horizon"];
    expect_keys(s, "horizon", {"intervals"});
    read(s, "intervals", c.horizon.intervals);
    if (c.horizon.intervals < 2) throw ConfigError("horizon.intervals must be >= 2");
  }
  if (j.contains("bounds")) {
    const json& s = j["bounds"];
    expect_keys(s, "bounds",
                {"dt_max", "dt_min", "omega_max", "position_margin", "slack_max",
                 "thrust_fraction", "tilt_max", "uav_speed_max", "ugv_force_max", "ugv_speed_max",
                 "yaw_max"});
    read(s, "dt_max", c.bounds_knobs.dt_max);
    read(s, "dt_min", c.bounds_knobs.dt_min);
    read(s, "omega_max", c.bounds_knobs.omega_max);
    read(s, "position_margin", c.bounds_knobs.position_margin);
    read(s, "slack_max", c.bounds_knobs.slack_max);
    read(s, "thrust_fraction", c.bounds_knobs.thrust_fraction);
    read(s, "tilt_max", c.bounds_knobs.tilt_max);
    read(s, "uav_speed_max", c.bounds_knobs.uav_speed_max);
    read(s, "ugv_force_max", c.bounds_knobs.ugv_force_max);
    read(s, "ugv_speed_max", c.bounds_knobs.ugv_speed_max);
    read(s, "yaw_max", c.bounds_knobs.yaw_max);
    if (c.bounds_knobs.dt_min <= 0 || c.bounds_knobs.dt_min >= c.bounds_knobs.dt_max)
      throw ConfigError("bounds: need 0 < dt_min < dt_max");
  }
  if (j.contains("cost")) {
    const json& s = j["cost"];
    expect_keys(s, "cost", {"progress_weight", "state_weight", "time_weight"});
    read(s, "progress_weight", c.weights.progress_weight);
    read(s, "state_weight", c.weights.state_weight);
    read(s, "time_weight", c.weights.time_weight);
  }
  if (j.contains("handover")) {
    const json& s = j["handover"];
    expect_keys(s, "handover", {"deactivation_distance", "hover_height"});
    read(s, "deactivation_distance", c.handover.deactivation_distance);
    read(s, "hover_height", c.handover.hover_height);
  }
  if (j.contains("sampling")) {
    const json& s = j["sampling"];
    expect_keys(s, "sampling", {"xy_max", "xy_min", "z_max", "z_min"});
    read(s, "xy_max", c.sampling.xy_max);
    read(s, "xy_min", c.sampling.xy_min);
    read(s, "z_max", c.sampling.z_max);
    read(s, "z_min", c.sampling.z_min);
    if (c.sampling.xy_min >= c.sampling.xy_max || c.sampling.z_min >= c.sampling.z_max)
      throw ConfigError("sampling boxes must be non-degenerate");
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    expect_keys(s, "solver",
                {"constraint_tol", "initial_penalty", "max_inner", "max_outer", "memory",
                 "multiplier_estimation_threshold", "optimality_tol", "penalty_growth",
                 "time_budget_s"});
    read(s, "constraint_tol", c.solver.constraint_tol);
    read(s, "initial_penalty", c.solver.initial_penalty);
    read(s, "max_inner", c.solver.max_inner);
    read(s, "max_outer", c.solver.max_outer);
    read(s, "memory", c.solver.memory);
    read(s, "multiplier_estimation_threshold", c.solver.multiplier_estimation_threshold);
    read(s, "optimality_tol", c.solver.optimality_tol);
    read(s, "penalty_growth", c.solver.penalty_growth);
    read(s, "time_budget_s", c.solver.time_budget_s);
    if (c.solver.constraint_tol <= 0 || c.solver.optimality_tol <= 0)
      throw ConfigError("solver tolerances must be positive");
    if (c.solver.penalty_growth <= 1.0) throw ConfigError("solver.penalty_growth must be > 1");
  }
  if (j.contains("training")) {
    const json& s = j["training"];
    expect_keys(s, "training",
                {"batch_size", "epochs", "event_halfwidth", "grad_clip", "hidden", "layers",
                 "learning_rate", "min_learning_rate", "plateau_factor", "plateau_patience",
                 "schedule_denominator_factor", "teacher_floor", "val_fraction", "weight_base",
                 "weight_event", "weight_goal", "weight_start"});
    read(s, "batch_size", c.training.loss.batch_size);
    read(s, "epochs", c.training.epochs);
    read(s, "event_halfwidth", c.training.loss.event_halfwidth);
    read(s, "grad_clip", c.training.grad_clip);
    read(s, "hidden", c.training.hidden);
    read(s, "layers", c.training.layers);
    read(s, "learning_rate", c.training.learning_rate);
    read(s, "min_learning_rate", c.training.min_learning_rate);
    read(s, "plateau_factor", c.training.plateau_factor);
    read(s, "plateau_patience", c.training.plateau_patience);
    read(s, "schedule_denominator_factor", c.training.schedule.denominator_factor);
    read(s, "teacher_floor", c.training.schedule.floor);
    read(s, "val_fraction", c.training.val_fraction);
    read(s, "weight_base", c.training.loss.weight_base);
    read(s, "weight_event", c.training.loss.weight_event);
    read(s, "weight_goal", c.training.loss.weight_goal);
    read(s, "weight_start", c.training.loss.weight_start);
    if (c.training.schedule.floor <= 0 || c.training.schedule.floor > 1)
      throw ConfigError("training.teacher_floor must be in (0, 1]");
  }
  return c;
}

}  // namespace handover

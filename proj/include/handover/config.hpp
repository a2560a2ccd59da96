#pragma once

#include <cstdint>
#include <string>

#include "handover/nlp.hpp"
#include "handover/solver.hpp"

namespace handover {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Endpoint sampling boxes: horizontal coordinates in [xy_min, xy_max] for
// both robots, UAV altitude in [z_min, z_max].
struct SamplingBoxes {
  double xy_min = 0.0;
  double xy_max = 4.0;
  double z_min = 0.5;
  double z_max = 4.0;
};

// Scalar knobs from which the componentwise BoundsSet is assembled.
struct BoundsKnobs {
  double position_margin = 0.5;
  double tilt_max = 0.6;
  double yaw_max = M_PI;
  double uav_speed_max = 3.0;
  double omega_max = 4.0;
  double thrust_fraction = 0.75;  // per-rotor cap as a fraction of m*g
  double ugv_speed_max = 1.5;
  double ugv_force_max = 10.0;
  double slack_max = 0.0025;
  double dt_min = 0.01;
  double dt_max = 0.5;
};

BoundsSet make_bounds(const BoundsKnobs& knobs, const SamplingBoxes& boxes,
                      const QuadrotorParams& quad);

// Time-weighted loss profile of the surrogate training objective.
struct LossConfig {
  int batch_size = 256;
  double weight_start = 5.0;
  double weight_goal = 10.0;
  double weight_event = 35.0;   // applied on [g-2, g+2]
  double weight_base = 1.0;
  int event_halfwidth = 2;
};

// Teacher-forcing probability schedule P = max(floor, 1 - K / (factor*K_max)).
struct ScheduleConfig {
  double floor = 0.1;
  double denominator_factor = 0.75;
};

struct TrainOptions {
  int epochs = 200;  // K_max
  double learning_rate = 1e-3;
  double min_learning_rate = 1e-5;
  int plateau_patience = 10;
  double plateau_factor = 0.5;
  double grad_clip = 5.0;
  double val_fraction = 0.1;
  int hidden = 256;
  int layers = 2;
  LossConfig loss;
  ScheduleConfig schedule;
};

// Everything a run needs, loadable from one JSON file. Unknown keys are
// rejected; every field has the documented default.
struct RunConfig {
  QuadrotorParams quad;
  UgvParams ugv;
  HorizonConfig horizon;
  BoundsKnobs bounds_knobs;
  CostWeights weights;
  HandoverConfig handover;
  SolverOptions solver;
  SamplingBoxes sampling;
  TrainOptions training;

  BoundsSet bounds() const { return make_bounds(bounds_knobs, sampling, quad); }

  // Canonical serialization (fixed key order, 17-significant-digit numbers);
  // the config hash is the FNV-1a fingerprint of this string.
  std::string canonical_json() const;
  std::string hash() const;

  static RunConfig load(const std::string& path);
  static RunConfig parse(const std::string& json_text);
};

}  // namespace handover

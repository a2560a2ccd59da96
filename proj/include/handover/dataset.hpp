#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "handover/config.hpp"
#include "handover/nlp.hpp"
#include "handover/solver.hpp"

namespace handover {

struct GenerationStalled : std::runtime_error {
  explicit GenerationStalled(const std::string& what) : std::runtime_error(what) {}
};

// One successfully solved expert demonstration. The full solution is kept so
// feasibility can be replayed exactly; the surrogate consumes only states
// and time steps.
struct ExpertRecord {
  TaskSpec task;
  Trajectory solution;
  int handover_index = 0;  // knot with the largest event weight
  int iterations = 0;
  double solve_time_s = 0.0;  // in-memory only, not persisted
};

struct DatasetManifest {
  std::string format = "handover-dataset-v1";
  int intervals = 40;
  std::uint64_t seed = 0;
  int count = 0;
  std::string config_hash;
  double acceptance_rate = 0.0;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<ExpertRecord> records;
};

// Endpoints uniform in the sampling boxes, velocities and attitudes zero.
// Draw order: UAV start (x, y, z), UAV goal (x, y, z), UGV start (x, y),
// UGV goal (x, y).
TaskSpec sample_task(std::mt19937_64& rng, const SamplingBoxes& boxes);

// Index of the knot with the largest event weight; ties break toward the
// smaller index.
int handover_index_of(const VectorXd& event_weight, double tie_tol = 1e-9);

// Naive initialization: states interpolate linearly between the endpoints,
// UAV inputs hover, UGV inputs zero, uniform time steps at the midpoint of
// the dt box, event weight spread uniformly with the matching linear
// progress ramp, slack at half its cap.
VectorXd cold_start_guess(const TaskSpec& task, const HorizonConfig& horizon,
                          const BoundsSet& bounds, const QuadrotorParams& quad);

// Samples tasks, solves them cold, keeps converged solves until `count`
// records exist. Candidate tasks are drawn from per-index generators and
// solved in parallel, but records are committed in candidate order, so the
// output is identical for any job count. Throws GenerationStalled when
// fewer than 10% of the last 100 solves are accepted.
Dataset generate_dataset(int count, std::uint64_t seed, const RunConfig& config, int jobs);

// Text serialization: one manifest line followed by one record per line,
// numbers printed with 17 significant digits for exact round trips.
std::string dataset_to_string(const Dataset& dataset);
Dataset dataset_from_string(const std::string& text);
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace handover

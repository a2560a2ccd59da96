#include "handover/dataset.hpp"

#include <json.hpp>
#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "handover/parallel.hpp"
#include "handover/textio.hpp"

namespace handover {

using nlohmann::json;

namespace {

double draw(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

}  // namespace

TaskSpec sample_task(std::mt19937_64& rng, const SamplingBoxes& b) {
  TaskSpec t;
  t.uav_start.position = Vec3(draw(rng, b.xy_min, b.xy_max), draw(rng, b.xy_min, b.xy_max),
                              draw(rng, b.z_min, b.z_max));
  t.uav_goal.position = Vec3(draw(rng, b.xy_min, b.xy_max), draw(rng, b.xy_min, b.xy_max),
                             draw(rng, b.z_min, b.z_max));
  t.ugv_start.position = Vec2(draw(rng, b.xy_min, b.xy_max), draw(rng, b.xy_min, b.xy_max));
  t.ugv_goal.position = Vec2(draw(rng, b.xy_min, b.xy_max), draw(rng, b.xy_min, b.xy_max));
  return t;
}

int handover_index_of(const VectorXd& event_weight, double tie_tol) {
  int best = 0;
  for (int k = 1; k < event_weight.size(); ++k) {
    if (event_weight[k] > event_weight[best] + tie_tol) best = k;
  }
  return best;
}

VectorXd cold_start_guess(const TaskSpec& task, const HorizonConfig& horizon,
                          const BoundsSet& bounds, const QuadrotorParams& quad) {
  const int n = horizon.intervals;
  const DecisionLayout layout(n);
  Trajectory t = Trajectory::zero(n);

  const Vec12 uav_a = task.uav_start.to_vector();
  const Vec12 uav_b = task.uav_goal.to_vector();
  const Vec4 ugv_a = task.ugv_start.to_vector();
  const Vec4 ugv_b = task.ugv_goal.to_vector();
  const Vec4 hover = Vec4::Constant(quad.mass * quad.gravity / 4.0);

  for (int k = 0; k <= n; ++k) {
    const double s = static_cast<double>(k) / n;
    t.uav_states.col(k) = (1.0 - s) * uav_a + s * uav_b;
    t.ugv_states.col(k) = (1.0 - s) * ugv_a + s * ugv_b;
    t.progress[k] = 1.0 - s;
    t.dt[k] = 0.5 * (bounds.dt_min + bounds.dt_max);
    if (k < n) {
      t.uav_inputs.col(k) = hover;
      t.ugv_inputs.col(k).setZero();
      t.event_weight[k] = 1.0 / n;
      t.slack[k] = 0.5 * bounds.slack_max;
    }
  }
  return pack(t, layout);
}

Dataset generate_dataset(int count, std::uint64_t seed, const RunConfig& config, int jobs) {
  if (count < 1) throw ConfigError("dataset count must be >= 1");

  const BoundsSet bounds = config.bounds();
  Dataset out;
  out.manifest.intervals = config.horizon.intervals;
  out.manifest.seed = seed;
  out.manifest.count = count;
  out.manifest.config_hash = config.hash();
  out.records.reserve(static_cast<size_t>(count));

  // Candidates are solved in windows; each candidate's task comes from its
  // own generator seeded by (seed, index) so the sequence is independent of
  // scheduling.
  const int window = std::max(2 * jobs, 16);
  int next_candidate = 0;
  int attempts = 0, successes = 0;
  std::deque<bool> recent;

  while (static_cast<int>(out.records.size()) < count) {
    std::vector<ExpertRecord> batch(static_cast<size_t>(window));
    std::vector<char> ok(static_cast<size_t>(window), 0);
    const int base = next_candidate;
    next_candidate += window;

    parallel_for(window, jobs, [&](int i) {
      std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(base + i + 1)));
      const TaskSpec task = sample_task(rng, config.sampling);
      try {
        const HandoverNlp problem = build_problem(task, bounds, config.weights, config.handover,
                                                  config.horizon, config.quad, config.ugv);
        const VectorXd guess = cold_start_guess(task, config.horizon, bounds, config.quad);
        const SolveReport report = solve(problem, guess, config.solver);
        if (report.status == SolveStatus::Converged) {
          ExpertRecord rec;
          rec.task = task;
          rec.solution = unpack(report.solution, problem.layout());
          rec.handover_index = handover_index_of(rec.solution.event_weight);
          rec.iterations = report.iterations;
          rec.solve_time_s = report.wall_time_s;
          batch[static_cast<size_t>(i)] = std::move(rec);
          ok[static_cast<size_t>(i)] = 1;
        }
      } catch (const std::exception&) {
        // failed candidate; the window moves on
      }
    });

    for (int i = 0; i < window && static_cast<int>(out.records.size()) < count; ++i) {
      ++attempts;
      recent.push_back(ok[static_cast<size_t>(i)] != 0);
      if (recent.size() > 100) recent.pop_front();
      if (ok[static_cast<size_t>(i)]) {
        ++successes;
        out.records.push_back(std::move(batch[static_cast<size_t>(i)]));
      }
      if (recent.size() == 100) {
        const int wins = static_cast<int>(std::count(recent.begin(), recent.end(), true));
        if (wins < 10) {
          throw GenerationStalled("acceptance rate below 10% over the last 100 solves (" +
                                  std::to_string(wins) + "/100)");
        }
      }
    }
  }
  out.manifest.acceptance_rate = static_cast<double>(successes) / attempts;
  return out;
}

namespace {

void append_flat(std::string& out, const char* name, const VectorXd& v, bool leading_comma = true) {
  if (leading_comma) out += ',';
  out += '"';
  out += name;
  out += "\":[";
  out += format_vector(v);
  out += ']';
}

void append_matrix(std::string& out, const char* name, const Eigen::MatrixXd& m) {
  out += ",\"";
  out += name;
  out += "\":[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += ',';
    out += '[';
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += ']';
  }
  out += ']';
}

VectorXd parse_flat(const json& j, const char* name, Eigen::Index size) {
  const json& a = j.at(name);
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != size) {
    throw std::runtime_error(std::string("dataset field ") + name + " has wrong length");
  }
  VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = a[static_cast<size_t>(i)].get<double>();
  return v;
}

Eigen::MatrixXd parse_matrix(const json& j, const char* name, Eigen::Index rows,
                             Eigen::Index cols) {
  const json& a = j.at(name);
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != rows) {
    throw std::runtime_error(std::string("dataset field ") + name + " has wrong row count");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& rowj = a[static_cast<size_t>(r)];
    if (!rowj.is_array() || static_cast<Eigen::Index>(rowj.size()) != cols) {
      throw std::runtime_error(std::string("dataset field ") + name + " has wrong column count");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rowj[static_cast<size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string dataset_to_string(const Dataset& dataset) {
  const auto& man = dataset.manifest;
  std::string out;
  out += "{\"format\":\"" + man.format + "\",\"intervals\":" + std::to_string(man.intervals) +
         ",\"seed\":" + std::to_string(man.seed) + ",\"count\":" + std::to_string(man.count) +
         ",\"config_hash\":\"" + man.config_hash +
         "\",\"acceptance_rate\":" + format_double(man.acceptance_rate) + "}\n";

  for (const auto& rec : dataset.records) {
    std::string line = "{\"task\":{";
    line += "\"uav_start\":[" + format_vector(rec.task.uav_start.to_vector()) + ']';
    line += ",\"uav_goal\":[" + format_vector(rec.task.uav_goal.to_vector()) + ']';
    line += ",\"ugv_start\":[" + format_vector(rec.task.ugv_start.to_vector()) + ']';
    line += ",\"ugv_goal\":[" + format_vector(rec.task.ugv_goal.to_vector()) + ']';
    line += '}';
    append_matrix(line, "uav_states", rec.solution.uav_states);
    append_matrix(line, "ugv_states", rec.solution.ugv_states);
    append_matrix(line, "uav_inputs", rec.solution.uav_inputs);
    append_matrix(line, "ugv_inputs", rec.solution.ugv_inputs);
    append_flat(line, "event_weight", rec.solution.event_weight);
    append_flat(line, "progress", rec.solution.progress);
    append_flat(line, "slack", rec.solution.slack);
    append_flat(line, "dt", rec.solution.dt);
    line += ",\"handover_index\":" + std::to_string(rec.handover_index);
    line += ",\"iterations\":" + std::to_string(rec.iterations);
    line += "}\n";
    out += line;
  }
  return out;
}

Dataset dataset_from_string(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw std::runtime_error("dataset file is empty");

  Dataset out;
  const json man = json::parse(lines[0]);
  out.manifest.format = man.at("format").get<std::string>();
  if (out.manifest.format != "handover-dataset-v1") {
    throw std::runtime_error("unsupported dataset format: " + out.manifest.format);
  }
  out.manifest.intervals = man.at("intervals").get<int>();
  out.manifest.seed = man.at("seed").get<std::uint64_t>();
  out.manifest.count = man.at("count").get<int>();
  out.manifest.config_hash = man.at("config_hash").get<std::string>();
  out.manifest.acceptance_rate = man.at("acceptance_rate").get<double>();

  const int n = out.manifest.intervals;
  for (size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const json j = json::parse(lines[li]);
    ExpertRecord rec;
    const json& task = j.at("task");
    rec.task.uav_start = QuadrotorState::from_vector(parse_flat(task, "uav_start", 12));
    rec.task.uav_goal = QuadrotorState::from_vector(parse_flat(task, "uav_goal", 12));
    rec.task.ugv_start = UgvState::from_vector(parse_flat(task, "ugv_start", 4));
    rec.task.ugv_goal = UgvState::from_vector(parse_flat(task, "ugv_goal", 4));
    rec.solution.uav_states = parse_matrix(j, "uav_states", 12, n + 1);
    rec.solution.ugv_states = parse_matrix(j, "ugv_states", 4, n + 1);
    rec.solution.uav_inputs = parse_matrix(j, "uav_inputs", 4, n);
    rec.solution.ugv_inputs = parse_matrix(j, "ugv_inputs", 2, n);
    rec.solution.event_weight = parse_flat(j, "event_weight", n);
    rec.solution.progress = parse_flat(j, "progress", n + 1);
    rec.solution.slack = parse_flat(j, "slack", n);
    rec.solution.dt = parse_flat(j, "dt", n + 1);
    rec.handover_index = j.at("handover_index").get<int>();
    rec.iterations = j.at("iterations").get<int>();
    out.records.push_back(std::move(rec));
  }
  return out;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  write_text_file(path, dataset_to_string(dataset));
}

Dataset load_dataset(const std::string& path) {
  return dataset_from_string(read_text_file(path));
}

}  // namespace handover

// Copyright 2026 The gpslab Authors
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

#include "gpslab/experiment.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "gpslab/checkpoint.h"
#include "gpslab/error.h"
#include "gpslab/metrics.h"
#include "gpslab/parallel.h"

namespace gpslab {
namespace fs = std::filesystem;

int ExitCodeForCurrentException() {
  try {
    throw;
  } catch (const UnknownTaskError&) {
    return kExitUnknownTask;
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const IncompatibleError&) {
    return kExitIncompatible;
  } catch (...) {
    return kExitRuntime;
  }
}

std::string MethodName(Method m) {
  switch (m) {
    case Method::kGps:
      return "gps";
    case Method::kCem:
      return "cem";
    case Method::kRwr:
      return "rwr";
  }
  return "";
}

namespace {

// Accumulates validation problems so that one error reports all of them.
class Checker {
 public:
  void Fail(const std::string& msg) { errors_.push_back(msg); }

  template <typename T>
  bool Get(const nlohmann::json& obj, const std::string& key, T& out, const std::string& where) {
    if (!obj.contains(key)) return false;
    try {
      out = obj.at(key).get<T>();
      return true;
    } catch (const nlohmann::json::exception&) {
      Fail(where + key + ": wrong type");
      return false;
    }
  }

  void Range(const std::string& name, double v, double lo, double hi) {
    if (!(v >= lo && v <= hi)) {
      std::ostringstream s;
      s << name << " = " << v << " outside [" << lo << ", " << hi << "]";
      Fail(s.str());
    }
  }

  void Known(const nlohmann::json& obj, const std::set<std::string>& keys,
             const std::string& where) {
    if (!obj.is_object()) {
      Fail(where + " must be an object");
      return;
    }
    for (const auto& item : obj.items()) {
      if (!keys.count(item.key())) Fail("unknown field " + where + item.key());
    }
  }

  void ThrowIfAny() const {
    if (errors_.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& e : errors_) msg += "\n  - " + e;
    throw ConfigError(msg);
  }

 private:
  std::vector<std::string> errors_;
};

}  // namespace

ExperimentConfig ExperimentConfig::FromJson(const nlohmann::json& j) {
  ExperimentConfig c;
  Checker ck;
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  ck.Known(j,
           {"method", "seed", "task", "iterations", "samples_per_condition",
            "samples_per_iteration", "epsilon", "alpha", "nu_init", "network", "output_dir",
            "gps", "baseline"},
           "");

  // The task is resolved first: an unknown name is its own error class.
  if (!j.contains("task")) {
    ck.Fail("task: required");
  } else {
    nlohmann::json task = j.at("task");
    if (task.is_string()) task = nlohmann::json{{"name", task}};
    try {
      c.task = TaskFromJson(task);
    } catch (const UnknownTaskError&) {
      throw;
    } catch (const ConfigError& e) {
      ck.Fail(std::string("task: ") + e.what());
    }
  }

  std::string method = "gps";
  ck.Get(j, "method", method, "");
  if (method == "gps") {
    c.method = Method::kGps;
  } else if (method == "cem") {
    c.method = Method::kCem;
  } else if (method == "rwr") {
    c.method = Method::kRwr;
  } else {
    ck.Fail("method: must be gps, cem or rwr");
  }

  if (!j.contains("seed")) {
    ck.Fail("seed: required");
  } else if (!j.at("seed").is_number_integer() ||
             (!j.at("seed").is_number_unsigned() && j.at("seed").get<std::int64_t>() < 0)) {
    ck.Fail("seed: must be a non-negative integer");
  } else {
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.gps.seed = c.seed;
  c.baseline.seed = c.seed;

  int iterations = 10;
  if (ck.Get(j, "iterations", iterations, "")) ck.Range("iterations", iterations, 0, 10000);
  c.gps.iterations = iterations;
  c.baseline.iterations = iterations;
  if (ck.Get(j, "samples_per_condition", c.gps.samples_per_condition, "")) {
    ck.Range("samples_per_condition", c.gps.samples_per_condition, 1, 10000);
  }
  if (ck.Get(j, "samples_per_iteration", c.baseline.samples_per_iteration, "")) {
    ck.Range("samples_per_iteration", c.baseline.samples_per_iteration, 2, 100000);
  }
  if (ck.Get(j, "epsilon", c.gps.epsilon, "")) ck.Range("epsilon", c.gps.epsilon, 1e-12, 1e12);
  if (ck.Get(j, "alpha", c.gps.alpha, "")) ck.Range("alpha", c.gps.alpha, 0.0, 100.0);
  if (ck.Get(j, "nu_init", c.gps.nu_init, "")) ck.Range("nu_init", c.gps.nu_init, kNuMin, kNuMax);

  if (j.contains("network")) {
    const auto& n = j.at("network");
    ck.Known(n, {"hidden", "activation"}, "network.");
    if (ck.Get(n, "hidden", c.gps.hidden, "network.")) {
      if (c.gps.hidden.empty()) ck.Fail("network.hidden: at least one layer");
      for (int h : c.gps.hidden) ck.Range("network.hidden[]", h, 1, 4096);
    }
    std::string act;
    if (ck.Get(n, "activation", act, "network.")) {
      try {
        c.gps.activation = ActivationFromName(act);
      } catch (const Error&) {
        ck.Fail("network.activation: must be identity, relu or softplus");
      }
    }
  }
  std::string out;
  if (ck.Get(j, "output_dir", out, "")) c.output_dir = out;

  if (j.contains("gps")) {
    const auto& g = j.at("gps");
    ck.Known(g,
             {"inner_passes", "policy_steps", "batch_size", "learning_rate", "momentum",
              "normalize_precision", "history_iterations", "replay_window", "shared_dynamics",
              "niw_mean_rule", "prior_m", "prior_n0", "gmm_max_iterations",
              "initial_state_variance", "pretrain_iterations", "pose_pretrain",
              "head_only_steps", "kl_tolerance"},
             "gps.");
    if (ck.Get(g, "inner_passes", c.gps.inner_passes, "gps.")) {
      ck.Range("gps.inner_passes", c.gps.inner_passes, 1, 100);
    }
    if (ck.Get(g, "policy_steps", c.gps.policy_steps, "gps.")) {
      ck.Range("gps.policy_steps", c.gps.policy_steps, 0, 1000000);
    }
    if (ck.Get(g, "batch_size", c.gps.sgd.batch_size, "gps.")) {
      ck.Range("gps.batch_size", c.gps.sgd.batch_size, 1, 100000);
    }
    if (ck.Get(g, "learning_rate", c.gps.sgd.learning_rate, "gps.")) {
      ck.Range("gps.learning_rate", c.gps.sgd.learning_rate, 1e-12, 10.0);
    }
    if (ck.Get(g, "momentum", c.gps.sgd.momentum, "gps.")) {
      ck.Range("gps.momentum", c.gps.sgd.momentum, 0.0, 0.999);
    }
    ck.Get(g, "normalize_precision", c.gps.sgd.normalize_precision, "gps.");
    if (ck.Get(g, "history_iterations", c.gps.history_iterations, "gps.")) {
      ck.Range("gps.history_iterations", c.gps.history_iterations, 0, 100);
    }
    if (ck.Get(g, "replay_window", c.gps.replay_window, "gps.")) {
      ck.Range("gps.replay_window", c.gps.replay_window, 1, 100);
    }
    ck.Get(g, "shared_dynamics", c.gps.shared_dynamics, "gps.");
    std::string rule;
    if (ck.Get(g, "niw_mean_rule", rule, "gps.")) {
      if (rule == "printed") {
        c.gps.fit.mean_rule = NiwMeanRule::kPrinted;
      } else if (rule == "conjugate") {
        c.gps.fit.mean_rule = NiwMeanRule::kConjugate;
      } else {
        ck.Fail("gps.niw_mean_rule: must be printed or conjugate");
      }
    }
    if (ck.Get(g, "prior_m", c.gps.fit.prior_m, "gps.")) {
      ck.Range("gps.prior_m", c.gps.fit.prior_m, 1e-12, 1e6);
    }
    if (ck.Get(g, "prior_n0", c.gps.fit.prior_n0, "gps.")) {
      ck.Range("gps.prior_n0", c.gps.fit.prior_n0, 1e-12, 1e6);
    }
    if (ck.Get(g, "gmm_max_iterations", c.gps.gmm.max_iters, "gps.")) {
      ck.Range("gps.gmm_max_iterations", c.gps.gmm.max_iters, 1, 10000);
    }
    if (ck.Get(g, "initial_state_variance", c.gps.initial_state_variance, "gps.")) {
      ck.Range("gps.initial_state_variance", c.gps.initial_state_variance, 1e-12, 1e3);
    }
    if (ck.Get(g, "pretrain_iterations", c.gps.pretrain_iterations, "gps.")) {
      ck.Range("gps.pretrain_iterations", c.gps.pretrain_iterations, 0, 1000);
    }
    if (ck.Get(g, "head_only_steps", c.gps.head_only_steps, "gps.")) {
      ck.Range("gps.head_only_steps", c.gps.head_only_steps, 0, 1000000);
    }
    if (ck.Get(g, "kl_tolerance", c.gps.kl_step.kl_tolerance, "gps.")) {
      ck.Range("gps.kl_tolerance", c.gps.kl_step.kl_tolerance, 1e-6, 1.0);
    }
    if (g.contains("pose_pretrain")) {
      const auto& p = g.at("pose_pretrain");
      ck.Known(p, {"images", "steps", "learning_rate"}, "gps.pose_pretrain.");
      PosePretrainConfig pc;
      if (ck.Get(p, "images", pc.images, "gps.pose_pretrain.")) {
        ck.Range("gps.pose_pretrain.images", pc.images, 200, 1000000);
      }
      if (ck.Get(p, "steps", pc.train.steps, "gps.pose_pretrain.")) {
        ck.Range("gps.pose_pretrain.steps", pc.train.steps, 0, 10000000);
      }
      if (ck.Get(p, "learning_rate", pc.train.learning_rate, "gps.pose_pretrain.")) {
        ck.Range("gps.pose_pretrain.learning_rate", pc.train.learning_rate, 1e-12, 10.0);
      }
      c.gps.pose_pretrain = pc;
    }
  }
  if (j.contains("baseline")) {
    const auto& b = j.at("baseline");
    ck.Known(b, {"elite_fraction", "beta", "offset_variance", "gain_variance"}, "baseline.");
    if (ck.Get(b, "elite_fraction", c.baseline.elite_fraction, "baseline.")) {
      ck.Range("baseline.elite_fraction", c.baseline.elite_fraction, 1e-9, 1.0);
    }
    if (ck.Get(b, "beta", c.baseline.beta, "baseline.")) {
      ck.Range("baseline.beta", c.baseline.beta, 0.0, 1e12);
    }
    if (ck.Get(b, "offset_variance", c.baseline.offset_variance, "baseline.")) {
      ck.Range("baseline.offset_variance", c.baseline.offset_variance, 1e-12, 1e6);
    }
    if (ck.Get(b, "gain_variance", c.baseline.gain_variance, "baseline.")) {
      ck.Range("baseline.gain_variance", c.baseline.gain_variance, 1e-12, 1e6);
    }
  }
  c.baseline.method = c.method == Method::kRwr ? BaselineMethod::kRwr : BaselineMethod::kCem;
  ck.ThrowIfAny();
  try {
    c.gps.Validate();
    c.baseline.Validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::FromFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return FromJson(j);
}

nlohmann::json ExperimentConfig::ToJson() const {
  nlohmann::json j;
  j["method"] = MethodName(method);
  j["seed"] = seed;
  j["task"] = TaskToJson(task);
  j["iterations"] = method == Method::kGps ? gps.iterations : baseline.iterations;
  j["samples_per_condition"] = gps.samples_per_condition;
  j["samples_per_iteration"] = baseline.samples_per_iteration;
  j["epsilon"] = gps.epsilon;
  j["alpha"] = gps.alpha;
  j["nu_init"] = gps.nu_init;
  j["network"] = {{"hidden", gps.hidden}, {"activation", ActivationName(gps.activation)}};
  j["output_dir"] = output_dir.string();
  nlohmann::json g;
  g["inner_passes"] = gps.inner_passes;
  g["policy_steps"] = gps.policy_steps;
  g["batch_size"] = gps.sgd.batch_size;
  g["learning_rate"] = gps.sgd.learning_rate;
  g["momentum"] = gps.sgd.momentum;
  g["normalize_precision"] = gps.sgd.normalize_precision;
  g["history_iterations"] = gps.history_iterations;
  g["replay_window"] = gps.replay_window;
  g["shared_dynamics"] = gps.shared_dynamics;
  g["niw_mean_rule"] = gps.fit.mean_rule == NiwMeanRule::kPrinted ? "printed" : "conjugate";
  g["prior_m"] = gps.fit.prior_m;
  g["prior_n0"] = gps.fit.prior_n0;
  g["gmm_max_iterations"] = gps.gmm.max_iters;
  g["initial_state_variance"] = gps.initial_state_variance;
  g["pretrain_iterations"] = gps.pretrain_iterations;
  g["head_only_steps"] = gps.head_only_steps;
  g["kl_tolerance"] = gps.kl_step.kl_tolerance;
  if (gps.pose_pretrain) {
    g["pose_pretrain"] = {{"images", gps.pose_pretrain->images},
                          {"steps", gps.pose_pretrain->train.steps},
                          {"learning_rate", gps.pose_pretrain->train.learning_rate}};
  }
  j["gps"] = g;
  nlohmann::json b;
  b["elite_fraction"] = baseline.elite_fraction;
  if (baseline.beta >= 0.0) b["beta"] = baseline.beta;
  if (baseline.offset_variance > 0.0) b["offset_variance"] = baseline.offset_variance;
  b["gain_variance"] = baseline.gain_variance;
  j["baseline"] = b;
  return j;
}

void WriteControllerCsv(std::ostream& out, const LinearGaussianController& c) {
  const int dx = c.dx(), du = c.du();
  out << "# schema_version=" << kMetricsSchemaVersion << '\n';
  out << 't';
  for (int r = 0; r < du; ++r) {
    for (int col = 0; col < dx; ++col) out << ",K_" << r << '_' << col;
  }
  for (int r = 0; r < du; ++r) out << ",k_" << r;
  for (int r = 0; r < du; ++r) {
    for (int col = 0; col < du; ++col) out << ",C_" << r << '_' << col;
  }
  out << '\n';
  for (int t = 0; t < c.horizon(); ++t) {
    out << t;
    for (int r = 0; r < du; ++r) {
      for (int col = 0; col < dx; ++col) out << ',' << FormatDouble(c.K[t](r, col));
    }
    for (int r = 0; r < du; ++r) out << ',' << FormatDouble(c.k[t](r));
    for (int r = 0; r < du; ++r) {
      for (int col = 0; col < du; ++col) out << ',' << FormatDouble(c.C[t](r, col));
    }
    out << '\n';
  }
}

namespace {

std::ofstream OpenForWrite(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void PrepareOutputDir(const fs::path& dir) {
  if (dir.empty()) throw ConfigError("output_dir is required (config field or --out)");
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec) || !fs::is_empty(dir, ec)) {
      throw Error("refusing to write into existing run directory " + dir.string());
    }
  }
  fs::create_directories(dir / "controllers", ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

TrainOutcome CmdTrain(const ExperimentConfig& config, std::ostream* log) {
  const fs::path dir = config.output_dir;
  PrepareOutputDir(dir);
  {
    std::ofstream out = OpenForWrite(dir / "config.resolved.json");
    out << config.ToJson().dump(2) << '\n';
  }
  const Environment env(config.task);
  TrainOutcome outcome;
  outcome.directory = dir;
  std::ofstream metrics_out = OpenForWrite(dir / "metrics.jsonl");

  if (config.method == Method::kGps) {
    std::error_code ec;
    fs::create_directories(dir / "checkpoints", ec);
    if (ec) throw Error("cannot create checkpoints directory: " + ec.message());
    const GpsResult result = RunGps(config.gps, env, [&](const IterationMetrics& m,
                                                         const GpsState& state) {
      WriteMetricsLine(metrics_out, m);
      metrics_out.flush();
      char name[32];
      std::snprintf(name, sizeof(name), "iter_%03d.ckpt", m.iteration);
      SaveCheckpoint(state.policy, dir / "checkpoints" / name);
      if (m.stalled && log) {
        *log << "iteration " << m.iteration
             << " stalled: every KL step was rejected at epsilon = " << config.gps.epsilon
             << '\n';
      }
      if (log) {
        *log << "gps iter " << m.iteration << " samples " << m.total_samples << " cost "
             << m.mean_cost << " policy distance " << m.target_distance << '\n';
      }
    });
    SaveCheckpoint(result.state.policy, dir / "policy.ckpt");
    for (std::size_t i = 0; i < result.state.controllers.size(); ++i) {
      std::ofstream out =
          OpenForWrite(dir / "controllers" / ("condition_" + std::to_string(i) + ".csv"));
      WriteControllerCsv(out, result.state.controllers[i]);
    }
    outcome.metrics = result.metrics;
  } else {
    const BaselineResult result = RunBaseline(config.baseline, env);
    for (const auto& m : result.metrics) {
      WriteMetricsLine(metrics_out, m);
      if (log) {
        *log << m.method << " iter " << m.iteration << " samples " << m.total_samples
             << " cost " << m.mean_cost << " mean distance " << m.target_distance << '\n';
      }
    }
    std::ofstream out = OpenForWrite(dir / "controllers" / "mean.csv");
    WriteControllerCsv(out, result.mean_controller);
    outcome.metrics = result.metrics;
  }
  if (!metrics_out) throw Error("failed writing metrics");
  std::ofstream curve = OpenForWrite(dir / "curve.csv");
  WriteCurveCsv(curve, outcome.metrics);
  return outcome;
}

// ---------------------------------------------------------------------------

namespace {

EnvSpec ResolveTask(const std::string& task) {
  std::error_code ec;
  if (fs::is_regular_file(task, ec)) {
    std::ifstream in(task);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(task + ": " + e.what());
    }
    if (j.contains("task") && j.contains("seed")) return ExperimentConfig::FromJson(j).task;
    return TaskFromJson(j);
  }
  return MakeTask(task);
}

}  // namespace

std::vector<EvalRow> CmdEval(const fs::path& checkpoint, const std::string& task, Split split,
                             int trials, std::uint64_t seed) {
  if (trials < 0) throw ConfigError("trials must be >= 0");
  const GaussianPolicy policy = LoadCheckpoint(checkpoint);
  const EnvSpec spec = ResolveTask(task);
  const auto& arch = policy.architecture();
  bool uses_state = false;
  if (arch.obs_dim == spec.dobs) {
    uses_state = false;
  } else if (arch.obs_dim == spec.dx) {
    uses_state = true;
  } else {
    throw IncompatibleError("policy input dimension " + std::to_string(arch.obs_dim) +
                            " does not match task " + spec.name);
  }
  if (arch.action_dim != spec.du) {
    throw IncompatibleError("policy action dimension does not match task " + spec.name);
  }
  std::vector<EvalRow> rows;
  if (trials == 0) return rows;

  const Environment env(spec);
  const std::vector<double> offsets = ConditionOffsets(spec.conditions, split);
  const Eigen::LLT<Mat> llt(policy.sigma());
  const Mat chol = llt.matrixL();
  rows.resize(offsets.size());
  ParallelFor(static_cast<int>(offsets.size()), [&](int i) {
    const Vec x1 = env.InitialState(offsets[i]);
    EvalRow& row = rows[i];
    row.condition = i;
    row.offset = offsets[i];
    row.trials = trials;
    int successes = 0;
    double dist_sum = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
      std::mt19937_64 rng(DeriveSeed(seed, static_cast<std::uint64_t>(split), i, trial));
      std::normal_distribution<double> normal;
      Vec x = x1;
      double dist = std::numeric_limits<double>::infinity();
      try {
        for (int t = 0; t + 1 < spec.horizon; ++t) {
          const Vec o = env.Observe(x);
          Vec noise(spec.du);
          for (int d = 0; d < spec.du; ++d) noise(d) = normal(rng);
          const Vec u = policy.Mean(uses_state ? x : o) + chol * noise;
          x = env.Step(x, u);
        }
        dist = env.TargetDistance(x);
      } catch (const Error&) {
      }
      if (dist < kSuccessThreshold) ++successes;
      dist_sum += std::min(dist, std::numeric_limits<double>::max() / trials);
    }
    row.mean_final_distance = dist_sum / trials;
    row.success_rate = static_cast<double>(successes) / trials;
    double mean_dist = std::numeric_limits<double>::max();
    try {
      const TrajectorySample s = RunPolicyMean(env, policy, uses_state, x1, i);
      mean_dist = env.TargetDistance(s.states.bottomRows(1).transpose());
    } catch (const Error&) {
    }
    row.mean_execution_distance = mean_dist;
    row.mean_execution_success = mean_dist < kSuccessThreshold;
  });
  return rows;
}

void PrintEvalTable(std::ostream& out, const std::vector<EvalRow>& rows) {
  out << "| condition | offset | trials | mean final distance | success rate | "
         "mean-action distance | mean-action success |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out << "| " << r.condition << " | " << FormatDouble(r.offset) << " | " << r.trials << " | "
        << FormatDouble(r.mean_final_distance) << " | " << FormatDouble(r.success_rate) << " | "
        << FormatDouble(r.mean_execution_distance) << " | "
        << (r.mean_execution_success ? "yes" : "no") << " |\n";
  }
}

CompareTable CmdCompare(const std::vector<fs::path>& run_dirs) {
  if (run_dirs.empty()) throw ConfigError("compare needs at least one run directory");
  CompareTable table;
  int horizon = -1;
  std::string task;
  for (const auto& dir : run_dirs) {
    const std::vector<IterationMetrics> metrics = ReadMetricsFile(dir / "metrics.jsonl");
    if (metrics.empty()) throw IncompatibleError(dir.string() + " has no metrics records");
    std::vector<CurveRow> curve = ReadCurveCsv(dir / "curve.csv");
    if (curve.size() != metrics.size()) {
      throw IncompatibleError(dir.string() + ": curve and metrics disagree");
    }
    const int h = metrics.front().horizon;
    if (horizon < 0) {
      horizon = h;
      task = metrics.front().task;
    } else if (h != horizon) {
      throw IncompatibleError("runs have different horizons (" + std::to_string(horizon) +
                              " vs " + std::to_string(h) + " in " + dir.string() + ")");
    } else if (metrics.front().task != task) {
      throw IncompatibleError("runs are on different tasks (" + task + " vs " +
                              metrics.front().task + ")");
    }
    table.runs.push_back(dir.filename().empty() ? dir.parent_path().filename().string()
                                                : dir.filename().string());
    table.methods.push_back(metrics.front().method);
    table.curves.push_back(std::move(curve));
  }
  return table;
}

void PrintCompareMarkdown(std::ostream& out, const CompareTable& table) {
  std::set<long> budgets;
  for (const auto& c : table.curves) {
    for (const auto& r : c) budgets.insert(r.total_samples);
  }
  out << "| total_samples |";
  for (std::size_t i = 0; i < table.runs.size(); ++i) {
    out << ' ' << table.runs[i] << " (" << table.methods[i] << ") cost | " << table.runs[i]
        << " distance |";
  }
  out << "\n|---|";
  for (std::size_t i = 0; i < table.runs.size(); ++i) out << "---|---|";
  out << '\n';
  for (long b : budgets) {
    out << "| " << b << " |";
    for (const auto& c : table.curves) {
      const CurveRow* last = nullptr;
      for (const auto& r : c) {
        if (r.total_samples <= b) last = &r;
      }
      if (last) {
        out << ' ' << FormatDouble(last->mean_cost) << " | "
            << FormatDouble(last->target_distance) << " |";
      } else {
        out << "  |  |";
      }
    }
    out << '\n';
  }
  out << "\n| run | method | total_samples | final mean_cost | final target_distance |\n";
  out << "|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < table.runs.size(); ++i) {
    const CurveRow& r = table.curves[i].back();
    out << "| " << table.runs[i] << " | " << table.methods[i] << " | " << r.total_samples
        << " | " << FormatDouble(r.mean_cost) << " | " << FormatDouble(r.target_distance)
        << " |\n";
  }
}

void WriteCompareCsv(std::ostream& out, const CompareTable& table) {
  struct Entry {
    long samples;
    std::size_t run;
    const CurveRow* row;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < table.curves.size(); ++i) {
    for (const auto& r : table.curves[i]) entries.push_back({r.total_samples, i, &r});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.samples != b.samples ? a.samples < b.samples : a.run < b.run;
  });
  out << "# schema_version=" << kMetricsSchemaVersion << '\n';
  out << "run,method,iteration,total_samples,mean_cost,target_distance\n";
  for (const auto& e : entries) {
    out << table.runs[e.run] << ',' << table.methods[e.run] << ',' << e.row->iteration << ','
        << e.row->total_samples << ',' << FormatDouble(e.row->mean_cost) << ','
        << FormatDouble(e.row->target_distance) << '\n';
  }
}

}  // namespace gpslab

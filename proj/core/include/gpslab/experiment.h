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

// Experiment configuration and the train / eval / compare commands behind the
// command-line tool.

#ifndef GPSLAB_EXPERIMENT_H_
#define GPSLAB_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gpslab/baselines.h"
#include "gpslab/envs.h"
#include "gpslab/gps.h"

namespace gpslab {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitRuntime = 3,
  kExitIncompatible = 4,
  kExitUnknownTask = 5,
};

// Maps the active exception to an exit code; call inside a catch block.
int ExitCodeForCurrentException();

enum class Method { kGps, kCem, kRwr };

struct ExperimentConfig {
  Method method = Method::kGps;
  std::uint64_t seed = 0;
  EnvSpec task;
  GpsConfig gps;
  BaselineConfig baseline;
  std::filesystem::path output_dir;

  // Collects every problem before throwing one ConfigError listing them all
  // (UnknownTaskError when the task name is the only problem class).
  static ExperimentConfig FromJson(const nlohmann::json& j);
  static ExperimentConfig FromFile(const std::filesystem::path& path);
  nlohmann::json ToJson() const;
};

std::string MethodName(Method m);

// Runs the experiment and writes into `output_dir` (which must not exist or
// be empty):
//   config.resolved.json, metrics.jsonl, curve.csv,
//   checkpoints/iter_NNN.ckpt and policy.ckpt (gps),
//   controllers/condition_N.csv (gps) or controllers/mean.csv (baselines).
struct TrainOutcome {
  std::filesystem::path directory;
  std::vector<IterationMetrics> metrics;
};
TrainOutcome CmdTrain(const ExperimentConfig& config, std::ostream* log = nullptr);

// Controller dump: "# schema_version=N", then one row per t with columns
// t, K_r_c..., k_r..., C_r_c... (row-major).
void WriteControllerCsv(std::ostream& out, const LinearGaussianController& controller);

struct EvalRow {
  int condition = 0;
  double offset = 0.0;
  int trials = 0;
  double mean_final_distance = 0.0;  // over stochastic trials
  double success_rate = 0.0;
  double mean_execution_distance = 0.0;  // noiseless policy mean
  bool mean_execution_success = false;
};

inline constexpr double kSuccessThreshold = 0.06;

// `task` is a task name or the path of a JSON file holding a task object or a
// whole experiment config. Trials sample u ~ N(mu(o), Sigma_pi).
std::vector<EvalRow> CmdEval(const std::filesystem::path& checkpoint, const std::string& task,
                             Split split, int trials, std::uint64_t seed);
void PrintEvalTable(std::ostream& out, const std::vector<EvalRow>& rows);

struct CompareTable {
  std::vector<std::string> runs;
  std::vector<std::string> methods;
  std::vector<std::vector<CurveRow>> curves;
};
// Throws IncompatibleError on schema or horizon mismatches.
CompareTable CmdCompare(const std::vector<std::filesystem::path>& run_dirs);
void PrintCompareMarkdown(std::ostream& out, const CompareTable& table);
// Long format: run,method,iteration,total_samples,mean_cost,target_distance,
// sorted by total_samples then run order.
void WriteCompareCsv(std::ostream& out, const CompareTable& table);

}  // namespace gpslab

#endif  // GPSLAB_EXPERIMENT_H_

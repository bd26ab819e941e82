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

// Per-iteration metrics records, their JSON-lines file and the learning-curve
// CSV. Every record and every CSV carries the schema version; readers reject
// other versions.
//
// JSON-lines record (one per outer iteration):
//   schema_version   int
//   method           "gps" | "cem" | "rwr"
//   task             task name
//   horizon          T
//   iteration        1-based
//   total_samples    rollouts drawn so far
//   mean_cost        mean total cost of this iteration's rollouts
//   sample_distance  mean final target distance of this iteration's rollouts
//   target_distance  mean final target distance of the learned policy's
//                    noiseless execution on the training conditions
//   policy_cost      mean total cost of that execution
//   kl               per condition: sum_t KL(p_i(u_t|x_t) || pi(u_t|x_t)) (gps)
//   lambda_norm      per condition: sqrt(sum_t |lambda_t|^2) (gps)
//   nu               per condition: nu_t profile (gps)
//   step_status      per condition: KL step outcome (gps)
//   eta              per condition: final eta (gps)
//   stalled          every condition's step was rejected (gps)
//
// CSV curve: a "# schema_version=N" line, then
//   iteration,total_samples,mean_cost,target_distance

#ifndef GPSLAB_METRICS_H_
#define GPSLAB_METRICS_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gpslab {

inline constexpr int kMetricsSchemaVersion = 1;

struct IterationMetrics {
  std::string method;
  std::string task;
  int horizon = 0;
  int iteration = 0;
  long total_samples = 0;
  double mean_cost = 0.0;
  double sample_distance = 0.0;
  double target_distance = 0.0;
  double policy_cost = 0.0;
  std::vector<double> kl;
  std::vector<double> lambda_norm;
  std::vector<std::vector<double>> nu;
  std::vector<std::string> step_status;
  std::vector<double> eta;
  bool stalled = false;

  nlohmann::json ToJson() const;
  // Throws IncompatibleError on a schema mismatch.
  static IterationMetrics FromJson(const nlohmann::json& j);
};

void WriteMetricsLine(std::ostream& out, const IterationMetrics& m);
std::vector<IterationMetrics> ReadMetricsFile(const std::filesystem::path& path);

struct CurveRow {
  int iteration = 0;
  long total_samples = 0;
  double mean_cost = 0.0;
  double target_distance = 0.0;
};

void WriteCurveCsv(std::ostream& out, const std::vector<IterationMetrics>& metrics);
std::vector<CurveRow> ReadCurveCsv(const std::filesystem::path& path);

// Shortest round-trip decimal representation.
std::string FormatDouble(double v);

}  // namespace gpslab

#endif  // GPSLAB_METRICS_H_

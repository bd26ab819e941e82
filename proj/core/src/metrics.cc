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

#include "gpslab/metrics.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gpslab/error.h"

namespace gpslab {

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json IterationMetrics::ToJson() const {
  nlohmann::json j;
  j["schema_version"] = kMetricsSchemaVersion;
  j["method"] = method;
  j["task"] = task;
  j["horizon"] = horizon;
  j["iteration"] = iteration;
  j["total_samples"] = total_samples;
  j["mean_cost"] = mean_cost;
  j["sample_distance"] = sample_distance;
  j["target_distance"] = target_distance;
  j["policy_cost"] = policy_cost;
  j["kl"] = kl;
  j["lambda_norm"] = lambda_norm;
  j["nu"] = nu;
  j["step_status"] = step_status;
  j["eta"] = eta;
  j["stalled"] = stalled;
  return j;
}

IterationMetrics IterationMetrics::FromJson(const nlohmann::json& j) {
  const int version = j.value("schema_version", -1);
  if (version != kMetricsSchemaVersion) {
    throw IncompatibleError("metrics schema version " + std::to_string(version) +
                            " (expected " + std::to_string(kMetricsSchemaVersion) + ")");
  }
  IterationMetrics m;
  try {
    m.method = j.at("method").get<std::string>();
    m.task = j.at("task").get<std::string>();
    m.horizon = j.at("horizon").get<int>();
    m.iteration = j.at("iteration").get<int>();
    m.total_samples = j.at("total_samples").get<long>();
    m.mean_cost = j.at("mean_cost").get<double>();
    m.sample_distance = j.at("sample_distance").get<double>();
    m.target_distance = j.at("target_distance").get<double>();
    m.policy_cost = j.at("policy_cost").get<double>();
    m.kl = j.at("kl").get<std::vector<double>>();
    m.lambda_norm = j.at("lambda_norm").get<std::vector<double>>();
    m.nu = j.at("nu").get<std::vector<std::vector<double>>>();
    m.step_status = j.at("step_status").get<std::vector<std::string>>();
    m.eta = j.at("eta").get<std::vector<double>>();
    m.stalled = j.at("stalled").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw IncompatibleError(std::string("malformed metrics record: ") + e.what());
  }
  return m;
}

void WriteMetricsLine(std::ostream& out, const IterationMetrics& m) {
  out << m.ToJson().dump() << '\n';
}

std::vector<IterationMetrics> ReadMetricsFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IncompatibleError("cannot read metrics file " + path.string());
  std::vector<IterationMetrics> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IncompatibleError(path.string() + ": " + e.what());
    }
    out.push_back(IterationMetrics::FromJson(j));
  }
  return out;
}

void WriteCurveCsv(std::ostream& out, const std::vector<IterationMetrics>& metrics) {
  out << "# schema_version=" << kMetricsSchemaVersion << '\n';
  out << "iteration,total_samples,mean_cost,target_distance\n";
  for (const auto& m : metrics) {
    out << m.iteration << ',' << m.total_samples << ',' << FormatDouble(m.mean_cost) << ','
        << FormatDouble(m.target_distance) << '\n';
  }
}

std::vector<CurveRow> ReadCurveCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IncompatibleError("cannot read curve file " + path.string());
  std::string line;
  const std::string expected = "# schema_version=" + std::to_string(kMetricsSchemaVersion);
  if (!std::getline(in, line) || line != expected) {
    throw IncompatibleError(path.string() + ": missing or mismatched schema version");
  }
  if (!std::getline(in, line) || line != "iteration,total_samples,mean_cost,target_distance") {
    throw IncompatibleError(path.string() + ": unexpected header");
  }
  std::vector<CurveRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    CurveRow r;
    char comma;
    if (!(ss >> r.iteration >> comma >> r.total_samples >> comma >> r.mean_cost >> comma >>
          r.target_distance)) {
      throw IncompatibleError(path.string() + ": malformed row '" + line + "'");
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace gpslab

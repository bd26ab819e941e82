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

// gpslab command-line tool.
//
//   gpslab train --config run.json [--out DIR]
//   gpslab eval --checkpoint policy.ckpt --task point_mass_peg --split test --trials 10 --seed 0
//   gpslab compare runs/gps runs/cem runs/rwr [--csv table.csv]

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gpslab/error.h"
#include "gpslab/experiment.h"

namespace {

int Train(const std::string& config_path, const std::string& out_dir, bool quiet) {
  gpslab::ExperimentConfig config = gpslab::ExperimentConfig::FromFile(config_path);
  if (!out_dir.empty()) config.output_dir = out_dir;
  const gpslab::TrainOutcome outcome = gpslab::CmdTrain(config, quiet ? nullptr : &std::cerr);
  std::cout << outcome.directory.string() << '\n';
  return gpslab::kExitOk;
}

int Eval(const std::string& checkpoint, const std::string& task, const std::string& split,
         int trials, std::uint64_t seed, const std::string& csv_path) {
  const gpslab::Split s = split == "test" ? gpslab::Split::kTest : gpslab::Split::kTrain;
  const auto rows = gpslab::CmdEval(checkpoint, task, s, trials, seed);
  gpslab::PrintEvalTable(std::cout, rows);
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw gpslab::Error("cannot write " + csv_path);
    out << "condition,offset,trials,mean_final_distance,success_rate,"
           "mean_action_distance,mean_action_success\n";
    for (const auto& r : rows) {
      out << r.condition << ',' << gpslab::FormatDouble(r.offset) << ',' << r.trials << ','
          << gpslab::FormatDouble(r.mean_final_distance) << ','
          << gpslab::FormatDouble(r.success_rate) << ','
          << gpslab::FormatDouble(r.mean_execution_distance) << ','
          << (r.mean_execution_success ? 1 : 0) << '\n';
    }
  }
  return gpslab::kExitOk;
}

int Compare(const std::vector<std::string>& dirs, const std::string& csv_path) {
  std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
  const gpslab::CompareTable table = gpslab::CmdCompare(paths);
  gpslab::PrintCompareMarkdown(std::cout, table);
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw gpslab::Error("cannot write " + csv_path);
    gpslab::WriteCompareCsv(out, table);
  }
  return gpslab::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided policy search experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Run an experiment from a JSON config");
  train->add_option("--config", config_path, "Experiment config (JSON)")->required();
  train->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  train->add_flag("--quiet", quiet, "Suppress progress output");

  std::string checkpoint, task, split = "train", eval_csv;
  int trials = 10;
  std::uint64_t seed = 0;
  auto* eval = app.add_subcommand("eval", "Evaluate a policy checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Policy checkpoint")->required();
  eval->add_option("--task", task, "Task name or JSON file")->required();
  eval->add_option("--split", split, "Initial conditions")
      ->check(CLI::IsMember({"train", "test"}));
  eval->add_option("--trials", trials, "Stochastic trials per condition")
      ->check(CLI::NonNegativeNumber);
  eval->add_option("--seed", seed, "Seed for the trials");
  eval->add_option("--csv", eval_csv, "Also write the table as CSV");

  std::vector<std::string> dirs;
  std::string compare_csv;
  auto* compare = app.add_subcommand("compare", "Tabulate runs against total samples");
  compare->add_option("dirs", dirs, "Run directories")->required();
  compare->add_option("--csv", compare_csv, "Also write the long-format CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gpslab::kExitConfig;
  }

  try {
    if (*train) return Train(config_path, out_dir, quiet);
    if (*eval) return Eval(checkpoint, task, split, trials, seed, eval_csv);
    if (*compare) return Compare(dirs, compare_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gpslab::ExitCodeForCurrentException();
  }
  return gpslab::kExitOk;
}

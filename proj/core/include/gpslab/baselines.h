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

// Model-free baselines over the flattened parameters (K_t, k_t) of one
// time-varying linear controller shared by all conditions. CEM and RWR share
// the weighted refit and differ only in how samples are weighted.

#ifndef GPSLAB_BASELINES_H_
#define GPSLAB_BASELINES_H_

#include <cstdint>
#include <string>
#include <vector>

#include "gpslab/envs.h"
#include "gpslab/metrics.h"
#include "gpslab/models.h"

namespace gpslab {

inline constexpr double kParamVarianceFloor = 1e-8;

struct ParamDistribution {
  Vec mean;
  Vec variance;  // diagonal
};

// Rows of `params` are samples. Weights are normalized internally.
ParamDistribution WeightedRefit(const Mat& params, const Vec& weights);

// Uniform weights on the ceil(fraction * n) cheapest samples; ties go to the
// lower sample index.
Vec EliteWeights(const Vec& costs, double elite_fraction);
ParamDistribution CemUpdate(const ParamDistribution& dist, const Mat& params, const Vec& costs,
                            double elite_fraction);

// exp(-beta (cost - min cost)), normalized.
Vec RwrWeights(const Vec& costs, double beta);
// beta that gives the best sample e times the weight of the median one.
double AutoTemperature(const Vec& costs);
ParamDistribution RwrUpdate(const ParamDistribution& dist, const Mat& params, const Vec& costs,
                            double beta);

Vec FlattenController(const LinearGaussianController& controller);
// Rebuilds a controller of the given shape; covariances are set to `variance` I.
LinearGaussianController UnflattenController(const Vec& theta, int horizon, int dx, int du,
                                             double variance);

enum class BaselineMethod { kCem, kRwr };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::kCem;
  int iterations = 10;
  int samples_per_iteration = 20;
  double elite_fraction = 0.2;
  double beta = -1.0;  // < 0 selects AutoTemperature
  double offset_variance = -1.0;  // < 0: task init variance
  double gain_variance = 1e-2;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct BaselineResult {
  ParamDistribution distribution;
  LinearGaussianController mean_controller;
  std::vector<IterationMetrics> metrics;
};

// Sample s of iteration k runs condition s mod (number of conditions).
BaselineResult RunBaseline(const BaselineConfig& config, const Environment& env);

struct SweepEntry {
  double elite_fraction = 0.0;
  double final_distance = 0.0;
  double final_cost = 0.0;
};

// CEM over elite fractions {0.1, 0.2, 0.5} (or `fractions`), reporting the
// final policy distance and cost of each.
std::vector<SweepEntry> SweepEliteFraction(const BaselineConfig& base, const Environment& env,
                                           const std::vector<double>& fractions = {0.1, 0.2, 0.5});

std::string BaselineMethodName(BaselineMethod m);

}  // namespace gpslab

#endif  // GPSLAB_BASELINES_H_

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

// Value types shared across the trajectory-optimization pipeline.

#ifndef GPSLAB_MODELS_H_
#define GPSLAB_MODELS_H_

#include <vector>

#include "gpslab/gauss.h"

namespace gpslab {

// One rollout. Row t of `states`/`actions`/`observations` holds x_t, u_t, o_t.
struct TrajectorySample {
  Mat states;
  Mat actions;
  Mat observations;
  Vec costs;
  int condition = 0;
  int iteration = 0;

  int horizon() const { return static_cast<int>(states.rows()); }
  double total_cost() const { return costs.sum(); }
};

// x_{t+1} | x_t, u_t ~ N(fx x_t + fu u_t + fc, F) for t in [0, T-1).
struct DynamicsStep {
  Mat fx;
  Mat fu;
  Vec fc;
  Mat F;
};

struct LinearGaussianDynamics {
  std::vector<DynamicsStep> steps;

  int horizon() const { return static_cast<int>(steps.size()); }
  int dx() const { return steps.empty() ? 0 : static_cast<int>(steps[0].fx.rows()); }
  int du() const { return steps.empty() ? 0 : static_cast<int>(steps[0].fu.cols()); }
};

// u_t | x_t ~ N(K_t x_t + k_t, C_t) for t in [0, T).
struct LinearGaussianController {
  std::vector<Mat> K;
  std::vector<Vec> k;
  std::vector<Mat> C;

  int horizon() const { return static_cast<int>(K.size()); }
  int dx() const { return K.empty() ? 0 : static_cast<int>(K[0].cols()); }
  int du() const { return K.empty() ? 0 : static_cast<int>(K[0].rows()); }

  Vec Mean(int t, const Vec& x) const { return K[t] * x + k[t]; }

  static LinearGaussianController Zeros(int horizon, int dx, int du, double variance);
};

// Local linear-Gaussian fit of the policy mean around the sampled states.
using LinearizedPolicy = LinearGaussianController;

}  // namespace gpslab

#endif  // GPSLAB_MODELS_H_

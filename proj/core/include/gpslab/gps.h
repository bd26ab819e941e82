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

// The outer guided-policy-search loop: sampling, local model fitting, the
// alternation between KL-constrained controller updates and supervised
// policy training, and the multiplier updates that tie them together.

#ifndef GPSLAB_GPS_H_
#define GPSLAB_GPS_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gpslab/dynamics.h"
#include "gpslab/envs.h"
#include "gpslab/gmm.h"
#include "gpslab/metrics.h"
#include "gpslab/models.h"
#include "gpslab/policy.h"
#include "gpslab/trajopt.h"

namespace gpslab {

inline constexpr double kNuMin = 1e-4;
inline constexpr double kNuMax = 1e4;

struct PosePretrainConfig {
  int images = 400;
  PoseTrainOptions train;
};

struct GpsConfig {
  int iterations = 10;
  int samples_per_condition = 5;
  double epsilon = 1.0;  // bound on the total trajectory KL per update
  double alpha = 0.1;
  double nu_init = 0.01;
  int inner_passes = 2;
  int policy_steps = 50;
  SgdOptions sgd;
  std::vector<int> hidden = {40};
  Activation activation = Activation::kSoftplus;
  int history_iterations = 3;  // prior iterations feeding the dynamics GMM
  int replay_window = 3;
  GmmFitOptions gmm;
  FitOptions fit;
  bool shared_dynamics = false;
  KlStepOptions kl_step;
  double initial_state_variance = 1e-6;
  std::uint64_t seed = 0;
  // Iterations run with a small state-input policy before the observation
  // policy takes over (only meaningful for image observations).
  int pretrain_iterations = 0;
  std::optional<PosePretrainConfig> pose_pretrain;
  // Steps with a frozen pretrained front-end before end-to-end training.
  int head_only_steps = 200;

  void Validate() const;
};

struct GpsState {
  int iteration = 0;
  long total_samples = 0;
  std::vector<Vec> initial_states;
  std::vector<LinearGaussianController> controllers;
  GaussianPolicy policy;
  bool policy_uses_state = false;
  std::vector<std::vector<Vec>> lambda;   // [condition][t]
  std::vector<std::vector<double>> nu;    // [condition][t]
  std::deque<std::vector<TrajectorySample>> archive;  // newest last
  ReplayBuffer replay;
  PolicyTrainer trainer;
  long policy_steps_taken = 0;
  bool front_end_pretrained = false;
};

// Draws `count` rollouts per condition. Rollout j of condition i uses a
// seed derived from (seed, iteration, i, j). Throws Error when the simulator
// produces a non-finite state.
std::vector<TrajectorySample> SampleRollouts(const Environment& env,
                                             std::span<const LinearGaussianController> controllers,
                                             std::span<const Vec> initial_states, int count,
                                             std::uint64_t seed, int iteration);

// Noiseless execution of the policy mean from x1.
TrajectorySample RunPolicyMean(const Environment& env, const GaussianPolicy& policy, bool uses_state,
                               const Vec& x1, int condition);

// Noiseless execution of the controller mean from x1.
TrajectorySample RunControllerMean(const Environment& env,
                                   const LinearGaussianController& controller, const Vec& x1,
                                   int condition);

// lambda_t += alpha * nu_t * (policy_mean_t - controller_mean_t)
void UpdateLambda(std::vector<Vec>& lambda, const std::vector<double>& nu, double alpha,
                  const std::vector<Vec>& policy_mean, const std::vector<Vec>& controller_mean);

// Doubles nu_t where kl_t exceeds the mean over t, halves it where kl_t is at
// least two (population) standard deviations below the mean, then clamps to
// [kNuMin, kNuMax].
std::vector<double> ScheduleNu(const std::vector<double>& nu, const std::vector<double>& kl);

// Mean over samples of KL(p(u_t|x_t) || pi(u_t|o_t)) for every t.
std::vector<double> PolicyKlProfile(const LinearGaussianController& controller,
                                    const GaussianPolicy& policy, bool uses_state,
                                    std::span<const TrajectorySample> samples);

GpsState InitGps(const GpsConfig& config, const Environment& env);

// One outer iteration; returns its metrics record.
IterationMetrics OuterIteration(GpsState& state, const Environment& env, const GpsConfig& config);

struct GpsResult {
  GpsState state;
  std::vector<IterationMetrics> metrics;
};

using IterationCallback = std::function<void(const IterationMetrics&, const GpsState&)>;

GpsResult RunGps(const GpsConfig& config, const Environment& env,
                 const IterationCallback& on_iteration = {});

// Mean final target distance and total cost of the noiseless policy mean over
// the given initial states.
struct PolicyEvaluation {
  std::vector<double> final_distance;
  std::vector<double> total_cost;
  double mean_distance = 0.0;
  double mean_cost = 0.0;
};
PolicyEvaluation EvaluatePolicy(const Environment& env, const GaussianPolicy& policy,
                                bool uses_state, std::span<const Vec> initial_states);

}  // namespace gpslab

#endif  // GPSLAB_GPS_H_

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

// KL-step-constrained trajectory update: the BADMM surrogate cost and dual
// search on the KL multiplier eta, with maximum-entropy LQR as primal solver.

#ifndef GPSLAB_TRAJOPT_H_
#define GPSLAB_TRAJOPT_H_

#include <string_view>
#include <vector>

#include "gpslab/lqr.h"
#include "gpslab/models.h"

namespace gpslab {

struct SurrogateCost {
  QuadraticCostExpansion expansion;
  double eta = 0.0;
  std::vector<double> nu;
};

// Exact quadratic in z = [x; u] of -log N(u; K x + k, C) at step t.
QuadraticCostExpansion NegLogLikelihoodExpansion(const LinearGaussianController& law);

// c~ = (l - u^T lambda_t - nu_t log pibar) / (eta + nu_t)
//      - eta / (eta + nu_t) log phat,
// one step at a time with that step's nu_t. `linearized_policy` may be null,
// in which case the policy term is dropped.
SurrogateCost BuildSurrogate(const QuadraticCostExpansion& cost,
                             const std::vector<Vec>& lambda, const std::vector<double>& nu,
                             const LinearizedPolicy* linearized_policy,
                             const LinearGaussianController& previous, double eta);

struct TrajectoryKl {
  std::vector<double> per_step;
  double total = 0.0;
};

// KL(p(tau) || phat(tau)) for two controllers sharing dynamics and the
// initial state distribution: sum_t E_{p(x_t)} KL(p(u|x) || phat(u|x)).
TrajectoryKl TrajKl(const LinearGaussianController& p, const LinearGaussianController& phat,
                    const LinearGaussianDynamics& dynamics, const Gaussian& initial_state);

// E_p[c~] - H(p) up to constants independent of p.
double SurrogateObjective(const LinearGaussianController& p, const SurrogateCost& surrogate,
                          const LinearGaussianDynamics& dynamics, const Gaussian& initial_state);

enum class StepStatus {
  kUnconstrained,       // KL <= epsilon already at the smallest eta
  kConstrainedOptimum,  // eta found with KL within tolerance of epsilon
  kStepRejected,        // KL > epsilon even at the largest eta
};

std::string_view StepStatusName(StepStatus status);

struct KlStepOptions {
  double eta_min = 1e-8;
  double eta_max = 1e8;
  int max_iterations = 20;
  // Stop once |KL - epsilon| <= kl_tolerance * epsilon.
  double kl_tolerance = 0.1;
};

struct KlStepProblem {
  const QuadraticCostExpansion* cost = nullptr;
  const std::vector<Vec>* lambda = nullptr;
  const std::vector<double>* nu = nullptr;
  const LinearizedPolicy* linearized_policy = nullptr;  // optional
  const LinearGaussianController* previous = nullptr;
  const LinearGaussianDynamics* dynamics = nullptr;
  Gaussian initial_state;
  double epsilon = 1.0;
};

struct StepResult {
  LinearGaussianController controller;
  TrajectoryKl kl;
  double eta = 0.0;
  int iterations = 0;
  StepStatus status = StepStatus::kUnconstrained;
};

StepResult KlStep(const KlStepProblem& problem, const KlStepOptions& options = {});

}  // namespace gpslab

#endif  // GPSLAB_TRAJOPT_H_

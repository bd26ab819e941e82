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

// Time-varying linear-Gaussian fits of the dynamics and of the policy mean,
// built as "fit a Gaussian to joint vectors, then condition".

#ifndef GPSLAB_DYNAMICS_H_
#define GPSLAB_DYNAMICS_H_

#include <span>
#include <vector>

#include "gpslab/gauss.h"
#include "gpslab/gmm.h"
#include "gpslab/models.h"

namespace gpslab {

struct FitOptions {
  NiwMeanRule mean_rule = NiwMeanRule::kPrinted;
  double prior_m = 1.0;
  double prior_n0 = 1.0;
};

// Fits a Gaussian to the rows of `joint` (optionally MAP under `prior`) and
// conditions the trailing columns on the first `split` columns.
LinearGaussianConditional FitConditional(const Mat& joint, int split, const NiwPrior* prior,
                                         const FitOptions& options = {});

// Rows [x_t; u_t; x_{t+1}] for every sample, in sample order.
Mat TransitionTuples(std::span<const TrajectorySample> samples, int t);
// All transition tuples of all samples over every t.
Mat AllTransitionTuples(std::span<const TrajectorySample> samples);

// Dynamics at step t from the given samples. When `prior_gmm` is set, the
// NIW prior comes from InferPrior over the batch at t.
DynamicsStep FitDynamicsStep(std::span<const TrajectorySample> samples,
                             const GaussianMixture* prior_gmm, int t,
                             const FitOptions& options = {});

// Full-horizon fit (T-1 steps) for one condition.
LinearGaussianDynamics FitDynamics(std::span<const TrajectorySample> samples,
                                   const GaussianMixture* prior_gmm,
                                   const FitOptions& options = {});

// Same computation over samples pooled from several conditions; the result is
// shared by all of them.
LinearGaussianDynamics FitSharedDynamics(std::span<const TrajectorySample> pooled,
                                         const GaussianMixture* prior_gmm,
                                         const FitOptions& options = {});

// One timestep of the policy linearization from pairs (x_t^j, E[u | o_t^j]).
// The covariance of the result is `sigma_pi`.
LinearGaussianConditional LinearizePolicyStep(const Mat& states, const Mat& action_means,
                                              const Mat& sigma_pi,
                                              const GaussianMixture* prior_gmm,
                                              const FitOptions& options = {});

}  // namespace gpslab

#endif  // GPSLAB_DYNAMICS_H_

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

#include "gpslab/dynamics.h"

#include "gpslab/error.h"

namespace gpslab {

LinearGaussianController LinearGaussianController::Zeros(int horizon, int dx, int du,
                                                         double variance) {
  LinearGaussianController c;
  c.K.assign(horizon, Mat::Zero(du, dx));
  c.k.assign(horizon, Vec::Zero(du));
  c.C.assign(horizon, variance * Mat::Identity(du, du));
  return c;
}

LinearGaussianConditional FitConditional(const Mat& joint, int split, const NiwPrior* prior,
                                         const FitOptions& options) {
  if (joint.rows() < 2) {
    throw InsufficientDataError("local Gaussian fit needs at least 2 samples");
  }
  const Gaussian empirical = EmpiricalMoments(joint);
  Gaussian fitted;
  if (prior != nullptr) {
    fitted = NiwMap(empirical.mean, empirical.covariance, static_cast<double>(joint.rows()),
                    *prior, options.mean_rule);
  } else {
    fitted.mean = empirical.mean;
    fitted.covariance = empirical.covariance;
  }
  return Condition(fitted, split);
}

Mat TransitionTuples(std::span<const TrajectorySample> samples, int t) {
  if (samples.empty()) return Mat();
  const int dx = static_cast<int>(samples[0].states.cols());
  const int du = static_cast<int>(samples[0].actions.cols());
  Mat rows(samples.size(), 2 * dx + du);
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const TrajectorySample& s = samples[j];
    if (t + 1 >= s.horizon()) throw DimensionError("transition index beyond sample horizon");
    rows.row(j) << s.states.row(t), s.actions.row(t), s.states.row(t + 1);
  }
  return rows;
}

Mat AllTransitionTuples(std::span<const TrajectorySample> samples) {
  if (samples.empty()) return Mat();
  const int dx = static_cast<int>(samples[0].states.cols());
  const int du = static_cast<int>(samples[0].actions.cols());
  long total = 0;
  for (const auto& s : samples) total += s.horizon() - 1;
  Mat rows(total, 2 * dx + du);
  long r = 0;
  for (const auto& s : samples) {
    for (int t = 0; t + 1 < s.horizon(); ++t, ++r) {
      rows.row(r) << s.states.row(t), s.actions.row(t), s.states.row(t + 1);
    }
  }
  return rows;
}

DynamicsStep FitDynamicsStep(std::span<const TrajectorySample> samples,
                             const GaussianMixture* prior_gmm, int t,
                             const FitOptions& options) {
  if (samples.size() < 2) {
    throw InsufficientDataError("dynamics fit needs at least 2 samples at each step");
  }
  const int dx = static_cast<int>(samples[0].states.cols());
  const int du = static_cast<int>(samples[0].actions.cols());
  const Mat batch = TransitionTuples(samples, t);
  NiwPrior prior;
  if (prior_gmm != nullptr) {
    prior = InferPrior(*prior_gmm, batch, options.prior_m, options.prior_n0);
  }
  const LinearGaussianConditional cond =
      FitConditional(batch, dx + du, prior_gmm ? &prior : nullptr, options);
  DynamicsStep step;
  step.fx = cond.gain.leftCols(dx);
  step.fu = cond.gain.rightCols(du);
  step.fc = cond.offset;
  step.F = cond.covariance;
  return step;
}

LinearGaussianDynamics FitDynamics(std::span<const TrajectorySample> samples,
                                   const GaussianMixture* prior_gmm,
                                   const FitOptions& options) {
  if (samples.size() < 2) {
    throw InsufficientDataError("dynamics fit needs at least 2 samples at each step");
  }
  const int horizon = samples[0].horizon();
  for (const auto& s : samples) {
    if (s.horizon() != horizon) throw DimensionError("samples differ in horizon");
  }
  LinearGaussianDynamics dyn;
  dyn.steps.reserve(horizon - 1);
  for (int t = 0; t + 1 < horizon; ++t) {
    dyn.steps.push_back(FitDynamicsStep(samples, prior_gmm, t, options));
  }
  return dyn;
}

LinearGaussianDynamics FitSharedDynamics(std::span<const TrajectorySample> pooled,
                                         const GaussianMixture* prior_gmm,
                                         const FitOptions& options) {
  return FitDynamics(pooled, prior_gmm, options);
}

LinearGaussianConditional LinearizePolicyStep(const Mat& states, const Mat& action_means,
                                              const Mat& sigma_pi,
                                              const GaussianMixture* prior_gmm,
                                              const FitOptions& options) {
  if (states.rows() != action_means.rows()) {
    throw DimensionError("policy linearization: state and action counts differ");
  }
  if (states.rows() < 2) {
    throw InsufficientDataError("policy linearization needs at least 2 pairs");
  }
  const int dx = static_cast<int>(states.cols());
  Mat joint(states.rows(), states.cols() + action_means.cols());
  joint << states, action_means;
  NiwPrior prior;
  if (prior_gmm != nullptr) {
    prior = InferPrior(*prior_gmm, joint, options.prior_m, options.prior_n0);
  }
  LinearGaussianConditional cond =
      FitConditional(joint, dx, prior_gmm ? &prior : nullptr, options);
  cond.covariance = sigma_pi;
  return cond;
}

}  // namespace gpslab

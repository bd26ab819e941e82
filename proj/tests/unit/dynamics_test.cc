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


#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gpslab/dynamics.h"
#include "gpslab/envs.h"
#include "gpslab/error.h"
#include "support/oracles.h"

namespace gpslab {
namespace {

struct LinearSystem {
  Mat A, B;
  Vec c;
};

LinearSystem RandomSystem(int dx, int du, std::mt19937_64& rng) {
  return {Mat::Identity(dx, dx) + testing::RandomMatrix(dx, dx, rng, 0.2),
          testing::RandomMatrix(dx, du, rng), testing::RandomMatrix(dx, 1, rng)};
}

std::vector<TrajectorySample> Rollouts(const LinearSystem& sys, int count, int horizon,
                                       std::mt19937_64& rng, int condition = 0) {
  const int dx = static_cast<int>(sys.A.rows()), du = static_cast<int>(sys.B.cols());
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<TrajectorySample> out;
  for (int j = 0; j < count; ++j) {
    TrajectorySample s;
    s.condition = condition;
    s.states = Mat(horizon, dx);
    s.actions = Mat(horizon, du);
    s.costs = Vec::Zero(horizon);
    Vec x(dx);
    for (int i = 0; i < dx; ++i) x(i) = n(rng);
    for (int t = 0; t < horizon; ++t) {
      Vec u(du);
      for (int i = 0; i < du; ++i) u(i) = n(rng);
      s.states.row(t) = x.transpose();
      s.actions.row(t) = u.transpose();
      x = sys.A * x + sys.B * u + sys.c;
    }
    out.push_back(std::move(s));
  }
  return out;
}

TEST(FitDynamics, RecoversNoiselessLinearSystem) {
  std::mt19937_64 rng(1);
  const LinearSystem sys = RandomSystem(3, 2, rng);
  const auto samples = Rollouts(sys, 8, 6, rng);  // 8 >= dx + du + 1
  const LinearGaussianDynamics dyn = FitDynamics(samples, nullptr);
  ASSERT_EQ(dyn.horizon(), 5);
  for (const auto& step : dyn.steps) {
    EXPECT_LT((step.fx - sys.A).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((step.fu - sys.B).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((step.fc - sys.c).cwiseAbs().maxCoeff(), 1e-6);
    // Zero residual covariance, up to the positive-definite floor.
    EXPECT_LT(step.F.trace(), 1e-5);
  }
}

TEST(FitDynamics, WeakConjugatePriorStillRecoversSystem) {
  std::mt19937_64 rng(2);
  const LinearSystem sys = RandomSystem(2, 1, rng);
  const auto samples = Rollouts(sys, 6, 5, rng);
  const Mat tuples = AllTransitionTuples(samples);
  const GaussianMixture gmm = FitGmm(tuples, 2, 3);
  FitOptions weak;
  weak.mean_rule = NiwMeanRule::kConjugate;
  weak.prior_m = 1e-9;
  weak.prior_n0 = 1e-9;
  const LinearGaussianDynamics dyn = FitDynamics(samples, &gmm, weak);
  for (const auto& step : dyn.steps) {
    EXPECT_LT((step.fx - sys.A).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((step.fu - sys.B).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((step.fc - sys.c).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(FitDynamics, IdenticalSamplesGiveFiniteGains) {
  TrajectorySample s;
  s.states = Mat::Ones(4, 2);
  s.actions = Mat::Ones(4, 1);
  s.costs = Vec::Zero(4);
  const std::vector<TrajectorySample> samples(5, s);
  const LinearGaussianDynamics dyn = FitDynamics(samples, nullptr);
  for (const auto& step : dyn.steps) {
    EXPECT_TRUE(step.fx.allFinite());
    EXPECT_TRUE(step.fu.allFinite());
    EXPECT_EQ(Eigen::LLT<Mat>(step.F).info(), Eigen::Success);
    EXPECT_LT(step.F.norm(), 1e-3);
  }
}

TEST(FitDynamics, DoubleIntegratorCoefficients) {
  Environment env(MakeTask("double_integrator"));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<TrajectorySample> samples;
  for (int j = 0; j < 6; ++j) {
    TrajectorySample s;
    s.states = Mat(5, 2);
    s.actions = Mat(5, 1);
    s.costs = Vec::Zero(5);
    Vec x(2);
    x << n(rng), n(rng);
    for (int t = 0; t < 5; ++t) {
      Vec u(1);
      u << n(rng);
      s.states.row(t) = x.transpose();
      s.actions.row(t) = u.transpose();
      x = env.Step(x, u);
    }
    samples.push_back(s);
  }
  const LinearGaussianDynamics dyn = FitDynamics(samples, nullptr);
  Mat fx(2, 2), fu(2, 1);
  fx << 1.0, 0.1, 0.0, 1.0;
  fu << 0.005, 0.1;
  for (const auto& step : dyn.steps) {
    EXPECT_LT((step.fx - fx).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((step.fu - fu).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(FitDynamics, FittedCovariancesArePd) {
  std::mt19937_64 rng(4);
  LinearSystem sys = RandomSystem(3, 2, rng);
  auto samples = Rollouts(sys, 3, 6, rng);  // rank deficient without a prior
  for (auto& s : samples) s.states += 0.01 * testing::RandomMatrix(6, 3, rng);
  const Mat tuples = AllTransitionTuples(samples);
  const GaussianMixture gmm = FitGmm(tuples, 1, 0);
  const LinearGaussianDynamics dyn = FitDynamics(samples, &gmm);
  for (const auto& step : dyn.steps) {
    EXPECT_TRUE((step.F - step.F.transpose()).norm() < 1e-12);
    EXPECT_EQ(Eigen::LLT<Mat>(step.F).info(), Eigen::Success);
  }
}

TEST(FitDynamics, OneSampleThrows) {
  std::mt19937_64 rng(5);
  const auto samples = Rollouts(RandomSystem(2, 1, rng), 1, 4, rng);
  EXPECT_THROW(FitDynamics(samples, nullptr), InsufficientDataError);
}

TEST(FitSharedDynamics, PoolingAllowsOneRolloutPerCondition) {
  std::mt19937_64 rng(6);
  const LinearSystem sys = RandomSystem(2, 1, rng);
  std::vector<TrajectorySample> pooled;
  for (int c = 0; c < 4; ++c) {
    auto one = Rollouts(sys, 1, 5, rng, c);
    EXPECT_THROW(FitDynamics(one, nullptr), InsufficientDataError);
    pooled.push_back(one[0]);
  }
  const LinearGaussianDynamics dyn = FitSharedDynamics(pooled, nullptr);
  for (const auto& step : dyn.steps) {
    EXPECT_LT((step.fx - sys.A).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((step.fu - sys.B).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(FitSharedDynamics, TwoSystemsFitNeitherExactly) {
  std::mt19937_64 rng(7);
  const LinearSystem a = RandomSystem(2, 1, rng);
  const LinearSystem b = RandomSystem(2, 1, rng);
  auto pooled = Rollouts(a, 5, 4, rng, 0);
  for (auto& s : Rollouts(b, 5, 4, rng, 1)) pooled.push_back(s);
  const LinearGaussianDynamics dyn = FitSharedDynamics(pooled, nullptr);
  for (const auto& step : dyn.steps) {
    EXPECT_GT((step.fx - a.A).norm() + (step.fu - a.B).norm(), 1e-3);
    EXPECT_GT((step.fx - b.A).norm() + (step.fu - b.B).norm(), 1e-3);
    EXPECT_GT(step.F.trace(), 1e-6);
  }
}

TEST(LinearizePolicyStep, RecoversLinearPolicy) {
  std::mt19937_64 rng(8);
  const Mat K = testing::RandomMatrix(2, 3, rng);
  const Vec k = testing::RandomMatrix(2, 1, rng);
  const Mat x = testing::RandomMatrix(10, 3, rng);
  const Mat u = (x * K.transpose()).rowwise() + k.transpose();
  const Mat sigma = 0.3 * Mat::Identity(2, 2);
  const auto lin = LinearizePolicyStep(x, u, sigma, nullptr);
  EXPECT_LT((lin.gain - K).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((lin.offset - k).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(lin.covariance, sigma);
}

TEST(LinearizePolicyStep, ConstantActionGivesZeroGain) {
  std::mt19937_64 rng(9);
  const Mat x = testing::RandomMatrix(10, 3, rng);
  const Vec a = testing::RandomMatrix(2, 1, rng);
  const Mat u = a.transpose().replicate(10, 1);
  const auto lin = LinearizePolicyStep(x, u, Mat::Identity(2, 2), nullptr);
  EXPECT_LT(lin.gain.cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((lin.offset - a).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(LinearizePolicyStep, SharesTheDynamicsFitPath) {
  std::mt19937_64 rng(10);
  const Mat x = testing::RandomMatrix(12, 3, rng);
  const Mat u = testing::RandomMatrix(12, 2, rng);
  Mat joint(12, 5);
  joint << x, u;
  const GaussianMixture gmm = FitGmm(joint, 2, 4);
  const NiwPrior prior = InferPrior(gmm, joint);
  const auto direct = FitConditional(joint, 3, &prior);
  const auto lin = LinearizePolicyStep(x, u, Mat::Identity(2, 2), &gmm);
  EXPECT_EQ(direct.gain, lin.gain);
  EXPECT_EQ(direct.offset, lin.offset);
}

}  // namespace
}  // namespace gpslab

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

#include "gpslab/envs.h"
#include "gpslab/error.h"
#include "gpslab/lqr.h"
#include "support/oracles.h"

namespace gpslab {
namespace {

StageCostFn QuadraticStage(const Mat& H, const Vec& g, double c) {
  return [=](int, const Vec& x, const Vec& u) {
    Vec z(x.size() + u.size());
    z << x, u;
    return CostDerivatives{0.5 * z.dot(H * z) + g.dot(z) + c, H * z + g, H};
  };
}

TEST(Quadratize, QuadraticCostIsItsOwnExpansion) {
  std::mt19937_64 rng(1);
  const Mat H = testing::RandomSpd(3, rng);
  const Vec g = testing::RandomMatrix(3, 1, rng);
  const auto cost = QuadraticStage(H, g, 0.7);
  for (int trial = 0; trial < 3; ++trial) {
    const Mat xs = testing::RandomMatrix(4, 2, rng, 5.0);
    const Mat us = testing::RandomMatrix(4, 1, rng, 5.0);
    const QuadraticCostExpansion e = Quadratize(cost, xs, us);
    for (int t = 0; t < 4; ++t) {
      EXPECT_LT((e.hessian[t] - H).norm(), 1e-12);
      EXPECT_LT((e.gradient[t] - g).norm(), 1e-10);
      EXPECT_NEAR(e.constant[t], 0.7, 1e-9);
    }
  }
}

TEST(Quadratize, ZeroCostGivesZeroExpansion) {
  const StageCostFn zero = [](int, const Vec& x, const Vec& u) {
    const int n = static_cast<int>(x.size() + u.size());
    return CostDerivatives{0.0, Vec::Zero(n), Mat::Zero(n, n)};
  };
  std::mt19937_64 rng(2);
  const auto e = Quadratize(zero, testing::RandomMatrix(3, 2, rng), testing::RandomMatrix(3, 1, rng));
  for (int t = 0; t < 3; ++t) {
    EXPECT_EQ(e.hessian[t].norm(), 0.0);
    EXPECT_EQ(e.gradient[t].norm(), 0.0);
    EXPECT_EQ(e.constant[t], 0.0);
  }
}

TEST(Quadratize, MatchesPegCostValueAndSlopeAtNominal) {
  Environment env(MakeTask("point_mass_peg"));
  std::mt19937_64 rng(3);
  const Mat xs = testing::RandomMatrix(5, 4, rng, 0.3);
  const Mat us = testing::RandomMatrix(5, 2, rng);
  const auto e = Quadratize(env.CostFn(), xs, us);
  for (int t = 0; t < 5; ++t) {
    Vec z(6);
    z << xs.row(t).transpose(), us.row(t).transpose();
    const auto value = [&](const Vec& zz) {
      return env.Cost(zz.head(4), zz.tail(2)).value;
    };
    EXPECT_NEAR(e.Evaluate(t, z), value(z), 1e-10);
    const Vec slope = e.hessian[t] * z + e.gradient[t];
    const Vec fd = testing::CentralDifference(value, z);
    EXPECT_LT(testing::RelativeError(slope, fd), 1e-5);
  }
}

TEST(Quadratize, NonFiniteDerivativeNamesStep) {
  const StageCostFn bad = [](int t, const Vec& x, const Vec& u) {
    const int n = static_cast<int>(x.size() + u.size());
    return CostDerivatives{t == 2 ? std::nan("") : 0.0, Vec::Zero(n), Mat::Zero(n, n)};
  };
  try {
    Quadratize(bad, Mat::Zero(4, 1), Mat::Zero(4, 1));
    FAIL() << "expected ExpansionError";
  } catch (const ExpansionError& e) {
    EXPECT_EQ(e.timestep(), 2);
  }
}

TEST(BackwardPass, LastStepClosedForm) {
  QuadraticCostExpansion e = QuadraticCostExpansion::Zeros(1, 1, 2);
  e.hessian[0].bottomRightCorner(2, 2).setIdentity();
  const auto r = BackwardPass(e, LinearGaussianDynamics{});
  EXPECT_EQ(r.controller.K[0].norm(), 0.0);
  EXPECT_EQ(r.controller.k[0].norm(), 0.0);
  EXPECT_LT((r.controller.C[0] - Mat::Identity(2, 2)).norm(), 1e-15);
}

// Scalar Riccati recursion for x' = x + u with cost 1/2 (x^2 + u^2).
std::vector<double> ScalarRiccatiGains(int horizon) {
  std::vector<double> gains(horizon);
  double p = 0.0;  // value beyond the horizon
  for (int t = horizon - 1; t >= 0; --t) {
    const double quu = 1.0 + p;
    const double qux = p;
    gains[t] = -qux / quu;
    p = 1.0 + p - qux * qux / quu;
  }
  return gains;
}

TEST(BackwardPass, ScalarSystemMatchesRiccatiAndBruteForce) {
  testing::LqInstance lq;
  lq.dx = lq.du = 1;
  lq.horizon = 3;
  for (int t = 0; t < 2; ++t) {
    lq.A.push_back(Mat::Ones(1, 1));
    lq.B.push_back(Mat::Ones(1, 1));
    lq.c.push_back(Vec::Zero(1));
  }
  for (int t = 0; t < 3; ++t) {
    lq.H.push_back(Mat::Identity(2, 2));
    lq.g.push_back(Vec::Zero(2));
  }
  const auto r = BackwardPass(testing::ToExpansion(lq), testing::ToDynamics(lq));
  const auto riccati = ScalarRiccatiGains(3);
  const auto brute = testing::BruteForceLqr(lq);
  for (int t = 0; t < 3; ++t) {
    EXPECT_NEAR(r.controller.K[t](0, 0), riccati[t], 1e-8);
    EXPECT_NEAR(r.controller.K[t](0, 0), brute.K[t](0, 0), 1e-8);
    EXPECT_NEAR(r.controller.k[t](0), 0.0, 1e-12);
  }
}

TEST(BackwardPass, RandomInstancesMatchBruteForce) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int dx = 1 + trial % 3, du = 1 + trial % 2, horizon = 2 + trial % 4;
    const auto lq = testing::RandomLq(dx, du, horizon, rng);
    const auto r = BackwardPass(testing::ToExpansion(lq), testing::ToDynamics(lq));
    const auto brute = testing::BruteForceLqr(lq);
    for (int t = 0; t < horizon; ++t) {
      EXPECT_LT((r.controller.K[t] - brute.K[t]).cwiseAbs().maxCoeff(), 1e-6);
      EXPECT_LT((r.controller.k[t] - brute.k[t]).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(BackwardPass, CovarianceIsInverseQuu) {
  std::mt19937_64 rng(5);
  const auto lq = testing::RandomLq(3, 2, 4, rng);
  const auto r = BackwardPass(testing::ToExpansion(lq), testing::ToDynamics(lq));
  for (int t = 0; t < 4; ++t) {
    ASSERT_EQ(r.recursion.shift[t], 0.0);
    const Mat quu = r.recursion.qzz[t].bottomRightCorner(2, 2);
    EXPECT_LT((r.controller.C[t] * quu - Mat::Identity(2, 2)).norm(), 1e-10);
    EXPECT_EQ(Eigen::LLT<Mat>(r.controller.C[t]).info(), Eigen::Success);
  }
}

TEST(BackwardPass, DoublingCostHalvesCovariance) {
  std::mt19937_64 rng(6);
  const auto lq = testing::RandomLq(2, 2, 5, rng);
  QuadraticCostExpansion e = testing::ToExpansion(lq);
  const auto dyn = testing::ToDynamics(lq);
  const auto a = BackwardPass(e, dyn);
  e *= 2.0;
  const auto b = BackwardPass(e, dyn);
  for (int t = 0; t < 5; ++t) {
    EXPECT_LT((a.controller.K[t] - b.controller.K[t]).norm(), 1e-10);
    EXPECT_LT((a.controller.k[t] - b.controller.k[t]).norm(), 1e-10);
    EXPECT_LT((a.controller.C[t] - 2.0 * b.controller.C[t]).norm(), 1e-10);
  }
}

TEST(BackwardPass, IndefiniteQuuIsShifted) {
  QuadraticCostExpansion e = QuadraticCostExpansion::Zeros(2, 1, 1);
  e.hessian[0](1, 1) = -1.0;
  e.hessian[1](1, 1) = 1.0;
  LinearGaussianDynamics dyn;
  dyn.steps.push_back({Mat::Ones(1, 1), Mat::Ones(1, 1), Vec::Zero(1), Mat::Zero(1, 1)});
  const auto r = BackwardPass(e, dyn);
  EXPECT_GT(r.recursion.shift[0], 0.0);
  EXPECT_EQ(Eigen::LLT<Mat>(r.controller.C[0]).info(), Eigen::Success);
}

TEST(ForwardPass, DeterministicOpenLoop) {
  std::mt19937_64 rng(7);
  const auto lq = testing::RandomLq(2, 1, 5, rng);
  const auto dyn = testing::ToDynamics(lq);
  LinearGaussianController c = LinearGaussianController::Zeros(5, 2, 1, 0.0);
  for (int t = 0; t < 5; ++t) c.k[t] = testing::RandomMatrix(1, 1, rng);
  Gaussian x0{testing::RandomMatrix(2, 1, rng), Mat::Zero(2, 2)};
  const auto m = ForwardPass(c, dyn, x0);
  Vec x = x0.mean;
  for (int t = 0; t < 5; ++t) {
    EXPECT_LT((m[t].mean.head(2) - x).norm(), 1e-12);
    EXPECT_LT(m[t].covariance.topLeftCorner(2, 2).norm(), 1e-12);
    if (t < 4) x = lq.A[t] * x + lq.B[t] * c.k[t] + lq.c[t];
  }
}

TEST(ForwardPass, IndependentIncrements) {
  const int T = 6;
  std::mt19937_64 rng(8);
  const Mat F = testing::RandomSpd(2, rng);
  LinearGaussianDynamics dyn;
  for (int t = 0; t + 1 < T; ++t) {
    dyn.steps.push_back({Mat::Identity(2, 2), Mat::Zero(2, 1), Vec::Zero(2), F});
  }
  LinearGaussianController c = LinearGaussianController::Zeros(T, 2, 1, 0.0);
  const auto m = ForwardPass(c, dyn, {Vec::Zero(2), Mat::Zero(2, 2)});
  for (int t = 0; t < T; ++t) {
    EXPECT_LT((m[t].covariance.topLeftCorner(2, 2) - t * F).norm(), 1e-12);
  }
}

TEST(ForwardPass, MatchesSampledRollouts) {
  std::mt19937_64 rng(9);
  const int T = 4, dx = 2, du = 2;
  const auto lq = testing::RandomLq(dx, du, T, rng);
  const auto dyn = testing::ToDynamics(lq, 0.05);
  LinearGaussianController c = LinearGaussianController::Zeros(T, dx, du, 0.0);
  for (int t = 0; t < T; ++t) {
    c.K[t] = testing::RandomMatrix(du, dx, rng, 0.3);
    c.k[t] = testing::RandomMatrix(du, 1, rng);
    c.C[t] = testing::RandomSpd(du, rng, 0.1);
  }
  const Gaussian x0{testing::RandomMatrix(dx, 1, rng), testing::RandomSpd(dx, rng, 0.1)};
  const auto marginals = ForwardPass(c, dyn, x0);

  const int n = 100000;
  std::vector<Mat> z(T, Mat(n, dx + du));
  Mat xs = testing::SampleGaussian(x0, n, rng);
  for (int t = 0; t < T; ++t) {
    Mat next(n, dx);
    for (int i = 0; i < n; ++i) {
      const Vec x = xs.row(i).transpose();
      const Vec u = testing::SampleGaussian({c.Mean(t, x), c.C[t]}, 1, rng).row(0).transpose();
      z[t].row(i) << x.transpose(), u.transpose();
      if (t + 1 < T) {
        const Vec mean = lq.A[t] * x + lq.B[t] * u + lq.c[t];
        next.row(i) = testing::SampleGaussian({mean, dyn.steps[t].F}, 1, rng);
      }
    }
    xs = next;
  }
  for (int t = 0; t < T; ++t) {
    const Gaussian emp = EmpiricalMoments(z[t]);
    EXPECT_LT((emp.mean - marginals[t].mean).norm(), 0.02 * std::max(1.0, marginals[t].mean.norm()));
    EXPECT_LT(testing::RelativeError(emp.covariance, marginals[t].covariance), 0.02);
  }
}

TEST(ExpectedCost, MatchesClosedFormForGaussian) {
  std::mt19937_64 rng(10);
  QuadraticCostExpansion e = QuadraticCostExpansion::Zeros(1, 1, 1);
  e.hessian[0] = testing::RandomSpd(2, rng);
  e.gradient[0] = testing::RandomMatrix(2, 1, rng);
  e.constant[0] = 0.3;
  const Gaussian z{testing::RandomMatrix(2, 1, rng), testing::RandomSpd(2, rng)};
  const double want = e.Evaluate(0, z.mean) + 0.5 * (e.hessian[0] * z.covariance).trace();
  EXPECT_NEAR(ExpectedCost(e, {z}), want, 1e-12);
}

}  // namespace
}  // namespace gpslab

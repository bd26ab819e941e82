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


#include <cmath>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "gpslab/envs.h"
#include "gpslab/error.h"
#include "gpslab/render.h"
#include "support/oracles.h"

namespace gpslab {
namespace {

Vec V(std::initializer_list<double> xs) {
  Vec v(static_cast<long>(xs.size()));
  long i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

TEST(Step, DoubleIntegratorArithmetic) {
  Environment env(MakeTask("double_integrator"));
  const Vec next = env.Step(V({0.0, 1.0}), V({0.0}));
  EXPECT_NEAR(next(0), 0.1, 1e-15);
  EXPECT_NEAR(next(1), 1.0, 1e-15);
  const Vec pushed = env.Step(V({0.0, 0.0}), V({1.0}));
  EXPECT_NEAR(pushed(0), 0.005, 1e-15);
  EXPECT_NEAR(pushed(1), 0.1, 1e-15);
}

TEST(Step, PointMassAtRestStaysPut) {
  Environment env(MakeTask("point_mass_peg"));
  const Vec x = V({0.3, 0.2, 0.0, 0.0});
  EXPECT_EQ(env.Step(x, Vec::Zero(2)), x);
}

TEST(Step, RejectsBadInputs) {
  Environment env(MakeTask("point_mass_peg"));
  EXPECT_THROW(env.Step(Vec::Zero(3), Vec::Zero(2)), DimensionError);
  EXPECT_THROW(env.Step(V({NAN, 0, 0, 0}), Vec::Zero(2)), Error);
  EXPECT_THROW(env.Step(Vec::Zero(4), V({INFINITY, 0})), Error);
}

TEST(Step, ArmConservesEnergyWithoutTorque) {
  EnvSpec spec = MakeTask("arm_peg");
  spec.slot.stiffness = 0.0;
  spec.slot.damping = 0.0;
  Environment env(spec);
  Vec x = V({0.3, -1.2, 1.0, -1.0});
  const double e0 = env.KineticEnergy(x);
  for (int t = 0; t < 100; ++t) {
    x = env.Step(x, Vec::Zero(2));
    EXPECT_LT(std::abs(env.KineticEnergy(x) - e0), 0.01 * e0) << "step " << t;
  }
}

TEST(Step, PegIsStoppedByTheSlotBottom) {
  Environment env(MakeTask("point_mass_peg"));
  Vec x = V({0.0, -0.45, 0.0, -1.0});
  for (int t = 0; t < 200; ++t) x = env.Step(x, V({0.0, -1.0}));
  EXPECT_LT(std::abs(x(1) + 0.5), 0.01);
}

TEST(ContactForce, ZeroOutsideTheWalls) {
  Environment env(MakeTask("point_mass_peg"));
  const Vec v = V({0.3, -0.2});
  EXPECT_EQ(env.ContactForce(V({0.5, 0.01}), v).norm(), 0.0);
  EXPECT_EQ(env.ContactForce(V({0.05, -0.3}), v).norm(), 0.0);
  EXPECT_EQ(env.ContactForce(V({-0.059, -0.49}), v).norm(), 0.0);
  EXPECT_GT(env.ContactForce(V({0.3, -0.01}), Vec::Zero(2))(1), 0.0);
  EXPECT_LT(env.ContactForce(V({0.061, -0.3}), Vec::Zero(2))(0), 0.0);
  EXPECT_GT(env.ContactForce(V({0.0, -0.51}), Vec::Zero(2))(1), 0.0);
}

TEST(Cost, AtTargetIsSqrtAlpha) {
  for (const auto& name : TaskNames()) {
    EnvSpec spec = MakeTask(name);
    Environment env(spec);
    Vec x = Vec::Zero(spec.dx);
    if (spec.kind == TaskKind::kArmPeg) {
      // Elbow-down inverse kinematics for the target.
      const Vec p = spec.cost.target - spec.arm.base;
      const double l = spec.arm.l1;
      const double c2 = (p.squaredNorm() - 2 * l * l) / (2 * l * l);
      x(1) = std::acos(c2);
      x(0) = std::atan2(p(1), p(0)) - std::atan2(l * std::sin(x(1)), l + l * c2);
    } else {
      x.head(spec.cost.target.size()) = spec.cost.target;
    }
    ASSERT_LT(env.TargetDistance(x), 1e-12) << name;
    EXPECT_NEAR(env.Cost(x, Vec::Zero(spec.du)).value,
                spec.cost.w_p * std::sqrt(spec.cost.alpha), 1e-12)
        << name;
  }
}

TEST(Cost, DefaultWeights) {
  const EnvSpec spec = MakeTask("point_mass_peg");
  EXPECT_EQ(spec.cost.w_u, 1e-6);
  EXPECT_EQ(spec.cost.w_p, 1.0);
  EXPECT_EQ(spec.cost.alpha, 1e-5);
  EXPECT_EQ(spec.horizon, 100);
  EXPECT_EQ(spec.dt, 0.05);
}

TEST(Cost, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(1);
  for (const auto& name : TaskNames()) {
    const EnvSpec spec = MakeTask(name);
    Environment env(spec);
    const int n = spec.dx + spec.du;
    for (int trial = 0; trial < 20; ++trial) {
      const Vec z = testing::RandomMatrix(n, 1, rng);
      const auto value = [&](const Vec& zz) {
        return env.Cost(zz.head(spec.dx), zz.tail(spec.du)).value;
      };
      const auto grad = [&](const Vec& zz) {
        return env.Cost(zz.head(spec.dx), zz.tail(spec.du)).gradient;
      };
      const CostDerivatives d = env.Cost(z.head(spec.dx), z.tail(spec.du));
      EXPECT_LT(testing::RelativeError(d.gradient, testing::CentralDifference(value, z, 1e-5)),
                1e-5)
          << name;
      EXPECT_LT(testing::RelativeError(d.hessian, testing::CentralJacobian(grad, z, 1e-5)), 1e-5)
          << name;
    }
  }
}

TEST(Observe, StateTasksPassTheStateThrough) {
  for (const char* name : {"point_mass_peg", "arm_peg", "double_integrator"}) {
    const EnvSpec spec = MakeTask(name);
    Environment env(spec);
    EXPECT_EQ(spec.dobs, spec.dx);
    const Vec x = Vec::LinSpaced(spec.dx, 0.1, 0.4);
    EXPECT_EQ(env.Observe(x), x);
  }
}

TEST(Observe, VisionImageAndProprioception) {
  const EnvSpec spec = MakeTask("point_mass_peg_vision");
  Environment env(spec);
  ASSERT_EQ(spec.dobs, 32 * 32 + 4);
  // Tip and goal both at the view center.
  Vec x = Vec::Zero(6);
  x.head(2) = spec.view_center;
  x.tail(2) = spec.view_center - spec.cost.target;
  const Vec o = env.Observe(x);
  ASSERT_EQ(o.size(), spec.dobs);
  const Vec centroid = PixelCentroid(o.head(32 * 32), 32, 32);
  EXPECT_LT(std::abs(centroid(0) - 15.5), 0.5);
  EXPECT_LT(std::abs(centroid(1) - 15.5), 0.5);
  EXPECT_EQ(o.tail(4), x.head(4));
  EXPECT_EQ(env.Observe(x), o);
}

TEST(Render, CenteredBlobHasCenteredCentroid) {
  const Vec img = RenderBlobs({Blob{0.0, 0.0, 1.0}}, 32, 32);
  const Vec c = PixelCentroid(img, 32, 32);
  EXPECT_NEAR(c(0), 15.5, 1e-9);
  EXPECT_NEAR(c(1), 15.5, 1e-9);
  EXPECT_EQ(RenderBlobs({Blob{0.0, 0.0, 1.0}}, 32, 32), img);
}

TEST(Conditions, EquallySpacedTrainingStarts) {
  ConditionLayout layout;
  layout.span = 0.2;
  const auto train = ConditionOffsets(layout, Split::kTrain);
  ASSERT_EQ(train.size(), 4u);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(train[i] - train[i - 1], 0.2 / 3, 1e-15);
  EXPECT_NEAR(train.front(), -0.1, 1e-15);
}

TEST(Conditions, TestSplitIsDisjointAndReproducible) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ConditionLayout layout;
    layout.test_seed = seed;
    const auto train = ConditionOffsets(layout, Split::kTrain);
    const auto test = ConditionOffsets(layout, Split::kTest);
    ASSERT_EQ(test.size(), 4u);
    for (double a : test) {
      EXPECT_LE(std::abs(a), 0.1);
      for (double b : train) EXPECT_NE(a, b);
    }
    EXPECT_EQ(ConditionOffsets(layout, Split::kTest), test);
  }
}

TEST(Conditions, OffsetsMoveAlongTheDirection) {
  Environment env(MakeTask("point_mass_peg"));
  const auto xs = env.InitialConditions(Split::kTrain);
  ASSERT_EQ(xs.size(), 4u);
  EXPECT_NEAR(xs[0](0), 0.15, 1e-15);
  EXPECT_NEAR(xs[3](0), 0.35, 1e-15);
  for (const auto& x : xs) EXPECT_EQ(x.tail(3), V({0.25, 0.0, 0.0}));
}

TEST(InitialController, HoldsTheStartingState) {
  for (const auto& name : TaskNames()) {
    Environment env(MakeTask(name));
    const Vec x1 = env.InitialConditions(Split::kTrain)[1];
    const auto ctl = env.InitialController(x1);
    ASSERT_EQ(ctl.horizon(), env.spec().horizon);
    for (int t = 0; t < ctl.horizon(); ++t) {
      EXPECT_LT(ctl.Mean(t, x1).norm(), 1e-9) << name;
      EXPECT_EQ(ctl.C[t], env.spec().init.variance * Mat::Identity(env.spec().du, env.spec().du));
    }
  }
}

TEST(TaskJson, RoundTripAndValidation) {
  for (const auto& name : TaskNames()) {
    const EnvSpec spec = MakeTask(name);
    const nlohmann::json j = TaskToJson(spec);
    EXPECT_EQ(TaskToJson(TaskFromJson(j)), j);
  }
  EXPECT_THROW(MakeTask("octopus"), UnknownTaskError);
  EXPECT_THROW(TaskFromJson({{"name", "point_mass_peg"}, {"horizon", 1}}), ConfigError);
  EXPECT_THROW(TaskFromJson({{"name", "point_mass_peg"}, {"colour", 1}}), ConfigError);
  EXPECT_THROW(TaskFromJson({{"name", "point_mass_peg"}, {"cost", {{"alpha", 0.0}}}}),
               ConfigError);
  EXPECT_THROW(TaskFromJson({{"name", "point_mass_peg"}, {"dt", "fast"}}), ConfigError);
  const EnvSpec custom =
      TaskFromJson({{"name", "point_mass_peg"}, {"slot", {{"depth", 0.3}}}});
  EXPECT_EQ(custom.cost.target, V({0.0, -0.3}));
}

}  // namespace
}  // namespace gpslab

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

// Built-in tasks: a linear double integrator, a planar point mass inserting
// a peg into a slot, a two-link arm doing the same with its tip, and an
// image-observation variant of the point-mass task.
//
// Slot geometry (task frame): the surface is y = 0, the slot is |x| < w/2
// and its bottom is at y = -depth. The target point is (0, -depth). Walls are
// one-sided spring-dampers acting on the deepest-penetrated face only.

#ifndef GPSLAB_ENVS_H_
#define GPSLAB_ENVS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gpslab/gauss.h"
#include "gpslab/lqr.h"
#include "gpslab/models.h"
#include "gpslab/policy.h"

namespace gpslab {

enum class TaskKind { kDoubleIntegrator, kPointMassPeg, kArmPeg, kPointMassVision };

// l = 1/2 w_u |u|^2 + w_p (1/2 |z|^2 + sqrt(alpha + |z|^2)), z = p(x) - p*.
struct CostParams {
  double w_u = 1e-6;
  double w_p = 1.0;
  double alpha = 1e-5;
  Vec target;  // p*; ignored by tasks whose target lives in the state
};

struct SlotGeometry {
  double slot_width = 0.12;
  double depth = 0.5;
  double stiffness = 1e3;
  double damping = 10.0;
};

struct ArmParams {
  double l1 = 0.7;
  double l2 = 0.7;
  double m1 = 1.0;
  double m2 = 1.0;
  Vec base;  // world position of the shoulder
};

// Condition placement: x_1 = start + offset * direction with offsets spread
// over `span` (equally spaced for train, seeded uniform for test).
struct ConditionLayout {
  int count = 4;
  double span = 0.2;
  Vec start;
  Vec direction;
  int test_count = 4;
  std::uint64_t test_seed = 7;
};

// Initial controller: finite-horizon LQR hold at x_1 on a diagonal mass
// model, plus isotropic action noise.
struct InitParams {
  double variance = 1.0;
  double position_weight = 10.0;
  double velocity_weight = 1.0;
  double action_weight = 1e-2;
};

struct EnvSpec {
  std::string name;
  TaskKind kind = TaskKind::kPointMassPeg;
  int dx = 0;
  int du = 0;
  int dobs = 0;
  int horizon = 100;
  double dt = 0.05;
  int substeps = 10;
  CostParams cost;
  SlotGeometry slot;
  ArmParams arm;
  ConditionLayout conditions;
  InitParams init;
  std::optional<VisionSpec> vision;
  double view_half_extent = 0.8;  // world half-width shown by the camera
  Vec view_center;

  void Validate() const;
};

enum class Split { kTrain, kTest };

std::vector<std::string> TaskNames();
// Throws UnknownTaskError.
EnvSpec MakeTask(const std::string& name);
// Task from a JSON object {"name": ..., optional overrides}; see README for
// the schema. Throws ConfigError / UnknownTaskError.
EnvSpec TaskFromJson(const nlohmann::json& j);
nlohmann::json TaskToJson(const EnvSpec& spec);

// Offsets used for a split; train and test never share a value.
std::vector<double> ConditionOffsets(const ConditionLayout& layout, Split split);

class Environment {
 public:
  explicit Environment(EnvSpec spec);

  const EnvSpec& spec() const { return spec_; }

  // Integrates one control interval. Throws Error on non-finite input or
  // result.
  Vec Step(const Vec& x, const Vec& u) const;
  CostDerivatives Cost(const Vec& x, const Vec& u) const;
  Vec Observe(const Vec& x) const;

  // Peg/end-effector point in the task frame and its residual to the target.
  Vec EndEffector(const Vec& x) const;
  Vec TargetResidual(const Vec& x) const;
  double TargetDistance(const Vec& x) const { return TargetResidual(x).norm(); }

  // Contact force on the end effector at position p moving with velocity v.
  Vec ContactForce(const Vec& p, const Vec& v) const;

  std::vector<Vec> InitialConditions(Split split) const;
  Vec InitialState(double offset) const;

  LinearGaussianController InitialController(const Vec& x1) const;

  // Kinetic energy (arm and point mass); zero for the double integrator.
  double KineticEnergy(const Vec& x) const;

  StageCostFn CostFn() const;

 private:
  Vec Accel(const Vec& x, const Vec& u) const;
  Mat ArmMass(const Vec& q) const;
  Mat ArmJacobian(const Vec& q) const;

  EnvSpec spec_;
};

}  // namespace gpslab

#endif  // GPSLAB_ENVS_H_

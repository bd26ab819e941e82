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

#include "gpslab/envs.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "gpslab/error.h"
#include "gpslab/render.h"

namespace gpslab {
namespace {

Vec Vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Number of position coordinates; velocities follow them in the state.
int PositionDims(TaskKind kind) { return kind == TaskKind::kDoubleIntegrator ? 1 : 2; }

bool AllFinite(const Vec& v) { return v.allFinite(); }

}  // namespace

void EnvSpec::Validate() const {
  if (horizon < 2) throw ConfigError("horizon must be at least 2");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (substeps < 1) throw ConfigError("substeps must be at least 1");
  if (conditions.count < 1) throw ConfigError("conditions.count must be at least 1");
  if (conditions.test_count < 0) throw ConfigError("conditions.test_count must be >= 0");
  if (!(conditions.span >= 0.0)) throw ConfigError("conditions.span must be >= 0");
  if (cost.w_u < 0.0 || cost.w_p < 0.0) throw ConfigError("cost weights must be >= 0");
  if (!(cost.alpha > 0.0)) throw ConfigError("cost.alpha must be positive");
  if (conditions.start.size() != dx || conditions.direction.size() != dx) {
    throw ConfigError("conditions.start and direction must have the state dimension");
  }
  if (!(slot.slot_width > 0.0) || !(slot.depth > 0.0)) {
    throw ConfigError("slot width and depth must be positive");
  }
  if (slot.stiffness < 0.0 || slot.damping < 0.0) {
    throw ConfigError("contact stiffness and damping must be >= 0");
  }
  if (!(init.variance > 0.0)) throw ConfigError("init.variance must be positive");
  if (init.position_weight < 0.0 || init.velocity_weight < 0.0 || !(init.action_weight > 0.0)) {
    throw ConfigError("init weights must be >= 0 (action weight > 0)");
  }
}

std::vector<std::string> TaskNames() {
  return {"double_integrator", "point_mass_peg", "arm_peg", "point_mass_peg_vision"};
}

EnvSpec MakeTask(const std::string& name) {
  EnvSpec s;
  s.name = name;
  if (name == "double_integrator") {
    s.kind = TaskKind::kDoubleIntegrator;
    s.dx = 2;
    s.du = 1;
    s.dobs = 2;
    s.horizon = 40;
    s.dt = 0.1;
    s.substeps = 1;
    s.cost.w_u = 1e-2;
    s.cost.alpha = 1e-2;
    s.cost.target = Vec::Zero(1);
    s.conditions.start = Vec2(1.0, 0.0);
    s.conditions.direction = Vec2(1.0, 0.0);
    s.init.position_weight = 1.0;
    s.init.velocity_weight = 1.0;
    s.init.action_weight = 1.0;
  } else if (name == "point_mass_peg" || name == "point_mass_peg_vision") {
    const bool vision = name == "point_mass_peg_vision";
    s.kind = vision ? TaskKind::kPointMassVision : TaskKind::kPointMassPeg;
    s.dx = vision ? 6 : 4;
    s.du = 2;
    s.cost.target = Vec2(0.0, -s.slot.depth);
    s.conditions.start = Vec::Zero(s.dx);
    s.conditions.direction = Vec::Zero(s.dx);
    s.conditions.start.head(2) = Vec2(0.25, 0.25);
    if (vision) {
      // The hole moves; the start stays put.
      s.conditions.direction(4) = -1.0;
      s.vision = VisionSpec{};
      s.view_center = Vec2(0.1, -0.15);
      s.dobs = s.vision->height * s.vision->width + 4;
    } else {
      s.conditions.direction(0) = 1.0;
      s.dobs = 4;
    }
  } else if (name == "arm_peg") {
    s.kind = TaskKind::kArmPeg;
    s.dx = 4;
    s.du = 2;
    s.dobs = 4;
    s.cost.target = Vec2(0.0, -s.slot.depth);
    s.arm.base = Vec2(0.0, 0.7);
    s.conditions.start = Vec::Zero(4);
    // End effector near (0.25, 0.25), clear of the surface like the point mass.
    s.conditions.start.head(2) = Vec2(0.13, -2.39);
    s.conditions.direction = Vec::Zero(4);
    s.conditions.direction(0) = 1.0;
    s.init.variance = 10.0;
    // Semi-implicit Euler drifts in energy to first order when the inertia
    // depends on the configuration.
    s.substeps = 20;
  } else {
    throw UnknownTaskError("unknown task '" + name + "'");
  }
  if (s.arm.base.size() == 0) s.arm.base = Vec2(0.0, 0.7);
  if (s.view_center.size() == 0) s.view_center = Vec2(0.0, 0.0);
  s.Validate();
  return s;
}

namespace {

template <typename T>
void Take(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

void TakeVec(const nlohmann::json& obj, const char* key, Vec& out, const std::string& where) {
  if (!obj.contains(key)) return;
  std::vector<double> v;
  Take(obj, key, v, where);
  out = Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size()));
}

void RejectUnknown(const nlohmann::json& obj, const std::set<std::string>& allowed,
                   const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown field " + where + "." + item.key());
    }
  }
}

std::vector<double> ToStd(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

EnvSpec TaskFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("task must be an object");
  if (!j.contains("name")) throw ConfigError("task.name is required");
  if (!j.at("name").is_string()) throw ConfigError("task.name must be a string");
  RejectUnknown(j, {"name", "horizon", "dt", "substeps", "cost", "slot", "conditions", "init"},
                "task");
  EnvSpec s = MakeTask(j.at("name").get<std::string>());
  Take(j, "horizon", s.horizon, "task");
  Take(j, "dt", s.dt, "task");
  Take(j, "substeps", s.substeps, "task");
  bool target_given = false;
  if (j.contains("cost")) {
    const auto& c = j.at("cost");
    RejectUnknown(c, {"w_u", "w_p", "alpha", "target"}, "task.cost");
    Take(c, "w_u", s.cost.w_u, "task.cost");
    Take(c, "w_p", s.cost.w_p, "task.cost");
    Take(c, "alpha", s.cost.alpha, "task.cost");
    target_given = c.contains("target");
    TakeVec(c, "target", s.cost.target, "task.cost");
  }
  if (j.contains("slot")) {
    const auto& c = j.at("slot");
    RejectUnknown(c, {"slot_width", "depth", "stiffness", "damping"}, "task.slot");
    Take(c, "slot_width", s.slot.slot_width, "task.slot");
    Take(c, "depth", s.slot.depth, "task.slot");
    Take(c, "stiffness", s.slot.stiffness, "task.slot");
    Take(c, "damping", s.slot.damping, "task.slot");
    if (!target_given && s.kind != TaskKind::kDoubleIntegrator) {
      s.cost.target = Vec2(0.0, -s.slot.depth);
    }
  }
  if (j.contains("conditions")) {
    const auto& c = j.at("conditions");
    RejectUnknown(c, {"count", "span", "start", "direction", "test_count", "test_seed"},
                  "task.conditions");
    Take(c, "count", s.conditions.count, "task.conditions");
    Take(c, "span", s.conditions.span, "task.conditions");
    TakeVec(c, "start", s.conditions.start, "task.conditions");
    TakeVec(c, "direction", s.conditions.direction, "task.conditions");
    Take(c, "test_count", s.conditions.test_count, "task.conditions");
    Take(c, "test_seed", s.conditions.test_seed, "task.conditions");
  }
  if (j.contains("init")) {
    const auto& c = j.at("init");
    RejectUnknown(c, {"variance", "position_weight", "velocity_weight", "action_weight"},
                  "task.init");
    Take(c, "variance", s.init.variance, "task.init");
    Take(c, "position_weight", s.init.position_weight, "task.init");
    Take(c, "velocity_weight", s.init.velocity_weight, "task.init");
    Take(c, "action_weight", s.init.action_weight, "task.init");
  }
  if (s.cost.target.size() != PositionDims(s.kind)) {
    throw ConfigError("task.cost.target has the wrong dimension");
  }
  s.Validate();
  return s;
}

nlohmann::json TaskToJson(const EnvSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["horizon"] = s.horizon;
  j["dt"] = s.dt;
  j["substeps"] = s.substeps;
  j["cost"] = {{"w_u", s.cost.w_u},
               {"w_p", s.cost.w_p},
               {"alpha", s.cost.alpha},
               {"target", ToStd(s.cost.target)}};
  j["slot"] = {{"slot_width", s.slot.slot_width},
               {"depth", s.slot.depth},
               {"stiffness", s.slot.stiffness},
               {"damping", s.slot.damping}};
  j["conditions"] = {{"count", s.conditions.count},
                     {"span", s.conditions.span},
                     {"start", ToStd(s.conditions.start)},
                     {"direction", ToStd(s.conditions.direction)},
                     {"test_count", s.conditions.test_count},
                     {"test_seed", s.conditions.test_seed}};
  j["init"] = {{"variance", s.init.variance},
               {"position_weight", s.init.position_weight},
               {"velocity_weight", s.init.velocity_weight},
               {"action_weight", s.init.action_weight}};
  return j;
}

std::vector<double> ConditionOffsets(const ConditionLayout& layout, Split split) {
  std::vector<double> train;
  for (int i = 0; i < layout.count; ++i) {
    train.push_back(layout.count == 1
                        ? 0.0
                        : -0.5 * layout.span + layout.span * i / (layout.count - 1));
  }
  if (split == Split::kTrain) return train;
  std::vector<double> test;
  std::mt19937_64 rng(layout.test_seed);
  std::uniform_real_distribution<double> u(-0.5 * layout.span, 0.5 * layout.span);
  const double gap = 1e-3 * std::max(layout.span, 1e-3);
  int attempts = 0;
  while (static_cast<int>(test.size()) < layout.test_count) {
    if (++attempts > 100000) throw ConfigError("cannot place disjoint test conditions");
    const double o = u(rng);
    auto near = [&](double v) { return std::abs(v - o) < gap; };
    if (std::any_of(train.begin(), train.end(), near) ||
        std::any_of(test.begin(), test.end(), near)) {
      continue;
    }
    test.push_back(o);
  }
  return test;
}

// ---------------------------------------------------------------------------

Environment::Environment(EnvSpec spec) : spec_(std::move(spec)) { spec_.Validate(); }

Vec Environment::InitialState(double offset) const {
  return spec_.conditions.start + offset * spec_.conditions.direction;
}

std::vector<Vec> Environment::InitialConditions(Split split) const {
  std::vector<Vec> out;
  for (double o : ConditionOffsets(spec_.conditions, split)) out.push_back(InitialState(o));
  return out;
}

Mat Environment::ArmMass(const Vec& q) const {
  const auto& a = spec_.arm;
  const double c2 = std::cos(q(1));
  Mat m(2, 2);
  m(0, 0) = (a.m1 + a.m2) * a.l1 * a.l1 + a.m2 * a.l2 * a.l2 + 2.0 * a.m2 * a.l1 * a.l2 * c2;
  m(0, 1) = m(1, 0) = a.m2 * a.l2 * a.l2 + a.m2 * a.l1 * a.l2 * c2;
  m(1, 1) = a.m2 * a.l2 * a.l2;
  return m;
}

Mat Environment::ArmJacobian(const Vec& q) const {
  const auto& a = spec_.arm;
  const double s1 = std::sin(q(0)), c1 = std::cos(q(0));
  const double s12 = std::sin(q(0) + q(1)), c12 = std::cos(q(0) + q(1));
  Mat j(2, 2);
  j << -a.l1 * s1 - a.l2 * s12, -a.l2 * s12, a.l1 * c1 + a.l2 * c12, a.l2 * c12;
  return j;
}

Vec Environment::EndEffector(const Vec& x) const {
  switch (spec_.kind) {
    case TaskKind::kDoubleIntegrator:
      return x.head(1);
    case TaskKind::kPointMassPeg:
      return x.head(2);
    case TaskKind::kPointMassVision:
      return x.head(2) - x.tail(2);
    case TaskKind::kArmPeg: {
      const auto& a = spec_.arm;
      return a.base + Vec2(a.l1 * std::cos(x(0)) + a.l2 * std::cos(x(0) + x(1)),
                           a.l1 * std::sin(x(0)) + a.l2 * std::sin(x(0) + x(1)));
    }
  }
  return {};
}

Vec Environment::TargetResidual(const Vec& x) const {
  return EndEffector(x) - spec_.cost.target;
}

Vec Environment::ContactForce(const Vec& p, const Vec& v) const {
  Vec force = Vec::Zero(2);
  if (spec_.kind == TaskKind::kDoubleIntegrator || p(1) >= 0.0) return force;
  const auto& g = spec_.slot;
  const double half = 0.5 * g.slot_width;
  const double ax = std::abs(p(0));
  double pen = 0.0;
  Vec normal = Vec::Zero(2);
  if (ax < half) {
    if (p(1) < -g.depth) {
      pen = -g.depth - p(1);
      normal << 0.0, 1.0;
    }
  } else {
    // Inside the block beside the slot: push out through the nearest face.
    const double pen_top = -p(1);
    const double pen_side = ax - half;
    if (pen_top <= pen_side) {
      pen = pen_top;
      normal << 0.0, 1.0;
    } else {
      pen = pen_side;
      normal << (p(0) > 0.0 ? -1.0 : 1.0), 0.0;
    }
  }
  if (pen <= 0.0) return force;
  const double magnitude = std::max(0.0, g.stiffness * pen - g.damping * v.dot(normal));
  return magnitude * normal;
}

Vec Environment::Accel(const Vec& x, const Vec& u) const {
  switch (spec_.kind) {
    case TaskKind::kDoubleIntegrator:
      return u;
    case TaskKind::kPointMassPeg:
      return u + ContactForce(x.head(2), x.segment(2, 2));
    case TaskKind::kPointMassVision:
      return u + ContactForce(x.head(2) - x.tail(2), x.segment(2, 2));
    case TaskKind::kArmPeg: {
      const auto& a = spec_.arm;
      const Vec q = x.head(2), dq = x.segment(2, 2);
      const Mat jac = ArmJacobian(q);
      const double h = a.m2 * a.l1 * a.l2 * std::sin(q(1));
      const Vec coriolis = Vec2(-h * (2.0 * dq(0) * dq(1) + dq(1) * dq(1)), h * dq(0) * dq(0));
      const Vec tau = u + jac.transpose() * ContactForce(EndEffector(x), jac * dq) - coriolis;
      return ArmMass(q).llt().solve(tau);
    }
  }
  return {};
}

Vec Environment::Step(const Vec& x, const Vec& u) const {
  if (x.size() != spec_.dx || u.size() != spec_.du) {
    throw DimensionError("state or action dimension does not match the task");
  }
  if (!AllFinite(x) || !AllFinite(u)) throw Error("non-finite state or action");
  const int np = PositionDims(spec_.kind);
  const double h = spec_.dt / spec_.substeps;
  Vec next = x;
  if (spec_.kind == TaskKind::kDoubleIntegrator) {
    // Constant acceleration over the interval integrates exactly.
    for (int s = 0; s < spec_.substeps; ++s) {
      next.head(np) += h * next.segment(np, np) + 0.5 * h * h * u;
      next.segment(np, np) += h * u;
    }
  } else {
    for (int s = 0; s < spec_.substeps; ++s) {
      const Vec acc = Accel(next, u);
      next.segment(np, np) += h * acc;
      next.head(np) += h * next.segment(np, np);
    }
  }
  if (!AllFinite(next)) throw Error("simulation produced a non-finite state");
  return next;
}

CostDerivatives Environment::Cost(const Vec& x, const Vec& u) const {
  const auto& c = spec_.cost;
  const int dx = spec_.dx, du = spec_.du;
  const Vec z = TargetResidual(x);
  const int nz = static_cast<int>(z.size());
  const double s = std::sqrt(c.alpha + z.squaredNorm());
  const Vec dz = z + z / s;
  const Mat hz = Mat::Identity(nz, nz) * (1.0 + 1.0 / s) - z * z.transpose() / (s * s * s);

  // dz/dx and, for the arm, the curvature of the forward kinematics.
  Mat jz = Mat::Zero(nz, dx);
  Mat curvature = Mat::Zero(dx, dx);
  switch (spec_.kind) {
    case TaskKind::kDoubleIntegrator:
    case TaskKind::kPointMassPeg:
      jz.leftCols(nz).setIdentity();
      break;
    case TaskKind::kPointMassVision:
      jz.leftCols(2).setIdentity();
      jz.rightCols(2) = -Mat::Identity(2, 2);
      break;
    case TaskKind::kArmPeg: {
      const auto& a = spec_.arm;
      jz.leftCols(2) = ArmJacobian(x.head(2));
      const double c1 = std::cos(x(0)), s1 = std::sin(x(0));
      const double c12 = std::cos(x(0) + x(1)), s12 = std::sin(x(0) + x(1));
      Mat hx(2, 2), hy(2, 2);
      hx << -a.l1 * c1 - a.l2 * c12, -a.l2 * c12, -a.l2 * c12, -a.l2 * c12;
      hy << -a.l1 * s1 - a.l2 * s12, -a.l2 * s12, -a.l2 * s12, -a.l2 * s12;
      curvature.topLeftCorner(2, 2) = dz(0) * hx + dz(1) * hy;
      break;
    }
  }

  CostDerivatives out;
  out.value = 0.5 * c.w_u * u.squaredNorm() + c.w_p * (0.5 * z.squaredNorm() + s);
  out.gradient = Vec::Zero(dx + du);
  out.gradient.head(dx) = c.w_p * jz.transpose() * dz;
  out.gradient.tail(du) = c.w_u * u;
  out.hessian = Mat::Zero(dx + du, dx + du);
  out.hessian.topLeftCorner(dx, dx) = c.w_p * (jz.transpose() * hz * jz + curvature);
  out.hessian.bottomRightCorner(du, du) = c.w_u * Mat::Identity(du, du);
  return out;
}

StageCostFn Environment::CostFn() const {
  return [this](int, const Vec& x, const Vec& u) { return Cost(x, u); };
}

Vec Environment::Observe(const Vec& x) const {
  if (spec_.kind != TaskKind::kPointMassVision) return x;
  const auto& v = *spec_.vision;
  auto to_grid = [&](const Vec& world) {
    return Vec((world - spec_.view_center) / spec_.view_half_extent);
  };
  const Vec hole = x.tail(2);
  const Vec tip = to_grid(x.head(2));
  const Vec goal = to_grid(hole + spec_.cost.target);
  const Vec image = RenderBlobs({Blob{tip(0), tip(1), 1.0}, Blob{goal(0), goal(1), 0.5}},
                                v.height, v.width);
  Vec obs(spec_.dobs);
  obs << image, x.head(4);
  return obs;
}

double Environment::KineticEnergy(const Vec& x) const {
  switch (spec_.kind) {
    case TaskKind::kDoubleIntegrator:
      return 0.0;
    case TaskKind::kPointMassPeg:
    case TaskKind::kPointMassVision:
      return 0.5 * x.segment(2, 2).squaredNorm();
    case TaskKind::kArmPeg: {
      const Vec dq = x.segment(2, 2);
      return 0.5 * dq.dot(ArmMass(x.head(2)) * dq);
    }
  }
  return 0.0;
}

LinearGaussianController Environment::InitialController(const Vec& x1) const {
  const int dx = spec_.dx, du = spec_.du, T = spec_.horizon;
  const int np = PositionDims(spec_.kind);
  Vec mass = Vec::Ones(np);
  if (spec_.kind == TaskKind::kArmPeg) mass = ArmMass(x1.head(2)).diagonal();

  DynamicsStep step;
  step.fx = Mat::Identity(dx, dx);
  step.fu = Mat::Zero(dx, du);
  step.fc = Vec::Zero(dx);
  step.F = Mat::Zero(dx, dx);
  for (int i = 0; i < np; ++i) {
    const double dt = spec_.dt;
    step.fx(i, np + i) = dt;
    step.fu(np + i, i) = dt / mass(i);
    step.fu(i, i) = dt * dt / mass(i);
  }
  LinearGaussianDynamics dyn;
  dyn.steps.assign(T - 1, step);

  Mat h = Mat::Zero(dx + du, dx + du);
  Vec anchor = Vec::Zero(dx + du);
  for (int i = 0; i < np; ++i) {
    h(i, i) = spec_.init.position_weight;
    h(np + i, np + i) = spec_.init.velocity_weight;
    anchor(i) = x1(i);
  }
  h.bottomRightCorner(du, du) = spec_.init.action_weight * Mat::Identity(du, du);
  QuadraticCostExpansion cost = QuadraticCostExpansion::Zeros(T, dx, du);
  for (int t = 0; t < T; ++t) {
    cost.hessian[t] = h;
    cost.gradient[t] = -h * anchor;
  }
  LinearGaussianController ctl = BackwardPass(cost, dyn).controller;
  for (auto& c : ctl.C) c = spec_.init.variance * Mat::Identity(du, du);
  return ctl;
}

}  // namespace gpslab

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

#include "gpslab/gps.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gpslab/error.h"
#include "gpslab/lqr.h"
#include "gpslab/parallel.h"
#include "gpslab/render.h"

namespace gpslab {
namespace {

// Stream tags for DeriveSeed.
constexpr std::uint64_t kTagPolicyInit = 0x706f6c69;
constexpr std::uint64_t kTagDynamicsGmm = 0x64796e67;
constexpr std::uint64_t kTagPolicyGmm = 0x706f6c67;
constexpr std::uint64_t kTagTraining = 0x7472616e;
constexpr std::uint64_t kTagPose = 0x706f7365;

Vec PolicyInput(const TrajectorySample& s, int t, bool uses_state) {
  return uses_state ? Vec(s.states.row(t).transpose()) : Vec(s.observations.row(t).transpose());
}

double GaussianKl(const Vec& mp, const Mat& cp, const Vec& mq, const Mat& prec_q,
                  double logdet_q) {
  const Vec d = mq - mp;
  return 0.5 * ((prec_q * cp).trace() - static_cast<double>(mp.size()) + d.dot(prec_q * d) +
                logdet_q - SpdLogDet(cp));
}

GaussianPolicy MakePolicy(const GpsConfig& config, const Environment& env, bool uses_state,
                          std::uint64_t seed) {
  const EnvSpec& spec = env.spec();
  PolicyArchitecture arch;
  arch.action_dim = spec.du;
  arch.hidden = config.hidden;
  arch.activation = config.activation;
  if (uses_state) {
    arch.obs_dim = spec.dx;
  } else {
    arch.obs_dim = spec.dobs;
    arch.vision = spec.vision;
  }
  GaussianPolicy policy(arch);
  policy.InitRandom(seed);
  return policy;
}

// Replaces the front-end with one trained on rendered blob images.
void PretrainFrontEnd(GaussianPolicy& policy, const GpsConfig& config) {
  const auto& arch = policy.architecture();
  if (!arch.vision || !config.pose_pretrain) return;
  const auto& pc = *config.pose_pretrain;
  const PoseDataset data = MakePoseDataset(pc.images, DeriveSeed(config.seed, kTagPose),
                                           arch.vision->height, arch.vision->width);
  PoseTrainOptions train = pc.train;
  train.seed = DeriveSeed(config.seed, kTagPose, 1);
  *policy.front_end() = PretrainPose(*arch.vision, data, train);
}

}  // namespace

void GpsConfig::Validate() const {
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (samples_per_condition < 1) throw ConfigError("samples_per_condition must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(nu_init >= kNuMin && nu_init <= kNuMax)) {
    throw ConfigError("nu_init must lie in [1e-4, 1e4]");
  }
  if (inner_passes < 1) throw ConfigError("inner_passes must be >= 1");
  if (policy_steps < 0) throw ConfigError("policy_steps must be >= 0");
  if (sgd.batch_size < 1 || !(sgd.learning_rate > 0.0) || sgd.momentum < 0.0 ||
      sgd.momentum >= 1.0) {
    throw ConfigError("invalid SGD settings");
  }
  if (hidden.empty() || std::any_of(hidden.begin(), hidden.end(), [](int h) { return h < 1; })) {
    throw ConfigError("network hidden sizes must be positive (at least one layer)");
  }
  if (history_iterations < 0) throw ConfigError("history_iterations must be >= 0");
  if (replay_window < 1) throw ConfigError("replay_window must be >= 1");
  if (!(initial_state_variance > 0.0)) throw ConfigError("initial_state_variance must be > 0");
  if (pretrain_iterations < 0) throw ConfigError("pretrain_iterations must be >= 0");
  if (head_only_steps < 0) throw ConfigError("head_only_steps must be >= 0");
  if (pose_pretrain && pose_pretrain->images < 200) {
    throw ConfigError("pose pretraining needs at least 200 images");
  }
  if (!(kl_step.eta_min > 0.0) || !(kl_step.eta_max > kl_step.eta_min)) {
    throw ConfigError("invalid eta range");
  }
}

std::vector<TrajectorySample> SampleRollouts(const Environment& env,
                                             std::span<const LinearGaussianController> controllers,
                                             std::span<const Vec> initial_states, int count,
                                             std::uint64_t seed, int iteration) {
  const EnvSpec& spec = env.spec();
  const int conditions = static_cast<int>(controllers.size());
  if (static_cast<int>(initial_states.size()) != conditions) {
    throw DimensionError("one initial state per controller is required");
  }
  for (const auto& c : controllers) {
    if (c.horizon() != spec.horizon) throw DimensionError("controller horizon != task horizon");
  }
  std::vector<TrajectorySample> out(static_cast<std::size_t>(conditions) * count);
  ParallelFor(conditions * count, [&](int idx) {
    const int i = idx / count, j = idx % count;
    const LinearGaussianController& ctl = controllers[i];
    std::mt19937_64 rng(DeriveSeed(seed, iteration, i, j));
    std::normal_distribution<double> normal;
    TrajectorySample s;
    s.condition = i;
    s.iteration = iteration;
    s.states.resize(spec.horizon, spec.dx);
    s.actions.resize(spec.horizon, spec.du);
    s.observations.resize(spec.horizon, spec.dobs);
    s.costs.resize(spec.horizon);
    Vec x = initial_states[i];
    for (int t = 0; t < spec.horizon; ++t) {
      Vec noise(spec.du);
      for (int d = 0; d < spec.du; ++d) noise(d) = normal(rng);
      const Eigen::LLT<Mat> llt(ctl.C[t]);
      const Vec u = ctl.Mean(t, x) + Mat(llt.matrixL()) * noise;
      s.states.row(t) = x.transpose();
      s.actions.row(t) = u.transpose();
      s.observations.row(t) = env.Observe(x).transpose();
      s.costs(t) = env.Cost(x, u).value;
      if (t + 1 < spec.horizon) {
        try {
          x = env.Step(x, u);
        } catch (const Error& e) {
          throw Error("rollout aborted (condition " + std::to_string(i) + ", sample " +
                      std::to_string(j) + ", step " + std::to_string(t) + "): " + e.what());
        }
      }
    }
    out[idx] = std::move(s);
  });
  return out;
}

namespace {

template <typename ActionFn>
TrajectorySample RunMean(const Environment& env, const Vec& x1, int condition, ActionFn action) {
  const EnvSpec& spec = env.spec();
  TrajectorySample s;
  s.condition = condition;
  s.states.resize(spec.horizon, spec.dx);
  s.actions.resize(spec.horizon, spec.du);
  s.observations.resize(spec.horizon, spec.dobs);
  s.costs.resize(spec.horizon);
  Vec x = x1;
  for (int t = 0; t < spec.horizon; ++t) {
    const Vec o = env.Observe(x);
    const Vec u = action(t, x, o);
    s.states.row(t) = x.transpose();
    s.actions.row(t) = u.transpose();
    s.observations.row(t) = o.transpose();
    s.costs(t) = env.Cost(x, u).value;
    if (t + 1 < spec.horizon) x = env.Step(x, u);
  }
  return s;
}

}  // namespace

TrajectorySample RunPolicyMean(const Environment& env, const GaussianPolicy& policy,
                               bool uses_state, const Vec& x1, int condition) {
  return RunMean(env, x1, condition, [&](int, const Vec& x, const Vec& o) {
    return policy.Mean(uses_state ? x : o);
  });
}

TrajectorySample RunControllerMean(const Environment& env,
                                   const LinearGaussianController& controller, const Vec& x1,
                                   int condition) {
  return RunMean(env, x1, condition,
                 [&](int t, const Vec& x, const Vec&) { return controller.Mean(t, x); });
}

PolicyEvaluation EvaluatePolicy(const Environment& env, const GaussianPolicy& policy,
                                bool uses_state, std::span<const Vec> initial_states) {
  PolicyEvaluation ev;
  const int n = static_cast<int>(initial_states.size());
  ev.final_distance.assign(n, 0.0);
  ev.total_cost.assign(n, 0.0);
  ParallelFor(n, [&](int i) {
    const TrajectorySample s = RunPolicyMean(env, policy, uses_state, initial_states[i], i);
    ev.final_distance[i] = env.TargetDistance(s.states.bottomRows(1).transpose());
    ev.total_cost[i] = s.total_cost();
  });
  if (n > 0) {
    ev.mean_distance = std::accumulate(ev.final_distance.begin(), ev.final_distance.end(), 0.0) / n;
    ev.mean_cost = std::accumulate(ev.total_cost.begin(), ev.total_cost.end(), 0.0) / n;
  }
  return ev;
}

void UpdateLambda(std::vector<Vec>& lambda, const std::vector<double>& nu, double alpha,
                  const std::vector<Vec>& policy_mean, const std::vector<Vec>& controller_mean) {
  if (nu.size() != lambda.size() || policy_mean.size() != lambda.size() ||
      controller_mean.size() != lambda.size()) {
    throw DimensionError("lambda update needs one entry per timestep");
  }
  for (std::size_t t = 0; t < lambda.size(); ++t) {
    lambda[t] += alpha * nu[t] * (policy_mean[t] - controller_mean[t]);
  }
}

std::vector<double> ScheduleNu(const std::vector<double>& nu, const std::vector<double>& kl) {
  if (nu.size() != kl.size()) throw DimensionError("nu and KL profiles differ in length");
  const double n = static_cast<double>(kl.size());
  const double mean = std::accumulate(kl.begin(), kl.end(), 0.0) / n;
  double var = 0.0;
  for (double k : kl) var += (k - mean) * (k - mean);
  const double std_dev = std::sqrt(var / n);
  std::vector<double> out = nu;
  for (std::size_t t = 0; t < kl.size(); ++t) {
    if (kl[t] > mean) {
      out[t] *= 2.0;
    } else if (std_dev > 0.0 && kl[t] <= mean - 2.0 * std_dev) {
      out[t] *= 0.5;
    }
    out[t] = std::clamp(out[t], kNuMin, kNuMax);
  }
  return out;
}

std::vector<double> PolicyKlProfile(const LinearGaussianController& controller,
                                    const GaussianPolicy& policy, bool uses_state,
                                    std::span<const TrajectorySample> samples) {
  const int T = controller.horizon();
  std::vector<double> kl(T, 0.0);
  if (samples.empty()) return kl;
  const Mat prec = SpdInverse(policy.sigma());
  const double logdet = SpdLogDet(policy.sigma());
  for (const auto& s : samples) {
    for (int t = 0; t < T; ++t) {
      const Vec x = s.states.row(t).transpose();
      kl[t] += GaussianKl(controller.Mean(t, x), controller.C[t],
                          policy.Mean(PolicyInput(s, t, uses_state)), prec, logdet);
    }
  }
  for (double& k : kl) k /= static_cast<double>(samples.size());
  return kl;
}

GpsState InitGps(const GpsConfig& config, const Environment& env) {
  config.Validate();
  const EnvSpec& spec = env.spec();
  GpsState state;
  state.initial_states = env.InitialConditions(Split::kTrain);
  for (const Vec& x1 : state.initial_states) {
    state.controllers.push_back(env.InitialController(x1));
  }
  state.policy_uses_state = spec.vision.has_value() && config.pretrain_iterations > 0;
  state.policy = MakePolicy(config, env, state.policy_uses_state,
                            DeriveSeed(config.seed, kTagPolicyInit));
  if (!state.policy_uses_state && config.pose_pretrain && spec.vision) {
    PretrainFrontEnd(state.policy, config);
    state.front_end_pretrained = true;
  }
  state.policy.set_sigma(UpdateSigma(state.controllers));
  const int conditions = static_cast<int>(state.initial_states.size());
  state.lambda.assign(conditions, std::vector<Vec>(spec.horizon, Vec::Zero(spec.du)));
  state.nu.assign(conditions, std::vector<double>(spec.horizon, config.nu_init));
  state.replay = ReplayBuffer(config.replay_window);
  state.trainer = PolicyTrainer(config.sgd);
  return state;
}

IterationMetrics OuterIteration(GpsState& state, const Environment& env,
                                const GpsConfig& config) {
  const EnvSpec& spec = env.spec();
  const int T = spec.horizon, dx = spec.dx, du = spec.du;
  const int conditions = static_cast<int>(state.initial_states.size());
  const int n = config.samples_per_condition;
  const int k = ++state.iteration;

  // Hand over from the state-input pretraining policy to the observation policy.
  if (state.policy_uses_state && k > config.pretrain_iterations) {
    state.policy = MakePolicy(config, env, false, DeriveSeed(config.seed, kTagPolicyInit, 1));
    if (config.pose_pretrain) {
      PretrainFrontEnd(state.policy, config);
      state.front_end_pretrained = true;
    }
    state.policy.set_sigma(UpdateSigma(state.controllers));
    state.policy_uses_state = false;
    state.replay = ReplayBuffer(config.replay_window);
    state.trainer.ResetMomentum();
    state.policy_steps_taken = 0;
  }
  const bool uses_state = state.policy_uses_state;

  std::vector<TrajectorySample> samples = SampleRollouts(
      env, state.controllers, state.initial_states, n, config.seed, k);
  state.total_samples += static_cast<long>(samples.size());
  std::vector<std::vector<TrajectorySample>> by_condition(conditions);
  for (const auto& s : samples) by_condition[s.condition].push_back(s);

  state.archive.push_back(samples);
  while (static_cast<int>(state.archive.size()) > config.history_iterations + 1) {
    state.archive.pop_front();
  }

  // Dynamics: GMM prior over the archive window, per-step fits on this batch.
  std::vector<TrajectorySample> window;
  for (const auto& batch : state.archive) window.insert(window.end(), batch.begin(), batch.end());
  const Mat tuples = AllTransitionTuples(window);
  const GaussianMixture dyn_gmm =
      FitGmm(tuples, ChooseK(tuples.rows()), DeriveSeed(config.seed, k, kTagDynamicsGmm),
             config.gmm);
  std::vector<LinearGaussianDynamics> dynamics(conditions);
  if (config.shared_dynamics) {
    const LinearGaussianDynamics shared = FitSharedDynamics(samples, &dyn_gmm, config.fit);
    dynamics.assign(conditions, shared);
  } else {
    ParallelFor(conditions, [&](int i) {
      dynamics[i] = FitDynamics(by_condition[i], &dyn_gmm, config.fit);
    });
  }

  // Cost expansions around this iteration's samples.
  std::vector<QuadraticCostExpansion> costs(conditions);
  const StageCostFn cost_fn = env.CostFn();
  ParallelFor(conditions, [&](int i) {
    std::vector<const Mat*> xs, us;
    for (const auto& s : by_condition[i]) {
      xs.push_back(&s.states);
      us.push_back(&s.actions);
    }
    costs[i] = QuadratizeAverage(cost_fn, xs, us);
  });

  std::vector<Gaussian> x0(conditions);
  for (int i = 0; i < conditions; ++i) {
    x0[i].mean = state.initial_states[i];
    x0[i].covariance = config.initial_state_variance * Mat::Identity(dx, dx);
  }

  auto state_marginals = [&](const std::vector<LinearGaussianController>& ctls) {
    std::vector<std::vector<Gaussian>> out(conditions);
    ParallelFor(conditions, [&](int i) {
      for (const Gaussian& g : ForwardPass(ctls[i], dynamics[i], x0[i])) {
        out[i].push_back({g.mean.head(dx), g.covariance.topLeftCorner(dx, dx)});
      }
    });
    return out;
  };

  // The sampling controllers anchor the KL step for the whole iteration.
  const std::vector<LinearGaussianController> previous = state.controllers;
  {
    const auto origin = state_marginals(previous);
    for (const auto& s : samples) {
      for (int t = 0; t < T; ++t) {
        state.replay.Add({PolicyInput(s, t, uses_state), s.states.row(t).transpose(), t,
                          s.condition, k, origin[s.condition][t]});
      }
    }
    state.replay.Prune(k);
  }
  {
    std::vector<Vec> inputs;
    inputs.reserve(state.replay.tuples().size());
    for (const auto& r : state.replay.tuples()) inputs.push_back(r.observation);
    FitInputNormalization(state.policy, inputs);
    state.trainer.ResetMomentum();
  }

  std::vector<StepResult> steps(conditions);
  std::mt19937_64 train_rng(DeriveSeed(config.seed, k, kTagTraining));
  for (int pass = 0; pass < config.inner_passes; ++pass) {
    // Linearize the policy around the sampled states.
    std::vector<std::vector<Mat>> means(conditions, std::vector<Mat>(T, Mat(n, du)));
    Mat joint(static_cast<long>(samples.size()) * T, dx + du);
    {
      long row = 0;
      for (int i = 0; i < conditions; ++i) {
        for (int j = 0; j < n; ++j) {
          const TrajectorySample& s = by_condition[i][j];
          for (int t = 0; t < T; ++t) {
            const Vec mu = state.policy.Mean(PolicyInput(s, t, uses_state));
            means[i][t].row(j) = mu.transpose();
            joint.row(row).head(dx) = s.states.row(t);
            joint.row(row).tail(du) = mu.transpose();
            ++row;
          }
        }
      }
    }
    const GaussianMixture policy_gmm = FitGmm(
        joint, ChooseK(joint.rows()), DeriveSeed(config.seed, k, kTagPolicyGmm, pass), config.gmm);
    std::vector<LinearizedPolicy> linearized(conditions);
    ParallelFor(conditions, [&](int i) {
      LinearizedPolicy& lp = linearized[i];
      for (int t = 0; t < T; ++t) {
        Mat xs(n, dx);
        for (int j = 0; j < n; ++j) xs.row(j) = by_condition[i][j].states.row(t);
        const LinearGaussianConditional c =
            LinearizePolicyStep(xs, means[i][t], state.policy.sigma(), &policy_gmm, config.fit);
        lp.K.push_back(c.gain);
        lp.k.push_back(c.offset);
        lp.C.push_back(c.covariance);
      }
    });

    ParallelFor(conditions, [&](int i) {
      KlStepProblem problem;
      problem.cost = &costs[i];
      problem.lambda = &state.lambda[i];
      problem.nu = &state.nu[i];
      problem.linearized_policy = &linearized[i];
      problem.previous = &previous[i];
      problem.dynamics = &dynamics[i];
      problem.initial_state = x0[i];
      problem.epsilon = config.epsilon;
      steps[i] = KlStep(problem, config.kl_step);
    });
    for (int i = 0; i < conditions; ++i) state.controllers[i] = steps[i].controller;

    if (config.policy_steps > 0) {
      const auto marginals = state_marginals(state.controllers);
      const MarginalLookup lookup = [&](int c, int t) -> const Gaussian& {
        return marginals[c][t];
      };
      int remaining = config.policy_steps;
      if (state.front_end_pretrained && state.policy_steps_taken < config.head_only_steps) {
        const int frozen = std::min<long>(remaining, config.head_only_steps - state.policy_steps_taken);
        state.trainer.Train(state.policy, state.replay, state.controllers, state.lambda, lookup,
                            train_rng, frozen, true);
        remaining -= frozen;
        state.policy_steps_taken += frozen;
      }
      state.trainer.Train(state.policy, state.replay, state.controllers, state.lambda, lookup,
                          train_rng, remaining, false);
      state.policy_steps_taken += remaining;
    }
    state.policy.set_sigma(UpdateSigma(state.controllers));
  }

  // Multipliers, from this iteration's sampled states.
  IterationMetrics m;
  m.method = "gps";
  m.task = spec.name;
  m.horizon = T;
  m.iteration = k;
  m.total_samples = state.total_samples;
  for (int i = 0; i < conditions; ++i) {
    std::vector<Vec> pi_mean(T, Vec::Zero(du)), p_mean(T, Vec::Zero(du));
    for (const auto& s : by_condition[i]) {
      for (int t = 0; t < T; ++t) {
        pi_mean[t] += state.policy.Mean(PolicyInput(s, t, uses_state)) / n;
        p_mean[t] += state.controllers[i].Mean(t, s.states.row(t).transpose()) / n;
      }
    }
    UpdateLambda(state.lambda[i], state.nu[i], config.alpha, pi_mean, p_mean);
    const std::vector<double> profile =
        PolicyKlProfile(state.controllers[i], state.policy, uses_state, by_condition[i]);
    state.nu[i] = ScheduleNu(state.nu[i], profile);

    m.kl.push_back(std::accumulate(profile.begin(), profile.end(), 0.0));
    double lambda_sq = 0.0;
    for (const Vec& l : state.lambda[i]) lambda_sq += l.squaredNorm();
    m.lambda_norm.push_back(std::sqrt(lambda_sq));
    m.nu.push_back(state.nu[i]);
    m.step_status.emplace_back(StepStatusName(steps[i].status));
    m.eta.push_back(steps[i].eta);
  }
  m.stalled = std::all_of(steps.begin(), steps.end(), [](const StepResult& r) {
    return r.status == StepStatus::kStepRejected;
  });

  double cost_sum = 0.0, dist_sum = 0.0;
  for (const auto& s : samples) {
    cost_sum += s.total_cost();
    dist_sum += env.TargetDistance(s.states.bottomRows(1).transpose());
  }
  m.mean_cost = cost_sum / static_cast<double>(samples.size());
  m.sample_distance = dist_sum / static_cast<double>(samples.size());
  const PolicyEvaluation ev =
      EvaluatePolicy(env, state.policy, uses_state, state.initial_states);
  m.target_distance = ev.mean_distance;
  m.policy_cost = ev.mean_cost;
  return m;
}

GpsResult RunGps(const GpsConfig& config, const Environment& env,
                 const IterationCallback& on_iteration) {
  GpsResult result{InitGps(config, env), {}};
  const int total = config.iterations + (result.state.policy_uses_state ? config.pretrain_iterations : 0);
  for (int k = 0; k < total; ++k) {
    result.metrics.push_back(OuterIteration(result.state, env, config));
    if (on_iteration) on_iteration(result.metrics.back(), result.state);
  }
  return result;
}

}  // namespace gpslab

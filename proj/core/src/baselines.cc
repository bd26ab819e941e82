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

#include "gpslab/baselines.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "gpslab/error.h"
#include "gpslab/gps.h"
#include "gpslab/parallel.h"

namespace gpslab {

ParamDistribution WeightedRefit(const Mat& params, const Vec& weights) {
  if (params.rows() != weights.size() || params.rows() == 0) {
    throw DimensionError("one weight per parameter sample is required");
  }
  const Vec w = weights / weights.sum();
  ParamDistribution d;
  d.mean = Vec::Zero(params.cols());
  for (long s = 0; s < params.rows(); ++s) d.mean += w(s) * params.row(s).transpose();
  d.variance = Vec::Zero(params.cols());
  for (long s = 0; s < params.rows(); ++s) {
    d.variance += w(s) * (params.row(s).transpose() - d.mean).array().square().matrix();
  }
  d.variance = d.variance.cwiseMax(kParamVarianceFloor);
  return d;
}

Vec EliteWeights(const Vec& costs, double elite_fraction) {
  const long n = costs.size();
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(),
                   [&](long a, long b) { return costs(a) < costs(b); });
  const long elites =
      std::clamp(static_cast<long>(std::ceil(elite_fraction * n - 1e-12)), 1L, n);
  Vec w = Vec::Zero(n);
  for (long e = 0; e < elites; ++e) w(order[e]) = 1.0;
  return w / static_cast<double>(elites);
}

ParamDistribution CemUpdate(const ParamDistribution&, const Mat& params, const Vec& costs,
                            double elite_fraction) {
  if (params.rows() < 2) throw InsufficientDataError("CEM needs at least 2 samples");
  if (!(elite_fraction > 0.0 && elite_fraction <= 1.0)) {
    throw ConfigError("elite fraction must lie in (0, 1]");
  }
  return WeightedRefit(params, EliteWeights(costs, elite_fraction));
}

Vec RwrWeights(const Vec& costs, double beta) {
  const double best = costs.minCoeff();
  Vec w(costs.size());
  for (long s = 0; s < costs.size(); ++s) w(s) = std::exp(-beta * (costs(s) - best));
  return w / w.sum();
}

double AutoTemperature(const Vec& costs) {
  std::vector<double> c(costs.data(), costs.data() + costs.size());
  auto mid = c.begin() + c.size() / 2;
  std::nth_element(c.begin(), mid, c.end());
  const double gap = *mid - costs.minCoeff();
  return gap > 0.0 ? 1.0 / gap : 0.0;
}

ParamDistribution RwrUpdate(const ParamDistribution&, const Mat& params, const Vec& costs,
                            double beta) {
  if (!(beta >= 0.0)) throw ConfigError("RWR temperature must be >= 0");
  return WeightedRefit(params, RwrWeights(costs, beta));
}

Vec FlattenController(const LinearGaussianController& c) {
  const int T = c.horizon(), dx = c.dx(), du = c.du();
  Vec theta(static_cast<long>(T) * du * (dx + 1));
  long o = 0;
  for (int t = 0; t < T; ++t) {
    Eigen::Map<Mat>(theta.data() + o, du, dx) = c.K[t];
    o += du * dx;
    theta.segment(o, du) = c.k[t];
    o += du;
  }
  return theta;
}

LinearGaussianController UnflattenController(const Vec& theta, int horizon, int dx, int du,
                                             double variance) {
  if (theta.size() != static_cast<long>(horizon) * du * (dx + 1)) {
    throw DimensionError("parameter vector does not match the controller shape");
  }
  LinearGaussianController c = LinearGaussianController::Zeros(horizon, dx, du, variance);
  long o = 0;
  for (int t = 0; t < horizon; ++t) {
    c.K[t] = Eigen::Map<const Mat>(theta.data() + o, du, dx);
    o += du * dx;
    c.k[t] = theta.segment(o, du);
    o += du;
  }
  return c;
}

std::string BaselineMethodName(BaselineMethod m) {
  return m == BaselineMethod::kCem ? "cem" : "rwr";
}

void BaselineConfig::Validate() const {
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (samples_per_iteration < 2) throw ConfigError("baselines need >= 2 samples per iteration");
  if (!(elite_fraction > 0.0 && elite_fraction <= 1.0)) {
    throw ConfigError("elite_fraction must lie in (0, 1]");
  }
  if (!(gain_variance > 0.0)) throw ConfigError("gain_variance must be positive");
}

BaselineResult RunBaseline(const BaselineConfig& config, const Environment& env) {
  config.Validate();
  const EnvSpec& spec = env.spec();
  const int T = spec.horizon, dx = spec.dx, du = spec.du;
  const std::vector<Vec> starts = env.InitialConditions(Split::kTrain);
  const int conditions = static_cast<int>(starts.size());

  // Start from the initial controller of the middle condition.
  const LinearGaussianController init = env.InitialController(starts[conditions / 2]);
  ParamDistribution dist;
  dist.mean = FlattenController(init);
  dist.variance = Vec::Constant(dist.mean.size(), config.gain_variance);
  const double offset_var = config.offset_variance > 0.0 ? config.offset_variance
                                                         : spec.init.variance;
  for (int t = 0; t < T; ++t) {
    dist.variance.segment(static_cast<long>(t) * du * (dx + 1) + du * dx, du).setConstant(offset_var);
  }

  BaselineResult result;
  const int n = config.samples_per_iteration;
  long total = 0;
  for (int k = 1; k <= config.iterations; ++k) {
    Mat params(n, dist.mean.size());
    {
      std::mt19937_64 rng(DeriveSeed(config.seed, k));
      std::normal_distribution<double> normal;
      for (int s = 0; s < n; ++s) {
        for (long p = 0; p < params.cols(); ++p) {
          params(s, p) = dist.mean(p) + std::sqrt(dist.variance(p)) * normal(rng);
        }
      }
    }
    Vec costs(n), distances(n);
    ParallelFor(n, [&](int s) {
      const LinearGaussianController c =
          UnflattenController(params.row(s).transpose(), T, dx, du, 1.0);
      const int cond = s % conditions;
      try {
        const TrajectorySample traj = RunControllerMean(env, c, starts[cond], cond);
        costs(s) = traj.total_cost();
        distances(s) = env.TargetDistance(traj.states.bottomRows(1).transpose());
      } catch (const Error&) {
        costs(s) = std::numeric_limits<double>::max();
        distances(s) = std::numeric_limits<double>::max();
      }
    });
    total += n;

    if (config.method == BaselineMethod::kCem) {
      dist = CemUpdate(dist, params, costs, config.elite_fraction);
    } else {
      const double beta = config.beta >= 0.0 ? config.beta : AutoTemperature(costs);
      dist = RwrUpdate(dist, params, costs, beta);
    }

    IterationMetrics m;
    m.method = BaselineMethodName(config.method);
    m.task = spec.name;
    m.horizon = T;
    m.iteration = k;
    m.total_samples = total;
    m.mean_cost = costs.mean();
    m.sample_distance = distances.mean();
    const LinearGaussianController mean_ctl = UnflattenController(dist.mean, T, dx, du, 1.0);
    double d_sum = 0.0, c_sum = 0.0;
    for (int i = 0; i < conditions; ++i) {
      try {
        const TrajectorySample traj = RunControllerMean(env, mean_ctl, starts[i], i);
        d_sum += env.TargetDistance(traj.states.bottomRows(1).transpose());
        c_sum += traj.total_cost();
      } catch (const Error&) {
        d_sum += std::numeric_limits<double>::max() / (2 * conditions);
        c_sum += std::numeric_limits<double>::max() / (2 * conditions);
      }
    }
    m.target_distance = d_sum / conditions;
    m.policy_cost = c_sum / conditions;
    result.metrics.push_back(m);
  }
  result.distribution = dist;
  result.mean_controller = UnflattenController(dist.mean, T, dx, du, offset_var);
  return result;
}

std::vector<SweepEntry> SweepEliteFraction(const BaselineConfig& base, const Environment& env,
                                           const std::vector<double>& fractions) {
  std::vector<SweepEntry> out;
  for (double f : fractions) {
    BaselineConfig c = base;
    c.method = BaselineMethod::kCem;
    c.elite_fraction = f;
    const BaselineResult r = RunBaseline(c, env);
    SweepEntry e;
    e.elite_fraction = f;
    if (!r.metrics.empty()) {
      e.final_distance = r.metrics.back().target_distance;
      e.final_cost = r.metrics.back().policy_cost;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace gpslab

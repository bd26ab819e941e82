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

#include "gpslab/trajopt.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "gpslab/error.h"

namespace gpslab {

QuadraticCostExpansion NegLogLikelihoodExpansion(const LinearGaussianController& law) {
  const int horizon = law.horizon();
  const int dx = law.dx();
  const int du = law.du();
  QuadraticCostExpansion e = QuadraticCostExpansion::Zeros(horizon, dx, du);
  for (int t = 0; t < horizon; ++t) {
    const Mat prec = SpdInverse(law.C[t]);
    // residual = A z - k with A = [-K, I]
    Mat a(du, dx + du);
    a << -law.K[t], Mat::Identity(du, du);
    e.hessian[t] = Symmetrize(a.transpose() * prec * a);
    e.gradient[t] = -a.transpose() * (prec * law.k[t]);
    e.constant[t] = 0.5 * law.k[t].dot(prec * law.k[t]) +
                    0.5 * (SpdLogDet(law.C[t]) + du * std::log(2.0 * std::numbers::pi));
  }
  return e;
}

SurrogateCost BuildSurrogate(const QuadraticCostExpansion& cost,
                             const std::vector<Vec>& lambda, const std::vector<double>& nu,
                             const LinearizedPolicy* linearized_policy,
                             const LinearGaussianController& previous, double eta) {
  const int horizon = cost.horizon();
  const int dx = cost.dx;
  if (static_cast<int>(lambda.size()) != horizon || static_cast<int>(nu.size()) != horizon ||
      previous.horizon() != horizon ||
      (linearized_policy != nullptr && linearized_policy->horizon() != horizon)) {
    throw DimensionError("surrogate inputs must share the cost horizon");
  }
  if (!(eta >= 0.0)) throw DimensionError("eta must be non-negative");

  const QuadraticCostExpansion prev_nll = NegLogLikelihoodExpansion(previous);
  std::optional<QuadraticCostExpansion> pol_nll;
  if (linearized_policy != nullptr) pol_nll = NegLogLikelihoodExpansion(*linearized_policy);

  SurrogateCost out;
  out.eta = eta;
  out.nu = nu;
  out.expansion = cost;
  QuadraticCostExpansion& e = out.expansion;
  for (int t = 0; t < horizon; ++t) {
    const double denom = eta + nu[t];
    if (!(denom > 0.0)) throw DimensionError("eta + nu_t must be positive");
    e.gradient[t].tail(cost.du) -= lambda[t];
    if (pol_nll) {
      e.hessian[t] += nu[t] * pol_nll->hessian[t];
      e.gradient[t] += nu[t] * pol_nll->gradient[t];
      e.constant[t] += nu[t] * pol_nll->constant[t];
    }
    e.hessian[t] /= denom;
    e.gradient[t] /= denom;
    e.constant[t] /= denom;
    const double w = eta / denom;
    e.hessian[t] += w * prev_nll.hessian[t];
    e.gradient[t] += w * prev_nll.gradient[t];
    e.constant[t] += w * prev_nll.constant[t];
  }
  (void)dx;
  return out;
}

TrajectoryKl TrajKl(const LinearGaussianController& p, const LinearGaussianController& phat,
                    const LinearGaussianDynamics& dynamics, const Gaussian& initial_state) {
  if (p.horizon() != phat.horizon()) throw DimensionError("controllers differ in horizon");
  const int dx = p.dx();
  const int du = p.du();
  const std::vector<Gaussian> marg = ForwardPass(p, dynamics, initial_state);
  TrajectoryKl out;
  out.per_step.resize(p.horizon());
  for (int t = 0; t < p.horizon(); ++t) {
    const Mat prec_hat = SpdInverse(phat.C[t]);
    const Vec mu_x = marg[t].mean.head(dx);
    const Mat sigma_x = marg[t].covariance.topLeftCorner(dx, dx);
    const Mat dK = p.K[t] - phat.K[t];
    const Vec dmean = dK * mu_x + (p.k[t] - phat.k[t]);
    const double quad = dmean.dot(prec_hat * dmean) +
                        (dK.transpose() * prec_hat * dK).cwiseProduct(sigma_x).sum();
    const double kl = 0.5 * ((prec_hat * p.C[t]).trace() - du + SpdLogDet(phat.C[t]) -
                             SpdLogDet(p.C[t]) + quad);
    out.per_step[t] = kl > 0.0 ? kl : 0.0;
    out.total += out.per_step[t];
  }
  return out;
}

double SurrogateObjective(const LinearGaussianController& p, const SurrogateCost& surrogate,
                          const LinearGaussianDynamics& dynamics, const Gaussian& initial_state) {
  const std::vector<Gaussian> marg = ForwardPass(p, dynamics, initial_state);
  double value = ExpectedCost(surrogate.expansion, marg);
  const int du = p.du();
  for (int t = 0; t < p.horizon(); ++t) {
    value -= 0.5 * (SpdLogDet(p.C[t]) + du * std::log(2.0 * std::numbers::pi * std::numbers::e));
  }
  return value;
}

std::string_view StepStatusName(StepStatus status) {
  switch (status) {
    case StepStatus::kUnconstrained:
      return "unconstrained";
    case StepStatus::kConstrainedOptimum:
      return "constrained-optimum";
    case StepStatus::kStepRejected:
      return "step-rejected";
  }
  return "unknown";
}

namespace {

struct Trial {
  LinearGaussianController controller;
  TrajectoryKl kl;
  bool ok = false;
};

Trial Solve(const KlStepProblem& pr, double eta) {
  Trial trial;
  try {
    const SurrogateCost s =
        BuildSurrogate(*pr.cost, *pr.lambda, *pr.nu, pr.linearized_policy, *pr.previous, eta);
    trial.controller = BackwardPass(s.expansion, *pr.dynamics).controller;
    trial.kl = TrajKl(trial.controller, *pr.previous, *pr.dynamics, pr.initial_state);
    trial.ok = std::isfinite(trial.kl.total);
  } catch (const BackwardPassError&) {
    trial.ok = false;
  } catch (const RegularizationError&) {
    trial.ok = false;
  }
  if (!trial.ok) trial.kl.total = std::numeric_limits<double>::infinity();
  return trial;
}

}  // namespace

StepResult KlStep(const KlStepProblem& pr, const KlStepOptions& options) {
  if (pr.cost == nullptr || pr.lambda == nullptr || pr.nu == nullptr || pr.previous == nullptr ||
      pr.dynamics == nullptr) {
    throw DimensionError("KL step problem is missing inputs");
  }
  if (!(pr.epsilon > 0.0)) throw DimensionError("KL step size epsilon must be positive");

  StepResult result;
  Trial low = Solve(pr, options.eta_min);
  if (low.ok && low.kl.total <= pr.epsilon) {
    result.controller = std::move(low.controller);
    result.kl = std::move(low.kl);
    result.eta = options.eta_min;
    result.status = StepStatus::kUnconstrained;
    return result;
  }
  Trial high = Solve(pr, options.eta_max);
  if (!high.ok || high.kl.total > pr.epsilon) {
    result.controller = *pr.previous;
    result.kl = TrajKl(*pr.previous, *pr.previous, *pr.dynamics, pr.initial_state);
    result.eta = options.eta_max;
    result.status = StepStatus::kStepRejected;
    return result;
  }

  double log_lo = std::log(options.eta_min);  // infeasible side
  double log_hi = std::log(options.eta_max);  // feasible side
  double eta_hi = options.eta_max;
  Trial best = std::move(high);
  int iter = 0;
  while (iter < options.max_iterations) {
    ++iter;
    const double log_mid = 0.5 * (log_lo + log_hi);
    const double eta = std::exp(log_mid);
    Trial mid = Solve(pr, eta);
    if (mid.ok && std::abs(mid.kl.total - pr.epsilon) <= options.kl_tolerance * pr.epsilon) {
      best = std::move(mid);
      eta_hi = eta;
      break;
    }
    if (!mid.ok || mid.kl.total > pr.epsilon) {
      log_lo = log_mid;
    } else {
      log_hi = log_mid;
      eta_hi = eta;
      best = std::move(mid);
    }
  }
  result.controller = std::move(best.controller);
  result.kl = std::move(best.kl);
  result.eta = eta_hi;
  result.iterations = iter;
  result.status = StepStatus::kConstrainedOptimum;
  return result;
}

}  // namespace gpslab

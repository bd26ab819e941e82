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

// Quadratic cost expansions, the maximum-entropy LQR backward recursion and
// the forward propagation of Gaussian state-action marginals.

#ifndef GPSLAB_LQR_H_
#define GPSLAB_LQR_H_

#include <functional>
#include <vector>

#include "gpslab/gauss.h"
#include "gpslab/models.h"

namespace gpslab {

// Value, gradient and Hessian of a stage cost with respect to z = [x; u].
struct CostDerivatives {
  double value = 0.0;
  Vec gradient;
  Mat hessian;
};

using StageCostFn = std::function<CostDerivatives(int t, const Vec& x, const Vec& u)>;

// Per-step quadratic 1/2 z^T H z + z^T g + c in zero-centered coordinates.
struct QuadraticCostExpansion {
  std::vector<Mat> hessian;
  std::vector<Vec> gradient;
  std::vector<double> constant;
  int dx = 0;
  int du = 0;

  int horizon() const { return static_cast<int>(hessian.size()); }
  double Evaluate(int t, const Vec& z) const {
    return 0.5 * z.dot(hessian[t] * z) + z.dot(gradient[t]) + constant[t];
  }
  // E[cost] under N(mean, cov) over z at step t.
  double Expected(int t, const Gaussian& z) const;

  static QuadraticCostExpansion Zeros(int horizon, int dx, int du);
  QuadraticCostExpansion& operator+=(const QuadraticCostExpansion& other);
  QuadraticCostExpansion& operator*=(double scale);
};

struct ValueRecursion {
  std::vector<Mat> vxx;
  std::vector<Vec> vx;
  std::vector<Mat> qzz;
  std::vector<Vec> qz;
  // Levenberg shift that was added to Q_uu at each step (0 when none).
  std::vector<double> shift;
};

struct BackwardPassResult {
  LinearGaussianController controller;
  ValueRecursion recursion;
};

// Expands `cost` around (states.row(t), actions.row(t)) for every t and
// recenters it around zero. Throws ExpansionError naming the first step with
// a non-finite derivative.
QuadraticCostExpansion Quadratize(const StageCostFn& cost, const Mat& states,
                                  const Mat& actions);

// Average of the zero-centered expansions taken around several trajectories.
QuadraticCostExpansion QuadratizeAverage(const StageCostFn& cost,
                                         const std::vector<const Mat*>& states,
                                         const std::vector<const Mat*>& actions);

// Maximum-entropy LQR: K_t = -Q_uu^-1 Q_ux, k_t = -Q_uu^-1 Q_u, C_t = Q_uu^-1.
// `dynamics` covers T-1 steps; the last step has no carry-over.
BackwardPassResult BackwardPass(const QuadraticCostExpansion& cost,
                                const LinearGaussianDynamics& dynamics);

// Gaussian marginals over [x_t; u_t] for t in [0, T).
std::vector<Gaussian> ForwardPass(const LinearGaussianController& controller,
                                  const LinearGaussianDynamics& dynamics,
                                  const Gaussian& initial_state);

// Sum over t of E[cost_t] under the marginals.
double ExpectedCost(const QuadraticCostExpansion& cost, const std::vector<Gaussian>& marginals);

}  // namespace gpslab

#endif  // GPSLAB_LQR_H_

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


// Reference computations used to check the library from the outside. Nothing
// here calls into the code under test except for plain value types.

#ifndef GPSLAB_TESTS_SUPPORT_ORACLES_H_
#define GPSLAB_TESTS_SUPPORT_ORACLES_H_

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "gpslab/gauss.h"
#include "gpslab/lqr.h"
#include "gpslab/models.h"

namespace gpslab::testing {

// |a - b| / max(|a|, |b|, floor)
double RelativeError(double a, double b, double floor = 1e-8);
// Frobenius-norm version of the above.
double RelativeError(const Mat& a, const Mat& b, double floor = 1e-8);

Vec CentralDifference(const std::function<double(const Vec&)>& f, const Vec& x,
                      double h = 1e-6);
Mat CentralJacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-6);

Mat RandomSpd(int d, std::mt19937_64& rng, double min_eig = 0.2);
Mat RandomMatrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0);

// Draws `n` rows from N(mean, cov).
Mat SampleGaussian(const Gaussian& g, int n, std::mt19937_64& rng);

// log N(x; mean, cov) written out with an explicit inverse and determinant.
double GaussianLogPdf(const Vec& x, const Vec& mean, const Mat& cov);

// A time-varying linear system with a convex quadratic stage cost.
struct LqInstance {
  int dx = 0;
  int du = 0;
  int horizon = 0;
  std::vector<Mat> A;  // T-1 steps
  std::vector<Mat> B;
  std::vector<Vec> c;
  std::vector<Mat> H;  // T stages, over [x; u]
  std::vector<Vec> g;
};

LqInstance RandomLq(int dx, int du, int horizon, std::mt19937_64& rng);
QuadraticCostExpansion ToExpansion(const LqInstance& lq);
LinearGaussianDynamics ToDynamics(const LqInstance& lq, double noise = 0.0);

// A KL-step problem around a random linear-Gaussian controller. The stage
// cost pulls away from that controller, so small steps are constrained.
struct KlInstance {
  LqInstance lq;
  LinearGaussianController previous;
  Gaussian initial_state;
  std::vector<Vec> lambda;
  std::vector<double> nu;
};
KlInstance RandomKlInstance(int dx, int du, int horizon, std::mt19937_64& rng);

// Feedback law obtained by minimizing the open-loop action sequence from
// step t onwards for every start state (normal equations of the stacked
// problem). Returns the affine map u_t*(x_t) = K_t x_t + k_t for every t.
struct AffineLaw {
  std::vector<Mat> K;
  std::vector<Vec> k;
};
AffineLaw BruteForceLqr(const LqInstance& lq);

// Minimum over open-loop actions of
//   sum_t 1/2 w_u u_t^2 + w_p (1/2 p_t^2 + sqrt(alpha + p_t^2))
// for the scalar double integrator started at (p0, v0). Newton's method with
// backtracking on the stacked action vector.
double DoubleIntegratorOptimum(double p0, double v0, int horizon, double dt, double w_u,
                               double w_p, double alpha);

}  // namespace gpslab::testing

#endif  // GPSLAB_TESTS_SUPPORT_ORACLES_H_

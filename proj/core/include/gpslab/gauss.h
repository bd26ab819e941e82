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

// Multivariate Gaussian primitives: conditioning, KL divergence and the
// normal-inverse-Wishart MAP estimate used by the local model fits.

#ifndef GPSLAB_GAUSS_H_
#define GPSLAB_GAUSS_H_

#include <Eigen/Dense>

namespace gpslab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Gaussian {
  Vec mean;
  Mat covariance;

  int dim() const { return static_cast<int>(mean.size()); }
};

// y | x ~ N(gain * x + offset, covariance)
struct LinearGaussianConditional {
  Mat gain;
  Vec offset;
  Mat covariance;
};

// Normal-inverse-Wishart hyperparameters (Phi, mu0, m, n0).
struct NiwPrior {
  Mat phi;
  Vec mu0;
  double m = 1.0;
  double n0 = 1.0;

  // Throws ConfigError when the invariants do not hold.
  void Validate() const;
};

// Which formula niw_map uses for the posterior mean.
enum class NiwMeanRule {
  // mu = (m mu0 + n0 mu_hat) / (m + n0), as printed in the source method.
  kPrinted,
  // mu = (m mu0 + N mu_hat) / (m + N), the conjugate posterior mean.
  kConjugate,
};

// Symmetrizes `a` and, while its Cholesky factorization fails, adds eps*I
// with eps = 1e-6 * trace/d (1e-6 when the trace is not positive), growing
// eps tenfold per retry. Throws RegularizationError after 12 retries or on
// non-finite input.
Mat RegularizeCovariance(const Mat& a);

// Conditional of the trailing block b given the leading block a, where
// a = joint[0:split_index). Gain = S_ba S_aa^-1, offset = mu_b - gain mu_a,
// covariance = Schur complement (symmetrized, regularized if needed).
LinearGaussianConditional Condition(const Gaussian& joint, int split_index);

// Closed-form KL(p || q). Throws DimensionError on mismatch.
double KlDivergence(const Gaussian& p, const Gaussian& q);

// MAP estimate of a Gaussian given empirical moments of n samples and a NIW
// prior. The covariance is regularized to be positive definite.
Gaussian NiwMap(const Vec& empirical_mean, const Mat& empirical_cov, double n,
                const NiwPrior& prior,
                NiwMeanRule rule = NiwMeanRule::kPrinted);

// log N(x; mean, cov)
double LogDensity(const Gaussian& g, const Vec& x);

// Empirical mean and (biased, 1/N) covariance of the rows of `data`.
Gaussian EmpiricalMoments(const Mat& data);

inline Mat Symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

// Inverse of a symmetric positive-definite matrix through its Cholesky factor.
Mat SpdInverse(const Mat& a);

// log-determinant of a symmetric positive-definite matrix.
double SpdLogDet(const Mat& a);

}  // namespace gpslab

#endif  // GPSLAB_GAUSS_H_

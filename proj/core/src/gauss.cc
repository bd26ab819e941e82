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

#include "gpslab/gauss.h"

#include <cmath>
#include <numbers>
#include <string>

#include "gpslab/error.h"

namespace gpslab {
namespace {

bool AllFinite(const Mat& a) { return a.allFinite(); }

}  // namespace

void NiwPrior::Validate() const {
  if (phi.rows() != phi.cols() || phi.rows() != mu0.size()) {
    throw ConfigError("NIW prior: Phi must be d x d with d = dim(mu0)");
  }
  if (!(m > 0.0) || !(n0 > 0.0)) {
    throw ConfigError("NIW prior: pseudo-counts m and n0 must be positive");
  }
  if (!phi.isApprox(phi.transpose(), 1e-9 * (1.0 + phi.norm()))) {
    throw ConfigError("NIW prior: Phi must be symmetric");
  }
}

Mat RegularizeCovariance(const Mat& a) {
  if (a.rows() != a.cols()) throw DimensionError("covariance must be square");
  if (!AllFinite(a)) throw RegularizationError("covariance has non-finite entries");
  Mat s = Symmetrize(a);
  const int d = static_cast<int>(s.rows());
  if (d == 0) return s;
  Eigen::LLT<Mat> llt(s);
  if (llt.info() == Eigen::Success) return s;

  const double mean_diag = s.trace() / d;
  double eps = mean_diag > 0.0 ? 1e-6 * mean_diag : 1e-6;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Mat r = s;
    r.diagonal().array() += eps;
    llt.compute(r);
    if (llt.info() == Eigen::Success) return r;
    eps *= 10.0;
  }
  throw RegularizationError("covariance could not be regularized to positive definite");
}

Mat SpdInverse(const Mat& a) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) {
    throw RegularizationError("matrix is not positive definite");
  }
  return Symmetrize(llt.solve(Mat::Identity(a.rows(), a.cols())));
}

double SpdLogDet(const Mat& a) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) {
    throw RegularizationError("matrix is not positive definite");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

LinearGaussianConditional Condition(const Gaussian& joint, int split_index) {
  const int d = joint.dim();
  if (joint.covariance.rows() != d || joint.covariance.cols() != d) {
    throw DimensionError("joint covariance does not match mean");
  }
  if (split_index <= 0 || split_index >= d) {
    throw DimensionError("split index must lie strictly inside the joint");
  }
  const int na = split_index;
  const int nb = d - split_index;
  const Mat sigma = Symmetrize(joint.covariance);
  const Mat saa = RegularizeCovariance(sigma.topLeftCorner(na, na));
  const Mat sba = sigma.bottomLeftCorner(nb, na);
  const Mat sbb = sigma.bottomRightCorner(nb, nb);

  Eigen::LLT<Mat> llt(saa);
  LinearGaussianConditional out;
  // gain = S_ba S_aa^-1  <=>  S_aa gain^T = S_ab
  out.gain = llt.solve(sba.transpose()).transpose();
  out.offset = joint.mean.tail(nb) - out.gain * joint.mean.head(na);
  out.covariance = RegularizeCovariance(sbb - out.gain * sba.transpose());
  return out;
}

double KlDivergence(const Gaussian& p, const Gaussian& q) {
  const int d = p.dim();
  if (q.dim() != d || p.covariance.rows() != d || q.covariance.rows() != d) {
    throw DimensionError("KL divergence between Gaussians of different dimension");
  }
  Eigen::LLT<Mat> lq(q.covariance);
  if (lq.info() != Eigen::Success) throw RegularizationError("q covariance not PD");
  const Vec diff = q.mean - p.mean;
  const double trace_term = lq.solve(p.covariance).trace();
  const double mahal = diff.dot(lq.solve(diff));
  const double logdet_q = 2.0 * lq.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_p = SpdLogDet(p.covariance);
  const double kl = 0.5 * (trace_term + mahal - d + logdet_q - logdet_p);
  // Cancellation can leave a tiny negative residue.
  return kl > 0.0 ? kl : 0.0;
}

Gaussian NiwMap(const Vec& empirical_mean, const Mat& empirical_cov, double n,
                const NiwPrior& prior, NiwMeanRule rule) {
  prior.Validate();
  const int d = static_cast<int>(empirical_mean.size());
  if (prior.mu0.size() != d || empirical_cov.rows() != d || empirical_cov.cols() != d) {
    throw DimensionError("NIW MAP: prior and empirical moments differ in dimension");
  }
  if (!(n >= 1.0)) throw InsufficientDataError("NIW MAP needs at least one sample");

  const Vec delta = empirical_mean - prior.mu0;
  Mat sigma = prior.phi + n * empirical_cov +
              (n * prior.m / (n + prior.m)) * delta * delta.transpose();
  sigma /= (n + prior.n0);

  Gaussian out;
  switch (rule) {
    case NiwMeanRule::kPrinted:
      out.mean = (prior.m * prior.mu0 + prior.n0 * empirical_mean) / (prior.m + prior.n0);
      break;
    case NiwMeanRule::kConjugate:
      out.mean = (prior.m * prior.mu0 + n * empirical_mean) / (prior.m + n);
      break;
  }
  out.covariance = RegularizeCovariance(sigma);
  return out;
}

double LogDensity(const Gaussian& g, const Vec& x) {
  const int d = g.dim();
  if (x.size() != d) throw DimensionError("log density: point dimension mismatch");
  Eigen::LLT<Mat> llt(g.covariance);
  if (llt.info() != Eigen::Success) throw RegularizationError("covariance not PD");
  const Vec z = llt.matrixL().solve(x - g.mean);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (z.squaredNorm() + logdet + d * std::log(2.0 * std::numbers::pi));
}

Gaussian EmpiricalMoments(const Mat& data) {
  if (data.rows() == 0) throw InsufficientDataError("empirical moments of an empty set");
  Gaussian g;
  g.mean = data.colwise().mean().transpose();
  const Mat centered = data.rowwise() - g.mean.transpose();
  g.covariance = Symmetrize(centered.transpose() * centered / static_cast<double>(data.rows()));
  return g;
}

}  // namespace gpslab

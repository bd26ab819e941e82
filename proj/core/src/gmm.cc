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

#include "gpslab/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "gpslab/error.h"

namespace gpslab {
namespace {

// Per-component cached Cholesky factors for log-density evaluation.
struct ComponentCache {
  Eigen::LLT<Mat> llt;
  double log_norm = 0.0;  // -0.5 (d log 2pi + log|S|)
};

std::vector<ComponentCache> BuildCaches(const GaussianMixture& gmm) {
  std::vector<ComponentCache> caches(gmm.components.size());
  for (std::size_t k = 0; k < caches.size(); ++k) {
    const Gaussian& g = gmm.components[k];
    caches[k].llt.compute(g.covariance);
    if (caches[k].llt.info() != Eigen::Success) {
      throw RegularizationError("mixture component covariance is not PD");
    }
    const double logdet =
        2.0 * caches[k].llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    caches[k].log_norm = -0.5 * (g.dim() * std::log(2.0 * std::numbers::pi) + logdet);
  }
  return caches;
}

// log(w_k) + log N(x_n | mu_k, S_k) for all n, k.
Mat LogJoint(const GaussianMixture& gmm, const std::vector<ComponentCache>& caches,
             const Mat& data) {
  const int n = static_cast<int>(data.rows());
  const int k_count = gmm.size();
  Mat out(n, k_count);
  for (int k = 0; k < k_count; ++k) {
    const Gaussian& g = gmm.components[k];
    const Mat centered = (data.rowwise() - g.mean.transpose()).transpose();
    const Mat z = caches[k].llt.matrixL().solve(centered);
    const double log_w = gmm.weights(k) > 0.0 ? std::log(gmm.weights(k))
                                              : -std::numeric_limits<double>::infinity();
    out.col(k) = (log_w + caches[k].log_norm) - 0.5 * z.colwise().squaredNorm().array();
  }
  return out;
}

// Row-wise log-sum-exp; writes normalized responsibilities into `resp`.
Vec NormalizeRows(const Mat& log_joint, Mat* resp) {
  const int n = static_cast<int>(log_joint.rows());
  Vec lse(n);
  resp->resize(log_joint.rows(), log_joint.cols());
  for (int i = 0; i < n; ++i) {
    const double mx = log_joint.row(i).maxCoeff();
    const auto shifted = (log_joint.row(i).array() - mx).exp();
    const double s = shifted.sum();
    lse(i) = mx + std::log(s);
    resp->row(i) = shifted / s;
  }
  return lse;
}

// k-means++ seeding of component means.
std::vector<int> KmeansPlusPlus(const Mat& data, int k, std::mt19937_64& rng) {
  const int n = static_cast<int>(data.rows());
  std::vector<int> centers;
  centers.reserve(k);
  std::uniform_int_distribution<int> pick(0, n - 1);
  centers.push_back(pick(rng));
  Vec dist2 = (data.rowwise() - data.row(centers[0])).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(centers.size()) < k) {
    const double total = dist2.sum();
    int chosen = 0;
    if (total <= 0.0) {
      chosen = pick(rng);
    } else {
      double r = unit(rng) * total;
      chosen = n - 1;
      for (int i = 0; i < n; ++i) {
        r -= dist2(i);
        if (r <= 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centers.push_back(chosen);
    dist2 = dist2.cwiseMin((data.rowwise() - data.row(chosen)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

Mat GaussianMixture::Responsibilities(const Mat& data) const {
  const auto caches = BuildCaches(*this);
  Mat resp;
  NormalizeRows(LogJoint(*this, caches, data), &resp);
  return resp;
}

double GaussianMixture::LogLikelihood(const Mat& data) const {
  const auto caches = BuildCaches(*this);
  Mat resp;
  return NormalizeRows(LogJoint(*this, caches, data), &resp).sum();
}

int ChooseK(long sample_count) {
  const long k = sample_count / 40;
  return static_cast<int>(std::clamp<long>(k, 1, 20));
}

GaussianMixture FitGmm(const Mat& data, int k, std::uint64_t seed,
                       const GmmFitOptions& options, GmmFitTrace* trace) {
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (k < 1) throw ConfigError("GMM needs at least one component");
  if (n < k) throw InsufficientDataError("GMM needs at least K data points");

  std::mt19937_64 rng(seed);
  const Gaussian all = EmpiricalMoments(data);
  const Mat floor = options.covariance_floor * Mat::Identity(d, d);
  // Scatter penalty Psi = floor * n * I gives S_k = scatter_k / N_k + floor * (n / N_k) I.
  const double psi = options.covariance_floor * n;

  GaussianMixture gmm;
  gmm.weights = Vec::Constant(k, 1.0 / k);
  gmm.components.resize(k);
  {
    const std::vector<int> centers = KmeansPlusPlus(data, k, rng);
    for (int j = 0; j < k; ++j) {
      gmm.components[j].mean = data.row(centers[j]).transpose();
      gmm.components[j].covariance = all.covariance + floor;
    }
  }
  if (k == 1) gmm.components[0].mean = all.mean;

  GmmFitTrace local;
  GmmFitTrace& tr = trace ? *trace : local;
  tr = GmmFitTrace{};
  std::uniform_int_distribution<int> pick(0, n - 1);
  double previous = -std::numeric_limits<double>::infinity();
  Mat resp;
  for (int iter = 0; iter < options.max_iters; ++iter) {
    // E-step.
    auto caches = BuildCaches(gmm);
    NormalizeRows(LogJoint(gmm, caches, data), &resp);

    // M-step.
    const Vec counts = resp.colwise().sum().transpose();
    for (int j = 0; j < k; ++j) {
      Gaussian& g = gmm.components[j];
      if (counts(j) < 1e-10) {
        g.mean = data.row(pick(rng)).transpose();
        g.covariance = all.covariance + floor;
        gmm.weights(j) = 1.0 / n;
        ++tr.reinitialized_components;
        continue;
      }
      g.mean = (data.transpose() * resp.col(j)) / counts(j);
      const Mat centered = data.rowwise() - g.mean.transpose();
      const Mat scatter = centered.transpose() * resp.col(j).asDiagonal() * centered;
      g.covariance = Symmetrize((scatter + psi * Mat::Identity(d, d)) / counts(j));
      gmm.weights(j) = counts(j) / n;
    }
    gmm.weights /= gmm.weights.sum();

    // Penalized objective at the new parameters.
    caches = BuildCaches(gmm);
    Mat unused;
    double objective = NormalizeRows(LogJoint(gmm, caches, data), &unused).sum();
    for (int j = 0; j < k; ++j) {
      objective -= 0.5 * psi * caches[j].llt.solve(Mat::Identity(d, d)).trace();
    }
    tr.objective.push_back(objective);
    tr.iterations = iter + 1;
    if (std::abs(objective - previous) < options.tolerance * n) break;
    previous = objective;
  }
  return gmm;
}

NiwPrior InferPrior(const GaussianMixture& gmm, const Mat& batch, double m, double n0) {
  if (batch.rows() == 0) throw InsufficientDataError("prior inference on an empty batch");
  if (batch.cols() != gmm.dim()) throw DimensionError("batch dimension differs from mixture");
  const Vec w = gmm.Responsibilities(batch).colwise().mean().transpose();
  const int d = gmm.dim();
  Vec mu_bar = Vec::Zero(d);
  for (int k = 0; k < gmm.size(); ++k) mu_bar += w(k) * gmm.components[k].mean;
  Mat sigma_bar = Mat::Zero(d, d);
  for (int k = 0; k < gmm.size(); ++k) {
    const Vec dm = gmm.components[k].mean - mu_bar;
    sigma_bar += w(k) * (gmm.components[k].covariance + dm * dm.transpose());
  }
  NiwPrior prior;
  prior.mu0 = mu_bar;
  prior.phi = n0 * Symmetrize(sigma_bar);
  prior.m = m;
  prior.n0 = n0;
  return prior;
}

}  // namespace gpslab

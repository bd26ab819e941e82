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

// Gaussian mixture over transition tuples [x; u; x'] and the NIW prior it
// induces for a batch of tuples at one timestep.

#ifndef GPSLAB_GMM_H_
#define GPSLAB_GMM_H_

#include <cstdint>
#include <vector>

#include "gpslab/gauss.h"

namespace gpslab {

struct GaussianMixture {
  Vec weights;
  std::vector<Gaussian> components;

  int size() const { return static_cast<int>(components.size()); }
  int dim() const { return components.empty() ? 0 : components.front().dim(); }

  // Posterior component probabilities for each row of `data` (n x K).
  Mat Responsibilities(const Mat& data) const;
  // Sum of log p(row) over the rows of `data`.
  double LogLikelihood(const Mat& data) const;
};

struct GmmFitOptions {
  int max_iters = 100;
  // Stop when the per-datum objective changes by less than this.
  double tolerance = 1e-6;
  // Every component covariance is at least covariance_floor * I.
  double covariance_floor = 1e-6;
};

struct GmmFitTrace {
  // Penalized log-likelihood after every EM iteration. The covariance floor
  // enters as an inverse-Wishart style penalty, so this sequence is the one
  // EM is guaranteed not to decrease.
  std::vector<double> objective;
  int iterations = 0;
  int reinitialized_components = 0;
};

// EM fit of a K-component mixture to the rows of `data`, seeded with
// k-means++. Deterministic in `seed`.
GaussianMixture FitGmm(const Mat& data, int k, std::uint64_t seed,
                       const GmmFitOptions& options = {},
                       GmmFitTrace* trace = nullptr);

// min(20, max(1, floor(sample_count / 40)))
int ChooseK(long sample_count);

// Moment-matched prior for a batch: average the per-datum responsibilities,
// mix the component moments (including the spread of component means) into
// (mu_bar, Sigma_bar), and return Phi = n0 * Sigma_bar, mu0 = mu_bar.
NiwPrior InferPrior(const GaussianMixture& gmm, const Mat& batch, double m = 1.0,
                    double n0 = 1.0);

}  // namespace gpslab

#endif  // GPSLAB_GMM_H_

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

// The conditional Gaussian policy N(mu(o), Sigma_pi) and everything needed to
// fit it to the guiding controllers: replay buffer, importance weights, the
// supervised objective, closed-form Sigma_pi and pose-regression pretraining.

#ifndef GPSLAB_POLICY_H_
#define GPSLAB_POLICY_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "gpslab/gauss.h"
#include "gpslab/models.h"
#include "gpslab/network.h"

namespace gpslab {

struct VisionSpec {
  int height = 32;
  int width = 32;
  std::vector<int> channels = {8, 8};
  int kernel = 5;
};

// Observation layout: [image (height*width) if vision; proprioceptive part].
struct PolicyArchitecture {
  int obs_dim = 0;
  int action_dim = 0;
  std::vector<int> hidden = {40};
  Activation activation = Activation::kSoftplus;
  std::optional<VisionSpec> vision;

  int image_size() const { return vision ? vision->height * vision->width : 0; }
  int proprio_dim() const { return obs_dim - image_size(); }

  nlohmann::json ToJson() const;
  static PolicyArchitecture FromJson(const nlohmann::json& j);
};

class GaussianPolicy {
 public:
  struct Activations {
    ConvFrontEnd::Cache conv;
    Mlp::Cache mlp;
  };

  GaussianPolicy() = default;
  explicit GaussianPolicy(const PolicyArchitecture& arch);

  void InitRandom(std::uint64_t seed);

  Vec Mean(const Vec& observation, Activations* cache = nullptr) const;
  // dL/dtheta given dL/dmean. With `freeze_front_end`, the conv block of the
  // gradient stays zero.
  Vec ParameterGradient(const Activations& cache, const Vec& grad_mean,
                        bool freeze_front_end = false) const;

  int NumParameters() const;
  int NumFrontEndParameters() const;
  Vec Parameters() const;
  void SetParameters(const Vec& theta);

  const Mat& sigma() const { return sigma_; }
  void set_sigma(const Mat& sigma);

  // Affine whitening of the proprioceptive inputs: (o - shift) .* scale.
  const Vec& input_shift() const { return input_shift_; }
  const Vec& input_scale() const { return input_scale_; }
  void SetInputNormalization(const Vec& shift, const Vec& scale);
  // Switches to a new whitening and rewrites the first dense layer so the
  // mean output is unchanged.
  void ReplaceInputNormalization(const Vec& shift, const Vec& scale);
  bool normalization_fitted() const { return normalization_fitted_; }

  const PolicyArchitecture& architecture() const { return arch_; }
  const std::optional<ConvFrontEnd>& front_end() const { return front_; }
  std::optional<ConvFrontEnd>& front_end() { return front_; }
  const Mlp& head() const { return head_; }
  Mlp& head() { return head_; }

 private:
  PolicyArchitecture arch_;
  std::optional<ConvFrontEnd> front_;
  Mlp head_;
  Vec input_shift_;
  Vec input_scale_;
  bool normalization_fitted_ = false;
  Mat sigma_;
};

struct ReplayTuple {
  Vec observation;
  Vec state;
  int t = 0;
  int condition = 0;
  int iteration = 0;
  // Marginal of x_t under the distribution that generated the tuple.
  Gaussian origin;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int window_iterations = 3) : window_(window_iterations) {}

  void Add(ReplayTuple tuple) { tuples_.push_back(std::move(tuple)); }
  // Drops tuples whose iteration tag is older than the window ending at
  // `current_iteration`.
  void Prune(int current_iteration);

  const std::vector<ReplayTuple>& tuples() const { return tuples_; }
  int window() const { return window_; }
  std::size_t size() const { return tuples_.size(); }

 private:
  int window_;
  std::vector<ReplayTuple> tuples_;
};

// Current marginal of x_t for a condition.
using MarginalLookup = std::function<const Gaussian&(int condition, int t)>;

inline constexpr double kImportanceClipLow = 1e-2;
inline constexpr double kImportanceClipHigh = 1e2;

// Clipped density ratios p_current(x_t) / p_origin(x_t).
Vec ImportanceRatios(std::span<const ReplayTuple* const> batch, const MarginalLookup& current);
// Ratios normalized to sum to one over the batch.
Vec ImportanceWeights(std::span<const ReplayTuple* const> batch, const MarginalLookup& current);

struct LossAndGrad {
  double loss = 0.0;
  Vec grad;
};

// sum_j w_j [ tr(C^-1 Sigma_pi) - log|Sigma_pi| + (mu_pi - mu_p)^T C^-1 (mu_pi - mu_p)
//             + 2 lambda^T mu_pi ],
// with mu_p = K x + k and C from the tuple's condition and step. Gradient is
// with respect to the mean-network parameters only.
LossAndGrad SupervisedLossAndGrad(const GaussianPolicy& policy,
                                  std::span<const ReplayTuple* const> batch, const Vec& weights,
                                  std::span<const LinearGaussianController> controllers,
                                  std::span<const std::vector<Vec>> lambdas,
                                  bool freeze_front_end = false);

// Sigma_pi = [ (1 / NT) sum C_ti^-1 ]^-1
Mat UpdateSigma(std::span<const LinearGaussianController> controllers);

struct SgdOptions {
  int steps = 50;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  // Divide the step by the median precision scale tr(C^-1)/d_u of the
  // buffer, so the step size does not depend on the cost units.
  bool normalize_precision = true;
  // Minibatch gradients longer than this are rescaled to this length; 0 disables.
  double max_gradient_norm = 10.0;
};

// SGD with momentum; the velocity persists across Train calls.
class PolicyTrainer {
 public:
  explicit PolicyTrainer(SgdOptions options = {}) : options_(options) {}

  // Returns the per-step minibatch losses.
  std::vector<double> Train(GaussianPolicy& policy, const ReplayBuffer& buffer,
                            std::span<const LinearGaussianController> controllers,
                            std::span<const std::vector<Vec>> lambdas,
                            const MarginalLookup& current, std::mt19937_64& rng, int steps,
                            bool freeze_front_end = false);

  const SgdOptions& options() const { return options_; }
  void ResetMomentum() { velocity_.resize(0); }

 private:
  SgdOptions options_;
  Vec velocity_;
};

// Fits the whitening of proprioceptive inputs from a set of observations.
// Once a whitening is in place the refit keeps the policy mean unchanged.
void FitInputNormalization(GaussianPolicy& policy, std::span<const Vec> observations);

struct PoseDataset {
  Mat images;   // one image per row
  Mat targets;  // one 2D position per row
  int height = 32;
  int width = 32;
};

struct PoseTrainOptions {
  int steps = 4000;
  int batch_size = 32;
  double learning_rate = 0.02;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

// Conv front-end followed by a linear head regressing a 2D position.
struct PoseRegressor {
  ConvFrontEnd front;
  Mlp head;

  Vec Predict(const Vec& image) const { return head.Forward(front.Forward(image)); }
  int NumParameters() const { return front.NumParameters() + head.NumParameters(); }
};

PoseRegressor MakePoseRegressor(const VisionSpec& spec, bool spatial_softmax, std::uint64_t seed);

// Squared-error SGD. Returns per-step minibatch losses.
std::vector<double> TrainPoseRegressor(PoseRegressor& model, const PoseDataset& data,
                                       const PoseTrainOptions& options);

// Mean Euclidean position error over the dataset.
double PoseError(const PoseRegressor& model, const PoseDataset& data);

// Trains a pose regressor with the given front-end architecture and returns
// the trained front-end; the regression head is discarded.
ConvFrontEnd PretrainPose(const VisionSpec& spec, const PoseDataset& data,
                          const PoseTrainOptions& options);

}  // namespace gpslab

#endif  // GPSLAB_POLICY_H_

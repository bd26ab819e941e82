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

#include "gpslab/policy.h"

#include <algorithm>
#include <cmath>

#include "gpslab/error.h"

namespace gpslab {

nlohmann::json PolicyArchitecture::ToJson() const {
  nlohmann::json j;
  j["obs_dim"] = obs_dim;
  j["action_dim"] = action_dim;
  j["hidden"] = hidden;
  j["activation"] = ActivationName(activation);
  if (vision) {
    j["vision"] = {{"height", vision->height},
                   {"width", vision->width},
                   {"channels", vision->channels},
                   {"kernel", vision->kernel}};
  }
  return j;
}

PolicyArchitecture PolicyArchitecture::FromJson(const nlohmann::json& j) {
  PolicyArchitecture a;
  try {
    a.obs_dim = j.at("obs_dim").get<int>();
    a.action_dim = j.at("action_dim").get<int>();
    a.hidden = j.at("hidden").get<std::vector<int>>();
    a.activation = ActivationFromName(j.at("activation").get<std::string>());
    if (j.contains("vision")) {
      const auto& v = j.at("vision");
      VisionSpec spec;
      spec.height = v.at("height").get<int>();
      spec.width = v.at("width").get<int>();
      spec.channels = v.at("channels").get<std::vector<int>>();
      spec.kernel = v.at("kernel").get<int>();
      a.vision = spec;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("policy architecture: ") + e.what());
  }
  return a;
}

// ---------------------------------------------------------------------------
// GaussianPolicy

GaussianPolicy::GaussianPolicy(const PolicyArchitecture& arch) : arch_(arch) {
  if (arch.obs_dim <= 0 || arch.action_dim <= 0) {
    throw ConfigError("policy needs positive observation and action dimensions");
  }
  if (arch.proprio_dim() < 0) throw ConfigError("observation smaller than the image");
  int head_in = arch.proprio_dim();
  if (arch.vision) {
    front_.emplace(arch.vision->height, arch.vision->width, 1, arch.vision->channels,
                   arch.vision->kernel, true);
    head_in += front_->output_dim();
  }
  std::vector<int> sizes{head_in};
  sizes.insert(sizes.end(), arch.hidden.begin(), arch.hidden.end());
  sizes.push_back(arch.action_dim);
  head_ = Mlp(sizes, arch.activation);
  input_shift_ = Vec::Zero(arch.proprio_dim());
  input_scale_ = Vec::Ones(arch.proprio_dim());
  sigma_ = Mat::Identity(arch.action_dim, arch.action_dim);
}

void GaussianPolicy::InitRandom(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  if (front_) front_->InitRandom(rng);
  head_.InitRandom(rng);
}

Vec GaussianPolicy::Mean(const Vec& observation, Activations* cache) const {
  if (observation.size() != arch_.obs_dim) {
    throw DimensionError("observation has dimension " + std::to_string(observation.size()) +
                         ", policy expects " + std::to_string(arch_.obs_dim));
  }
  const int img = arch_.image_size();
  const int prop = arch_.proprio_dim();
  Vec proprio = (observation.tail(prop) - input_shift_).cwiseProduct(input_scale_);
  if (!front_) return head_.Forward(proprio, cache ? &cache->mlp : nullptr);
  const Vec points = front_->Forward(observation.head(img), cache ? &cache->conv : nullptr);
  Vec input(points.size() + prop);
  input << points, proprio;
  return head_.Forward(input, cache ? &cache->mlp : nullptr);
}

Vec GaussianPolicy::ParameterGradient(const Activations& cache, const Vec& grad_mean,
                                      bool freeze_front_end) const {
  Vec grad = Vec::Zero(NumParameters());
  const int front_n = NumFrontEndParameters();
  const Vec grad_input = head_.Backward(cache.mlp, grad_mean, grad.data() + front_n);
  if (front_ && !freeze_front_end) {
    front_->Backward(cache.conv, grad_input.head(front_->output_dim()), grad.data());
  }
  return grad;
}

int GaussianPolicy::NumFrontEndParameters() const {
  return front_ ? front_->NumParameters() : 0;
}

int GaussianPolicy::NumParameters() const {
  return NumFrontEndParameters() + head_.NumParameters();
}

Vec GaussianPolicy::Parameters() const {
  Vec theta(NumParameters());
  if (front_) front_->GetParameters(theta.data());
  head_.GetParameters(theta.data() + NumFrontEndParameters());
  return theta;
}

void GaussianPolicy::SetParameters(const Vec& theta) {
  if (theta.size() != NumParameters()) throw DimensionError("parameter vector size mismatch");
  if (front_) front_->SetParameters(theta.data());
  head_.SetParameters(theta.data() + NumFrontEndParameters());
}

void GaussianPolicy::set_sigma(const Mat& sigma) {
  if (sigma.rows() != arch_.action_dim || sigma.cols() != arch_.action_dim) {
    throw DimensionError("policy covariance must be d_u x d_u");
  }
  sigma_ = Symmetrize(sigma);
}

void GaussianPolicy::SetInputNormalization(const Vec& shift, const Vec& scale) {
  if (shift.size() != arch_.proprio_dim() || scale.size() != arch_.proprio_dim()) {
    throw DimensionError("normalization size mismatch");
  }
  input_shift_ = shift;
  input_scale_ = scale;
  normalization_fitted_ = true;
}

void GaussianPolicy::ReplaceInputNormalization(const Vec& shift, const Vec& scale) {
  if (shift.size() != arch_.proprio_dim() || scale.size() != arch_.proprio_dim()) {
    throw DimensionError("normalization size mismatch");
  }
  const int prop = arch_.proprio_dim();
  const int offset = front_ ? front_->output_dim() : 0;
  auto w = head_.weights().front().middleCols(offset, prop);
  head_.biases().front() += w * (shift - input_shift_).cwiseProduct(input_scale_);
  w = w * input_scale_.cwiseQuotient(scale).asDiagonal();
  SetInputNormalization(shift, scale);
}

void FitInputNormalization(GaussianPolicy& policy, std::span<const Vec> observations) {
  const int prop = policy.architecture().proprio_dim();
  if (observations.empty() || prop == 0) return;
  Mat data(observations.size(), prop);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    data.row(i) = observations[i].tail(prop).transpose();
  }
  const Vec mean = data.colwise().mean().transpose();
  const Vec var = (data.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
  Vec scale(prop);
  for (int i = 0; i < prop; ++i) scale(i) = 1.0 / std::sqrt(std::max(var(i), 1e-6));
  if (policy.normalization_fitted()) {
    policy.ReplaceInputNormalization(mean, scale);
  } else {
    policy.SetInputNormalization(mean, scale);
  }
}

// ---------------------------------------------------------------------------
// Replay and importance weights

void ReplayBuffer::Prune(int current_iteration) {
  std::erase_if(tuples_, [&](const ReplayTuple& r) {
    return r.iteration <= current_iteration - window_;
  });
}

Vec ImportanceRatios(std::span<const ReplayTuple* const> batch, const MarginalLookup& current) {
  Vec ratios(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const ReplayTuple& r = *batch[j];
    const double log_ratio =
        LogDensity(current(r.condition, r.t), r.state) - LogDensity(r.origin, r.state);
    const double ratio = std::exp(std::clamp(log_ratio, -50.0, 50.0));
    ratios(j) = std::clamp(ratio, kImportanceClipLow, kImportanceClipHigh);
  }
  return ratios;
}

Vec ImportanceWeights(std::span<const ReplayTuple* const> batch, const MarginalLookup& current) {
  Vec w = ImportanceRatios(batch, current);
  if (w.size() > 0) w /= w.sum();
  return w;
}

// ---------------------------------------------------------------------------
// Supervised objective

LossAndGrad SupervisedLossAndGrad(const GaussianPolicy& policy,
                                  std::span<const ReplayTuple* const> batch, const Vec& weights,
                                  std::span<const LinearGaussianController> controllers,
                                  std::span<const std::vector<Vec>> lambdas,
                                  bool freeze_front_end) {
  if (static_cast<std::size_t>(weights.size()) != batch.size()) {
    throw DimensionError("one importance weight per tuple is required");
  }
  const Mat& sigma = policy.sigma();
  const double logdet_sigma = SpdLogDet(sigma);
  LossAndGrad out;
  out.grad = Vec::Zero(policy.NumParameters());
  GaussianPolicy::Activations cache;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const ReplayTuple& r = *batch[j];
    const LinearGaussianController& ctl = controllers[r.condition];
    const Mat prec = SpdInverse(ctl.C[r.t]);
    const Vec mu_p = ctl.Mean(r.t, r.state);
    const Vec& lambda = lambdas[r.condition][r.t];
    const Vec mu_pi = policy.Mean(r.observation, &cache);
    const Vec diff = mu_pi - mu_p;
    const double w = weights(j);
    out.loss += w * ((prec * sigma).trace() - logdet_sigma + diff.dot(prec * diff) +
                     2.0 * lambda.dot(mu_pi));
    const Vec grad_mean = w * (2.0 * (prec * diff) + 2.0 * lambda);
    out.grad += policy.ParameterGradient(cache, grad_mean, freeze_front_end);
  }
  return out;
}

Mat UpdateSigma(std::span<const LinearGaussianController> controllers) {
  if (controllers.empty()) throw InsufficientDataError("no controllers to average");
  const int du = controllers[0].du();
  Mat mean_prec = Mat::Zero(du, du);
  long count = 0;
  for (const auto& c : controllers) {
    for (const Mat& cov : c.C) {
      mean_prec += SpdInverse(cov);
      ++count;
    }
  }
  mean_prec /= static_cast<double>(count);
  return SpdInverse(Symmetrize(mean_prec));
}

std::vector<double> PolicyTrainer::Train(GaussianPolicy& policy, const ReplayBuffer& buffer,
                                         std::span<const LinearGaussianController> controllers,
                                         std::span<const std::vector<Vec>> lambdas,
                                         const MarginalLookup& current, std::mt19937_64& rng,
                                         int steps, bool freeze_front_end) {
  std::vector<double> losses;
  const auto& tuples = buffer.tuples();
  if (tuples.empty() || steps <= 0) return losses;
  if (velocity_.size() != policy.NumParameters()) velocity_ = Vec::Zero(policy.NumParameters());

  double scale = 1.0;
  if (options_.normalize_precision) {
    std::vector<double> traces;
    traces.reserve(tuples.size());
    const int du = policy.architecture().action_dim;
    for (const auto& r : tuples) {
      traces.push_back(SpdInverse(controllers[r.condition].C[r.t]).trace() / du);
    }
    auto mid = traces.begin() + traces.size() / 2;
    std::nth_element(traces.begin(), mid, traces.end());
    if (*mid > 0.0) scale = 1.0 / *mid;
  }
  const double step = options_.learning_rate * scale;

  const int n = static_cast<int>(tuples.size());
  const int batch_size = std::min(options_.batch_size, n);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<const ReplayTuple*> batch(batch_size);
  losses.reserve(steps);
  for (int s = 0; s < steps; ++s) {
    for (int b = 0; b < batch_size; ++b) batch[b] = &tuples[pick(rng)];
    const Vec w = ImportanceWeights(batch, current);
    const LossAndGrad lg =
        SupervisedLossAndGrad(policy, batch, w, controllers, lambdas, freeze_front_end);
    double shrink = 1.0;
    if (options_.max_gradient_norm > 0.0) {
      const double norm = lg.grad.norm();
      if (norm > options_.max_gradient_norm) shrink = options_.max_gradient_norm / norm;
    }
    velocity_ = options_.momentum * velocity_ - (step * shrink) * lg.grad;
    policy.SetParameters(policy.Parameters() + velocity_);
    losses.push_back(lg.loss);
  }
  return losses;
}

// ---------------------------------------------------------------------------
// Pose regression pretraining

PoseRegressor MakePoseRegressor(const VisionSpec& spec, bool spatial_softmax,
                                std::uint64_t seed) {
  PoseRegressor model{ConvFrontEnd(spec.height, spec.width, 1, spec.channels, spec.kernel,
                                   spatial_softmax),
                      Mlp()};
  model.head = Mlp({model.front.output_dim(), 2}, Activation::kIdentity);
  std::mt19937_64 rng(seed);
  model.front.InitRandom(rng);
  model.head.InitRandom(rng);
  return model;
}

std::vector<double> TrainPoseRegressor(PoseRegressor& model, const PoseDataset& data,
                                       const PoseTrainOptions& options) {
  const int n = static_cast<int>(data.images.rows());
  if (n == 0) throw InsufficientDataError("empty pose dataset");
  const int nf = model.front.NumParameters();
  const int nh = model.head.NumParameters();
  Vec theta(nf + nh);
  model.front.GetParameters(theta.data());
  model.head.GetParameters(theta.data() + nf);
  Vec velocity = Vec::Zero(nf + nh);
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  const int batch = std::min(options.batch_size, n);
  std::vector<double> losses;
  losses.reserve(options.steps);
  ConvFrontEnd::Cache conv_cache;
  Mlp::Cache head_cache;
  for (int s = 0; s < options.steps; ++s) {
    Vec grad = Vec::Zero(nf + nh);
    double loss = 0.0;
    for (int b = 0; b < batch; ++b) {
      const int i = pick(rng);
      const Vec image = data.images.row(i).transpose();
      const Vec feats = model.front.Forward(image, &conv_cache);
      const Vec pred = model.head.Forward(feats, &head_cache);
      const Vec err = pred - data.targets.row(i).transpose();
      loss += err.squaredNorm() / batch;
      const Vec gin = model.head.Backward(head_cache, 2.0 * err / batch, grad.data() + nf);
      model.front.Backward(conv_cache, gin, grad.data());
    }
    velocity = options.momentum * velocity - options.learning_rate * grad;
    theta += velocity;
    model.front.SetParameters(theta.data());
    model.head.SetParameters(theta.data() + nf);
    losses.push_back(loss);
  }
  return losses;
}

double PoseError(const PoseRegressor& model, const PoseDataset& data) {
  const int n = static_cast<int>(data.images.rows());
  if (n == 0) return 0.0;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total += (model.Predict(data.images.row(i).transpose()) - data.targets.row(i).transpose())
                 .norm();
  }
  return total / n;
}

ConvFrontEnd PretrainPose(const VisionSpec& spec, const PoseDataset& data,
                          const PoseTrainOptions& options) {
  PoseRegressor model = MakePoseRegressor(spec, true, options.seed);
  TrainPoseRegressor(model, data, options);
  return model.front;
}

}  // namespace gpslab

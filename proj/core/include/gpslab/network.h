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

// Small dense and convolutional layers with hand-written backpropagation.
// Parameters of every network flatten into one vector (layer by layer,
// weights column-major then biases) for optimizers and checkpoints.

#ifndef GPSLAB_NETWORK_H_
#define GPSLAB_NETWORK_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gpslab/gauss.h"

namespace gpslab {

enum class Activation { kIdentity, kRelu, kSoftplus };

Activation ActivationFromName(const std::string& name);
std::string ActivationName(Activation a);

// Spatial softmax over each channel (row of `maps`, length H*W, row-major
// pixels) followed by the expected image position on a [-1, 1]^2 grid.
// Returns (x_0, y_0, x_1, y_1, ...). `softmax` optionally receives the
// per-channel probabilities.
Vec SpatialSoftmaxPoints(const Mat& maps, int height, int width, Mat* softmax = nullptr);

// Gradient with respect to the activations given the gradient with respect
// to the feature points.
Mat SpatialSoftmaxBackward(const Mat& softmax, const Vec& points, const Vec& grad_points,
                           int height, int width);

// Pixel-grid coordinates used by the expectation.
double GridX(int col, int width);
double GridY(int row, int height);

class Mlp {
 public:
  struct Cache {
    std::vector<Vec> inputs;       // input to each dense layer
    std::vector<Vec> preactivation;
  };

  Mlp() = default;
  // sizes = {in, hidden..., out}; hidden layers use `hidden_activation`,
  // the output layer is linear.
  Mlp(std::vector<int> sizes, Activation hidden_activation);

  void InitRandom(std::mt19937_64& rng);

  Vec Forward(const Vec& input, Cache* cache = nullptr) const;
  // Accumulates dL/dparams into `grad` (size NumParameters) and returns dL/dinput.
  Vec Backward(const Cache& cache, const Vec& grad_output, double* grad) const;

  int NumParameters() const;
  void GetParameters(double* out) const;
  void SetParameters(const double* in);

  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::vector<Mat>& weights() { return weights_; }
  std::vector<Vec>& biases() { return biases_; }
  const std::vector<Mat>& weights() const { return weights_; }
  const std::vector<Vec>& biases() const { return biases_; }

 private:
  std::vector<int> sizes_;
  Activation activation_ = Activation::kRelu;
  std::vector<Mat> weights_;
  std::vector<Vec> biases_;
};

// "Same"-padded, stride-1 convolutions with ReLU after every layer, then
// either the spatial-softmax feature points (2 * last channels outputs) or
// the flattened last response maps.
class ConvFrontEnd {
 public:
  struct Cache {
    std::vector<Mat> columns;      // im2col of each layer input
    std::vector<Mat> preactivation;
    Mat last_maps;
    Mat softmax;
    Vec points;
  };

  ConvFrontEnd() = default;
  ConvFrontEnd(int height, int width, int in_channels, std::vector<int> channels, int kernel,
               bool spatial_softmax);

  void InitRandom(std::mt19937_64& rng);

  // `image` holds in_channels * H * W values, channel-major, row-major pixels.
  Vec Forward(const Vec& image, Cache* cache = nullptr) const;
  void Backward(const Cache& cache, const Vec& grad_output, double* grad) const;

  int output_dim() const;
  int NumParameters() const;
  void GetParameters(double* out) const;
  void SetParameters(const double* in);

  int height() const { return height_; }
  int width() const { return width_; }
  int in_channels() const { return in_channels_; }
  int kernel() const { return kernel_; }
  const std::vector<int>& channels() const { return channels_; }
  bool spatial_softmax() const { return spatial_softmax_; }
  std::vector<Mat>& filters() { return filters_; }
  std::vector<Vec>& biases() { return biases_; }
  const std::vector<Mat>& filters() const { return filters_; }
  const std::vector<Vec>& biases() const { return biases_; }

 private:
  Mat Im2Col(const Mat& maps, int channels) const;
  Mat Col2Im(const Mat& cols, int channels) const;

  int height_ = 0;
  int width_ = 0;
  int in_channels_ = 1;
  std::vector<int> channels_;
  int kernel_ = 5;
  bool spatial_softmax_ = true;
  std::vector<Mat> filters_;  // out x (in * k * k)
  std::vector<Vec> biases_;
};

}  // namespace gpslab

#endif  // GPSLAB_NETWORK_H_

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

#include "gpslab/network.h"

#include <cmath>

#include "gpslab/error.h"

namespace gpslab {
namespace {

double Activate(Activation a, double z) {
  switch (a) {
    case Activation::kIdentity:
      return z;
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kSoftplus:
      // log(1 + exp(z)) without overflow
      return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  return z;
}

double ActivateDerivative(Activation a, double z) {
  switch (a) {
    case Activation::kIdentity:
      return 1.0;
    case Activation::kRelu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kSoftplus:
      return 1.0 / (1.0 + std::exp(-z));
  }
  return 1.0;
}

void FillNormal(Mat& m, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, stddev);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = n(rng);
}

}  // namespace

Activation ActivationFromName(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "softplus") return Activation::kSoftplus;
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + name + "'");
}

std::string ActivationName(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kRelu:
      return "relu";
    case Activation::kSoftplus:
      return "softplus";
  }
  return "identity";
}

double GridX(int col, int width) {
  return width > 1 ? -1.0 + 2.0 * col / (width - 1) : 0.0;
}
double GridY(int row, int height) {
  return height > 1 ? -1.0 + 2.0 * row / (height - 1) : 0.0;
}

Vec SpatialSoftmaxPoints(const Mat& maps, int height, int width, Mat* softmax) {
  if (maps.cols() != height * width) throw DimensionError("response map size mismatch");
  const int channels = static_cast<int>(maps.rows());
  Vec gx(height * width), gy(height * width);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      gx(i * width + j) = GridX(j, width);
      gy(i * width + j) = GridY(i, height);
    }
  }
  Vec points(2 * channels);
  Mat s(channels, height * width);
  for (int c = 0; c < channels; ++c) {
    const double mx = maps.row(c).maxCoeff();
    s.row(c) = (maps.row(c).array() - mx).exp();
    s.row(c) /= s.row(c).sum();
    points(2 * c) = s.row(c).dot(gx.transpose());
    points(2 * c + 1) = s.row(c).dot(gy.transpose());
  }
  if (softmax != nullptr) *softmax = std::move(s);
  return points;
}

Mat SpatialSoftmaxBackward(const Mat& softmax, const Vec& points, const Vec& grad_points,
                           int height, int width) {
  const int channels = static_cast<int>(softmax.rows());
  Mat grad(channels, height * width);
  for (int c = 0; c < channels; ++c) {
    const double fx = points(2 * c), fy = points(2 * c + 1);
    const double g_x = grad_points(2 * c), g_y = grad_points(2 * c + 1);
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        const int p = i * width + j;
        grad(c, p) = softmax(c, p) * (g_x * (GridX(j, width) - fx) + g_y * (GridY(i, height) - fy));
      }
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Mlp

Mlp::Mlp(std::vector<int> sizes, Activation hidden_activation)
    : sizes_(std::move(sizes)), activation_(hidden_activation) {
  if (sizes_.size() < 2) throw ConfigError("MLP needs input and output sizes");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.push_back(Mat::Zero(sizes_[l + 1], sizes_[l]));
    biases_.push_back(Vec::Zero(sizes_[l + 1]));
  }
}

void Mlp::InitRandom(std::mt19937_64& rng) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    FillNormal(weights_[l], 1.0 / std::sqrt(static_cast<double>(weights_[l].cols())), rng);
    biases_[l].setZero();
  }
}

Vec Mlp::Forward(const Vec& input, Cache* cache) const {
  if (input.size() != sizes_.front()) throw DimensionError("MLP input dimension mismatch");
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->preactivation.clear();
  }
  Vec h = input;
  const std::size_t layers = weights_.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Vec z = weights_[l] * h + biases_[l];
    if (cache != nullptr) {
      cache->inputs.push_back(h);
      cache->preactivation.push_back(z);
    }
    if (l + 1 < layers) {
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = Activate(activation_, z(i));
    }
    h = std::move(z);
  }
  return h;
}

Vec Mlp::Backward(const Cache& cache, const Vec& grad_output, double* grad) const {
  const int layers = static_cast<int>(weights_.size());
  // Offsets of each layer's block in the flat vector.
  std::vector<int> offset(layers + 1, 0);
  for (int l = 0; l < layers; ++l) {
    offset[l + 1] = offset[l] + static_cast<int>(weights_[l].size() + biases_[l].size());
  }
  Vec delta = grad_output;
  for (int l = layers - 1; l >= 0; --l) {
    if (l + 1 < layers) {
      const Vec& z = cache.preactivation[l];
      for (Eigen::Index i = 0; i < z.size(); ++i) delta(i) *= ActivateDerivative(activation_, z(i));
    }
    Eigen::Map<Mat> gw(grad + offset[l], weights_[l].rows(), weights_[l].cols());
    Eigen::Map<Vec> gb(grad + offset[l] + weights_[l].size(), biases_[l].size());
    gw.noalias() += delta * cache.inputs[l].transpose();
    gb += delta;
    delta = weights_[l].transpose() * delta;
  }
  return delta;
}

int Mlp::NumParameters() const {
  int n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<int>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

void Mlp::GetParameters(double* out) const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::Map<Mat>(out, weights_[l].rows(), weights_[l].cols()) = weights_[l];
    out += weights_[l].size();
    Eigen::Map<Vec>(out, biases_[l].size()) = biases_[l];
    out += biases_[l].size();
  }
}

void Mlp::SetParameters(const double* in) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l] = Eigen::Map<const Mat>(in, weights_[l].rows(), weights_[l].cols());
    in += weights_[l].size();
    biases_[l] = Eigen::Map<const Vec>(in, biases_[l].size());
    in += biases_[l].size();
  }
}

// ---------------------------------------------------------------------------
// ConvFrontEnd

ConvFrontEnd::ConvFrontEnd(int height, int width, int in_channels, std::vector<int> channels,
                           int kernel, bool spatial_softmax)
    : height_(height),
      width_(width),
      in_channels_(in_channels),
      channels_(std::move(channels)),
      kernel_(kernel),
      spatial_softmax_(spatial_softmax) {
  if (height <= 0 || width <= 0 || in_channels <= 0 || channels_.empty() || kernel % 2 == 0) {
    throw ConfigError("conv front-end needs positive sizes, >= 1 layer and an odd kernel");
  }
  int in = in_channels_;
  for (int out : channels_) {
    filters_.push_back(Mat::Zero(out, in * kernel_ * kernel_));
    biases_.push_back(Vec::Zero(out));
    in = out;
  }
}

void ConvFrontEnd::InitRandom(std::mt19937_64& rng) {
  for (std::size_t l = 0; l < filters_.size(); ++l) {
    FillNormal(filters_[l], std::sqrt(2.0 / static_cast<double>(filters_[l].cols())), rng);
    biases_[l].setZero();
  }
}

int ConvFrontEnd::output_dim() const {
  return spatial_softmax_ ? 2 * channels_.back() : channels_.back() * height_ * width_;
}

int ConvFrontEnd::NumParameters() const {
  int n = 0;
  for (std::size_t l = 0; l < filters_.size(); ++l) {
    n += static_cast<int>(filters_[l].size() + biases_[l].size());
  }
  return n;
}

void ConvFrontEnd::GetParameters(double* out) const {
  for (std::size_t l = 0; l < filters_.size(); ++l) {
    Eigen::Map<Mat>(out, filters_[l].rows(), filters_[l].cols()) = filters_[l];
    out += filters_[l].size();
    Eigen::Map<Vec>(out, biases_[l].size()) = biases_[l];
    out += biases_[l].size();
  }
}

void ConvFrontEnd::SetParameters(const double* in) {
  for (std::size_t l = 0; l < filters_.size(); ++l) {
    filters_[l] = Eigen::Map<const Mat>(in, filters_[l].rows(), filters_[l].cols());
    in += filters_[l].size();
    biases_[l] = Eigen::Map<const Vec>(in, biases_[l].size());
    in += biases_[l].size();
  }
}

// maps: channels x (H*W). Returns (channels*k*k) x (H*W), zero padded.
Mat ConvFrontEnd::Im2Col(const Mat& maps, int channels) const {
  const int r = kernel_ / 2;
  const int hw = height_ * width_;
  Mat cols = Mat::Zero(channels * kernel_ * kernel_, hw);
  for (int c = 0; c < channels; ++c) {
    for (int di = 0; di < kernel_; ++di) {
      for (int dj = 0; dj < kernel_; ++dj) {
        const int row = (c * kernel_ + di) * kernel_ + dj;
        for (int i = 0; i < height_; ++i) {
          const int si = i + di - r;
          if (si < 0 || si >= height_) continue;
          for (int j = 0; j < width_; ++j) {
            const int sj = j + dj - r;
            if (sj < 0 || sj >= width_) continue;
            cols(row, i * width_ + j) = maps(c, si * width_ + sj);
          }
        }
      }
    }
  }
  return cols;
}

Mat ConvFrontEnd::Col2Im(const Mat& cols, int channels) const {
  const int r = kernel_ / 2;
  Mat maps = Mat::Zero(channels, height_ * width_);
  for (int c = 0; c < channels; ++c) {
    for (int di = 0; di < kernel_; ++di) {
      for (int dj = 0; dj < kernel_; ++dj) {
        const int row = (c * kernel_ + di) * kernel_ + dj;
        for (int i = 0; i < height_; ++i) {
          const int si = i + di - r;
          if (si < 0 || si >= height_) continue;
          for (int j = 0; j < width_; ++j) {
            const int sj = j + dj - r;
            if (sj < 0 || sj >= width_) continue;
            maps(c, si * width_ + sj) += cols(row, i * width_ + j);
          }
        }
      }
    }
  }
  return maps;
}

Vec ConvFrontEnd::Forward(const Vec& image, Cache* cache) const {
  const int hw = height_ * width_;
  if (image.size() != in_channels_ * hw) throw DimensionError("image size mismatch");
  if (cache != nullptr) {
    cache->columns.clear();
    cache->preactivation.clear();
  }
  // Row-major channel layout: row c is channel c.
  Mat maps = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                            Eigen::RowMajor>>(image.data(), in_channels_, hw);
  int in = in_channels_;
  for (std::size_t l = 0; l < filters_.size(); ++l) {
    Mat cols = Im2Col(maps, in);
    Mat z = filters_[l] * cols;
    z.colwise() += biases_[l];
    if (cache != nullptr) {
      cache->columns.push_back(std::move(cols));
      cache->preactivation.push_back(z);
    }
    maps = z.cwiseMax(0.0);
    in = channels_[l];
  }
  if (!spatial_softmax_) {
    Vec flat(maps.size());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), maps.rows(), maps.cols()) = maps;
    if (cache != nullptr) cache->last_maps = maps;
    return flat;
  }
  Mat softmax;
  Vec points = SpatialSoftmaxPoints(maps, height_, width_, &softmax);
  if (cache != nullptr) {
    cache->last_maps = maps;
    cache->softmax = std::move(softmax);
    cache->points = points;
  }
  return points;
}

void ConvFrontEnd::Backward(const Cache& cache, const Vec& grad_output, double* grad) const {
  const int layers = static_cast<int>(filters_.size());
  std::vector<int> offset(layers + 1, 0);
  for (int l = 0; l < layers; ++l) {
    offset[l + 1] = offset[l] + static_cast<int>(filters_[l].size() + biases_[l].size());
  }
  Mat dmaps;
  if (spatial_softmax_) {
    dmaps = SpatialSoftmaxBackward(cache.softmax, cache.points, grad_output, height_, width_);
  } else {
    dmaps = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>(grad_output.data(), channels_.back(),
                                                             height_ * width_);
  }
  for (int l = layers - 1; l >= 0; --l) {
    Mat dz = dmaps.cwiseProduct((cache.preactivation[l].array() > 0.0).cast<double>().matrix());
    Eigen::Map<Mat> gw(grad + offset[l], filters_[l].rows(), filters_[l].cols());
    Eigen::Map<Vec> gb(grad + offset[l] + filters_[l].size(), biases_[l].size());
    gw.noalias() += dz * cache.columns[l].transpose();
    gb += dz.rowwise().sum();
    if (l > 0) dmaps = Col2Im(filters_[l].transpose() * dz, channels_[l - 1]);
  }
}

}  // namespace gpslab

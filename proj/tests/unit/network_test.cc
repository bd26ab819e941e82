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


#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gpslab/error.h"
#include "gpslab/network.h"
#include "support/oracles.h"

namespace gpslab {
namespace {

Vec Params(const Mlp& m) {
  Vec p(m.NumParameters());
  m.GetParameters(p.data());
  return p;
}

Vec Params(const ConvFrontEnd& f) {
  Vec p(f.NumParameters());
  f.GetParameters(p.data());
  return p;
}

TEST(SpatialSoftmax, PeakedChannelLandsOnItsPixel) {
  const int h = 7, w = 9;
  Mat maps = Mat::Zero(2, h * w);
  maps(0, 2 * w + 5) = 50.0;
  maps(1, 6 * w + 0) = 50.0;
  const Vec p = SpatialSoftmaxPoints(maps, h, w);
  ASSERT_EQ(p.size(), 4);
  EXPECT_NEAR(p(0), GridX(5, w), 1e-6);
  EXPECT_NEAR(p(1), GridY(2, h), 1e-6);
  EXPECT_NEAR(p(2), GridX(0, w), 1e-6);
  EXPECT_NEAR(p(3), GridY(6, h), 1e-6);
}

TEST(SpatialSoftmax, UniformChannelIsCentered) {
  const Vec p = SpatialSoftmaxPoints(Mat::Constant(3, 8 * 8, 0.7), 8, 8);
  EXPECT_LT(p.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SpatialSoftmax, GridSpansUnitSquare) {
  EXPECT_DOUBLE_EQ(GridX(0, 5), -1.0);
  EXPECT_DOUBLE_EQ(GridX(4, 5), 1.0);
  EXPECT_DOUBLE_EQ(GridY(0, 3), -1.0);
  EXPECT_DOUBLE_EQ(GridY(2, 3), 1.0);
}

TEST(SpatialSoftmax, ShiftInvariantAndBounded) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat maps = testing::RandomMatrix(3, 6 * 5, rng, 10.0);
    const Vec p = SpatialSoftmaxPoints(maps, 6, 5);
    EXPECT_LE(p.cwiseAbs().maxCoeff(), 1.0);
    Mat shifted = maps;
    shifted.row(1).array() += 37.0;
    shifted.row(2).array() -= 5.0;
    EXPECT_LT((SpatialSoftmaxPoints(shifted, 6, 5) - p).norm(), 1e-12);
  }
}

TEST(SpatialSoftmax, ExplicitExpectation) {
  std::mt19937_64 rng(2);
  const int h = 4, w = 6;
  const Mat maps = testing::RandomMatrix(2, h * w, rng);
  const Vec p = SpatialSoftmaxPoints(maps, h, w);
  for (int c = 0; c < 2; ++c) {
    double z = 0.0, ex = 0.0, ey = 0.0;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const double e = std::exp(maps(c, i * w + j));
        z += e;
        ex += e * (-1.0 + 2.0 * j / (w - 1));
        ey += e * (-1.0 + 2.0 * i / (h - 1));
      }
    }
    EXPECT_NEAR(p(2 * c), ex / z, 1e-12);
    EXPECT_NEAR(p(2 * c + 1), ey / z, 1e-12);
  }
}

TEST(SpatialSoftmax, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  const int h = 5, w = 4, c = 2;
  for (int trial = 0; trial < 20; ++trial) {
    const Mat maps = testing::RandomMatrix(c, h * w, rng, 2.0);
    const Vec g = testing::RandomMatrix(2 * c, 1, rng);
    Mat softmax;
    const Vec points = SpatialSoftmaxPoints(maps, h, w, &softmax);
    const Mat analytic = SpatialSoftmaxBackward(softmax, points, g, h, w);
    const auto f = [&](const Vec& flat) {
      const Mat m = Eigen::Map<const Mat>(flat.data(), c, h * w);
      return g.dot(SpatialSoftmaxPoints(m, h, w));
    };
    const Vec x = Eigen::Map<const Vec>(maps.data(), maps.size());
    const Vec fd = testing::CentralDifference(f, x);
    const Vec an = Eigen::Map<const Vec>(analytic.data(), analytic.size());
    EXPECT_LT(testing::RelativeError(an, fd), 1e-4);
  }
}

TEST(Mlp, ZeroWeightsGiveZeroOutput) {
  Mlp m({3, 5, 2}, Activation::kRelu);
  m.SetParameters(Vec::Zero(m.NumParameters()).eval().data());
  EXPECT_EQ(m.Forward(Vec::Ones(3)).norm(), 0.0);
}

TEST(Mlp, SingleLayerIsAffine) {
  std::mt19937_64 rng(4);
  Mlp m({4, 3}, Activation::kSoftplus);
  m.InitRandom(rng);
  m.biases()[0] = testing::RandomMatrix(3, 1, rng);
  const Vec o = testing::RandomMatrix(4, 1, rng);
  EXPECT_EQ(m.Forward(o), (m.weights()[0] * o + m.biases()[0]).eval());
}

TEST(Mlp, MatchesHandEvaluation) {
  std::mt19937_64 rng(5);
  for (Activation act : {Activation::kRelu, Activation::kSoftplus}) {
    Mlp m({3, 6, 4, 2}, act);
    m.InitRandom(rng);
    const Vec o = testing::RandomMatrix(3, 1, rng);
    std::vector<double> a(o.data(), o.data() + o.size());
    for (std::size_t l = 0; l < m.weights().size(); ++l) {
      const Mat& W = m.weights()[l];
      std::vector<double> next(W.rows());
      for (int i = 0; i < W.rows(); ++i) {
        double s = m.biases()[l](i);
        for (int j = 0; j < W.cols(); ++j) s += W(i, j) * a[j];
        if (l + 1 < m.weights().size()) {
          s = act == Activation::kRelu ? (s > 0 ? s : 0.0) : std::log1p(std::exp(s));
        }
        next[i] = s;
      }
      a = next;
    }
    const Vec out = m.Forward(o);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(out(i), a[i], 1e-10);
  }
}

TEST(Mlp, ParameterLayoutRoundTrips) {
  std::mt19937_64 rng(6);
  Mlp m({2, 3, 1}, Activation::kRelu);
  m.InitRandom(rng);
  const Vec p = Params(m);
  EXPECT_EQ(p.size(), 2 * 3 + 3 + 3 + 1);
  EXPECT_EQ(p(1), m.weights()[0](1, 0));
  EXPECT_EQ(p(3), m.weights()[0](0, 1));
  EXPECT_EQ(p(6), m.biases()[0](0));
  Mlp other({2, 3, 1}, Activation::kRelu);
  other.SetParameters(p.data());
  EXPECT_EQ(Params(other), p);
}

TEST(Mlp, RejectsWrongInputSize) {
  Mlp m({3, 2}, Activation::kRelu);
  EXPECT_THROW(m.Forward(Vec::Zero(4)), DimensionError);
}

TEST(Mlp, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  for (Activation act : {Activation::kSoftplus, Activation::kRelu, Activation::kIdentity}) {
    Mlp m({3, 5, 2}, act);
    for (int trial = 0; trial < 20; ++trial) {
      m.InitRandom(rng);
      const Vec o = testing::RandomMatrix(3, 1, rng);
      const Vec g = testing::RandomMatrix(2, 1, rng);
      Mlp::Cache cache;
      m.Forward(o, &cache);
      Vec grad = Vec::Zero(m.NumParameters());
      const Vec grad_in = m.Backward(cache, g, grad.data());

      const Vec theta = Params(m);
      Mlp probe = m;
      const auto f_theta = [&](const Vec& p) {
        probe.SetParameters(p.data());
        return g.dot(probe.Forward(o));
      };
      EXPECT_LT(testing::RelativeError(grad, testing::CentralDifference(f_theta, theta)), 1e-4);
      const auto f_in = [&](const Vec& x) { return g.dot(m.Forward(x)); };
      EXPECT_LT(testing::RelativeError(grad_in, testing::CentralDifference(f_in, o)), 1e-4);
    }
  }
}

TEST(ConvFrontEnd, MatchesDirectConvolution) {
  std::mt19937_64 rng(8);
  const int h = 6, w = 5, k = 3, r = 1;
  ConvFrontEnd f(h, w, 1, {2}, k, /*spatial_softmax=*/false);
  f.InitRandom(rng);
  const Vec image = testing::RandomMatrix(h * w, 1, rng);
  const Vec out = f.Forward(image);
  ASSERT_EQ(out.size(), 2 * h * w);
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        double s = f.biases()[0](c);
        for (int di = 0; di < k; ++di) {
          for (int dj = 0; dj < k; ++dj) {
            const int si = i + di - r, sj = j + dj - r;
            if (si < 0 || si >= h || sj < 0 || sj >= w) continue;
            s += f.filters()[0](c, di * k + dj) * image(si * w + sj);
          }
        }
        EXPECT_NEAR(out(c * h * w + i * w + j), s > 0 ? s : 0.0, 1e-12);
      }
    }
  }
}

TEST(ConvFrontEnd, OutputDimensions) {
  EXPECT_EQ(ConvFrontEnd(8, 8, 1, {4, 3}, 5, true).output_dim(), 6);
  EXPECT_EQ(ConvFrontEnd(8, 8, 1, {4, 3}, 5, false).output_dim(), 3 * 64);
  EXPECT_EQ(ConvFrontEnd(8, 8, 1, {4, 3}, 5, true).NumParameters(),
            4 * 25 + 4 + 3 * 4 * 25 + 3);
}

TEST(ConvFrontEnd, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(9);
  for (bool softmax : {true, false}) {
    ConvFrontEnd f(6, 6, 1, {3, 2}, 3, softmax);
    for (int trial = 0; trial < 20; ++trial) {
      f.InitRandom(rng);
      const Vec image = testing::RandomMatrix(36, 1, rng);
      const Vec g = testing::RandomMatrix(f.output_dim(), 1, rng);
      ConvFrontEnd::Cache cache;
      f.Forward(image, &cache);
      Vec grad = Vec::Zero(f.NumParameters());
      f.Backward(cache, g, grad.data());
      ConvFrontEnd probe = f;
      const auto fn = [&](const Vec& p) {
        probe.SetParameters(p.data());
        return g.dot(probe.Forward(image));
      };
      EXPECT_LT(testing::RelativeError(grad, testing::CentralDifference(fn, Params(f))), 1e-4);
    }
  }
}

TEST(Activation, NamesRoundTrip) {
  for (Activation a : {Activation::kIdentity, Activation::kRelu, Activation::kSoftplus}) {
    EXPECT_EQ(ActivationFromName(ActivationName(a)), a);
  }
  EXPECT_THROW(ActivationFromName("tanh"), ConfigError);
}

}  // namespace
}  // namespace gpslab

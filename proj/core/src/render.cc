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

#include "gpslab/render.h"

#include <cmath>
#include <random>

#include "gpslab/network.h"

namespace gpslab {

Vec RenderBlobs(const std::vector<Blob>& blobs, int height, int width) {
  Vec image = Vec::Zero(height * width);
  for (const Blob& b : blobs) {
    const double inv = 1.0 / (2.0 * b.radius * b.radius);
    for (int r = 0; r < height; ++r) {
      const double dy = GridY(r, height) - b.y;
      for (int c = 0; c < width; ++c) {
        const double dx = GridX(c, width) - b.x;
        image(r * width + c) += b.intensity * std::exp(-(dx * dx + dy * dy) * inv);
      }
    }
  }
  return image;
}

Vec PixelCentroid(const Vec& image, int height, int width) {
  Vec centroid = Vec::Zero(2);
  double total = 0.0;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double v = image(r * width + c);
      centroid(0) += v * c;
      centroid(1) += v * r;
      total += v;
    }
  }
  return total > 0.0 ? Vec(centroid / total) : centroid;
}

PoseDataset MakePoseDataset(int count, std::uint64_t seed, int height, int width,
                            double extent) {
  PoseDataset data;
  data.height = height;
  data.width = width;
  data.images.resize(count, height * width);
  data.targets.resize(count, 2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-extent, extent);
  for (int i = 0; i < count; ++i) {
    Blob b;
    b.x = pos(rng);
    b.y = pos(rng);
    data.images.row(i) = RenderBlobs({b}, height, width).transpose();
    data.targets(i, 0) = b.x;
    data.targets(i, 1) = b.y;
  }
  return data;
}

}  // namespace gpslab

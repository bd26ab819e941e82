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

// Synthetic grayscale images made of Gaussian blobs on the [-1, 1]^2 pixel
// grid shared with the spatial softmax.

#ifndef GPSLAB_RENDER_H_
#define GPSLAB_RENDER_H_

#include <cstdint>
#include <vector>

#include "gpslab/gauss.h"
#include "gpslab/policy.h"

namespace gpslab {

struct Blob {
  double x = 0.0;  // grid coordinates
  double y = 0.0;
  double intensity = 1.0;
  double radius = 0.12;  // standard deviation in grid units
};

// Row-major H*W image.
Vec RenderBlobs(const std::vector<Blob>& blobs, int height, int width);

// Intensity-weighted mean (column, row) in pixel units.
Vec PixelCentroid(const Vec& image, int height, int width);

// One bright blob per image at a uniform position in [-extent, extent]^2;
// the target is its grid position.
PoseDataset MakePoseDataset(int count, std::uint64_t seed, int height = 32, int width = 32,
                            double extent = 0.75);

}  // namespace gpslab

#endif  // GPSLAB_RENDER_H_

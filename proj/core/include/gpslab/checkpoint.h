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

// Versioned binary checkpoint of a GaussianPolicy.
//
// Layout:
//   8 bytes   magic "GPSLABCK"
//   uint32    format version (little-endian)
//   uint64    header length in bytes
//   header    JSON: {"architecture": ..., "tensors": [{"name", "shape"}, ...]}
//   payload   every tensor in header order, column-major, little-endian float64

#ifndef GPSLAB_CHECKPOINT_H_
#define GPSLAB_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "gpslab/policy.h"

namespace gpslab {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void WriteCheckpoint(const GaussianPolicy& policy, std::ostream& out);
GaussianPolicy ReadCheckpoint(std::istream& in);

void SaveCheckpoint(const GaussianPolicy& policy, const std::filesystem::path& path);
GaussianPolicy LoadCheckpoint(const std::filesystem::path& path);

}  // namespace gpslab

#endif  // GPSLAB_CHECKPOINT_H_

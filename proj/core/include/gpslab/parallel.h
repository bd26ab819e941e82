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

// Worker fan-out and seed derivation.

#ifndef GPSLAB_PARALLEL_H_
#define GPSLAB_PARALLEL_H_

#include <cstdint>
#include <functional>

namespace gpslab {

// Worker count from GPSLAB_THREADS, capped by the hardware; at least 1.
int WorkerCount();

// Runs body(i) for i in [0, n). Calls must not depend on each other; the
// result never depends on the worker count.
void ParallelFor(int n, const std::function<void(int)>& body);

// SplitMix64 finalizer applied to a combination of the inputs.
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0);

}  // namespace gpslab

#endif  // GPSLAB_PARALLEL_H_

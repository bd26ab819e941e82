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

#include "gpslab/checkpoint.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gpslab/error.h"

namespace gpslab {
namespace {

constexpr std::array<char, 8> kMagic = {'G', 'P', 'S', 'L', 'A', 'B', 'C', 'K'};

template <typename T>
void PutLe(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T GetLe(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw IncompatibleError("checkpoint truncated");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

struct TensorRef {
  std::string name;
  std::vector<long> shape;
  double* data;
  long size() const {
    long n = 1;
    for (long s : shape) n *= s;
    return n;
  }
};

// Tensors of the policy in a fixed order. Pointers refer into `policy`.
std::vector<TensorRef> Tensors(GaussianPolicy& policy) {
  std::vector<TensorRef> t;
  if (auto& front = policy.front_end()) {
    for (std::size_t l = 0; l < front->filters().size(); ++l) {
      Mat& w = front->filters()[l];
      Vec& b = front->biases()[l];
      t.push_back({"conv" + std::to_string(l) + ".weight", {w.rows(), w.cols()}, w.data()});
      t.push_back({"conv" + std::to_string(l) + ".bias", {b.size()}, b.data()});
    }
  }
  Mlp& head = policy.head();
  for (std::size_t l = 0; l < head.weights().size(); ++l) {
    Mat& w = head.weights()[l];
    Vec& b = head.biases()[l];
    t.push_back({"fc" + std::to_string(l) + ".weight", {w.rows(), w.cols()}, w.data()});
    t.push_back({"fc" + std::to_string(l) + ".bias", {b.size()}, b.data()});
  }
  return t;
}

}  // namespace

void WriteCheckpoint(const GaussianPolicy& policy, std::ostream& out) {
  // Tensors() needs mutable access only to hand out pointers; nothing is written.
  GaussianPolicy& p = const_cast<GaussianPolicy&>(policy);
  std::vector<TensorRef> tensors = Tensors(p);
  Vec shift = policy.input_shift();
  Vec scale = policy.input_scale();
  Mat sigma = policy.sigma();
  tensors.push_back({"input_shift", {shift.size()}, shift.data()});
  tensors.push_back({"input_scale", {scale.size()}, scale.data()});
  tensors.push_back({"sigma", {sigma.rows(), sigma.cols()}, sigma.data()});

  nlohmann::json header;
  header["architecture"] = policy.architecture().ToJson();
  header["normalization_fitted"] = policy.normalization_fitted();
  header["tensors"] = nlohmann::json::array();
  for (const auto& t : tensors) header["tensors"].push_back({{"name", t.name}, {"shape", t.shape}});
  const std::string text = header.dump();

  out.write(kMagic.data(), kMagic.size());
  PutLe<std::uint32_t>(out, kCheckpointVersion);
  PutLe<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : tensors) {
    for (long i = 0; i < t.size(); ++i) PutLe<double>(out, t.data[i]);
  }
  if (!out) throw Error("failed to write checkpoint");
}

GaussianPolicy ReadCheckpoint(std::istream& in) {
  std::array<char, 8> magic;
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IncompatibleError("not a gpslab checkpoint");
  const auto version = GetLe<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw IncompatibleError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto length = GetLe<std::uint64_t>(in);
  if (length > (1u << 26)) throw IncompatibleError("checkpoint header too large");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw IncompatibleError("checkpoint truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IncompatibleError(std::string("checkpoint header: ") + e.what());
  }
  GaussianPolicy policy(PolicyArchitecture::FromJson(header.at("architecture")));
  std::vector<TensorRef> tensors = Tensors(policy);
  const int prop = policy.architecture().proprio_dim();
  const int du = policy.architecture().action_dim;
  Vec shift(prop), scale(prop);
  Mat sigma(du, du);
  tensors.push_back({"input_shift", {shift.size()}, shift.data()});
  tensors.push_back({"input_scale", {scale.size()}, scale.data()});
  tensors.push_back({"sigma", {sigma.rows(), sigma.cols()}, sigma.data()});

  const auto& listed = header.at("tensors");
  if (listed.size() != tensors.size()) throw IncompatibleError("checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (listed[i].at("name").get<std::string>() != tensors[i].name ||
        listed[i].at("shape").get<std::vector<long>>() != tensors[i].shape) {
      throw IncompatibleError("checkpoint tensor " + tensors[i].name + " does not match");
    }
    for (long j = 0; j < tensors[i].size(); ++j) tensors[i].data[j] = GetLe<double>(in);
  }
  if (header.value("normalization_fitted", false)) {
    policy.SetInputNormalization(shift, scale);
  }
  policy.set_sigma(sigma);
  return policy;
}

void SaveCheckpoint(const GaussianPolicy& policy, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  WriteCheckpoint(policy, out);
}

GaussianPolicy LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IncompatibleError("cannot open checkpoint " + path.string());
  return ReadCheckpoint(in);
}

}  // namespace gpslab

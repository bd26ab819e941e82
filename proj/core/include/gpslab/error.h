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

#ifndef GPSLAB_ERROR_H_
#define GPSLAB_ERROR_H_

#include <stdexcept>
#include <string>

namespace gpslab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A covariance could not be made positive definite.
class RegularizationError : public Error {
 public:
  using Error::Error;
};

// Operand shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A fit was asked for with fewer samples than it needs.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// A cost or its derivatives evaluated to a non-finite value.
class ExpansionError : public Error {
 public:
  explicit ExpansionError(int t)
      : Error("non-finite cost expansion at t=" + std::to_string(t)), t_(t) {}
  int timestep() const { return t_; }

 private:
  int t_;
};

// Q_uu stayed indefinite after the maximum Levenberg shift.
class BackwardPassError : public Error {
 public:
  using Error::Error;
};

// Configuration or file-format problems.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnknownTaskError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Artifacts that cannot be combined (schema or horizon mismatch).
class IncompatibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace gpslab

#endif  // GPSLAB_ERROR_H_

// Copyright 2026 The Spanfield Authors.
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

#ifndef SPANFIELD_ERRORS_H_
#define SPANFIELD_ERRORS_H_

#include <stdexcept>
#include <string>

namespace spanfield {

// Root of every error the library throws. The CLI maps the subclasses onto
// process exit codes (usage 1, data/format 2, numeric 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not agree, or an axis too small for the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameters or model/window configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad input data: malformed files, out-of-range ids, misaligned spans,
// incompatible checkpoints.
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf in a forward or backward quantity, or a diverging loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace spanfield

#endif  // SPANFIELD_ERRORS_H_

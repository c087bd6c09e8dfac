// Copyright 2026 The ebioc Authors
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

#ifndef EBIOC_ERROR_H_
#define EBIOC_ERROR_H_

#include <stdexcept>
#include <string>

namespace ebioc {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the domain of a dynamics expression (sqrt, arcsin, tan).
// `step` is the 0-based timestep of an unroll, or -1 for a single step.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, int step = -1)
      : Error(step < 0 ? what : what + " (at step " + std::to_string(step) + ")"),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// Mismatched lengths, shapes or misaligned batches.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A numerical routine produced non-finite values.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Caller violated an API contract that cannot be expressed in types.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Combination of model and solver that is not supported.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Bad configuration document (unknown keys, wrong types, invalid values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ebioc

#endif  // EBIOC_ERROR_H_

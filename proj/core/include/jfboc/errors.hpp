/*
 Copyright 2026 The jfboc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace jfboc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes that do not match the problem/network shape.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Inputs outside the domain of a model (e.g. steering at the tan singularity).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A cost or iterate blew up (exponential cost overflow guard, non-finite values).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// The fixed-point iteration hit max_iter without reaching tolerance.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The m x m implicit-differentiation system could not be factorized.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Invalid settings, configuration files or preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace jfboc

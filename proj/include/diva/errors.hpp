/* Copyright 2026 The diva engine authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DIVA_ERRORS_HPP_
#define DIVA_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace diva {

// Base class for all engine errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or violated argument contract. CLI exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

// File system and format failures. CLI exit code 3.
struct IoError : Error {
  using Error::Error;
};

// Training produced a non-finite loss. CLI exit code 4.
struct DivergenceError : Error {
  using Error::Error;
};

// Checkpoint/dataset dimensions do not match. CLI exit code 5.
struct CompatError : Error {
  using Error::Error;
};

}  // namespace diva

#endif  // DIVA_ERRORS_HPP_

// Copyright 2026 The heislab Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace heislab {

/** Base class of all heislab exceptions. */
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/** Dimension or mode-count mismatch between arguments. */
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

/** Argument outside its documented domain. */
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

/** Requested computation exceeds a hard resource guard. */
class ResourceGuardError : public Error {
 public:
  explicit ResourceGuardError(const std::string& msg) : Error(msg) {}
};

/** Bad experiment configuration (unknown key, missing field, bad range). */
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/** Requested operation is not available on the selected oracle backend. */
class BackendUnsupported : public Error {
 public:
  explicit BackendUnsupported(const std::string& msg) : Error(msg) {}
};

}  // namespace heislab

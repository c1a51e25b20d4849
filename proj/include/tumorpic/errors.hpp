// Copyright 2026 The tumorpic Authors
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

namespace tumorpic {

// Invalid argument or state outside an operation's domain.
class DomainError : public std::domain_error {
 public:
  DomainError(std::string tag, const std::string& what)
      : std::domain_error(what), tag_(std::move(tag)) {}
  const std::string& tag() const noexcept { return tag_; }

 private:
  std::string tag_;
};

// Malformed configuration, CLI spec, or input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A request outside what an algorithm is valid for (e.g. the HJB oracle
// with a non-frozen mean field).
class ScopeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Explicit scheme would violate its stability bound.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problem too large for an exact desk-scale solver.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace tumorpic

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

#include <cstddef>

namespace tumorpic {

// Uniform partition of [0, horizon_t] into k_steps subintervals.
struct TimeGrid {
  double horizon_t = 1.0;
  std::size_t k_steps = 1;

  double dt() const { return horizon_t / static_cast<double>(k_steps); }
  double time(std::size_t step) const { return static_cast<double>(step) * dt(); }
  // Throws DomainError unless horizon_t > 0 and k_steps >= 1.
  void validate() const;
};

}  // namespace tumorpic

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
#include <vector>

namespace tumorpic {

// Sampling path-integral (MPPI) planner settings.
struct PicConfig {
  std::size_t k_steps = 100;         // planning horizon cap, in grid steps
  std::size_t n_rollouts = 512;
  // Brownian scenarios per iteration. Rollouts form n_rollouts / n_scenarios
  // groups sharing one dose perturbation; a group's cost is its mean over
  // the scenarios. 1 gives plain MPPI.
  std::size_t n_scenarios = 16;
  double temperature_lambda = 0.2;
  double proposal_std = 1.0;         // std of Gaussian dose perturbations
  // Steps over which one perturbation draw is held; 1 = independent per step.
  std::size_t perturbation_block = 10;
  std::size_t n_iterations = 8;      // refinement passes for a fresh plan
  std::size_t n_iterations_replan = 1;  // passes per receding-horizon replan
  std::vector<double> u_init;        // initial dose sequence; empty = zeros
  // With a noise-free model, keep the incumbent sequence whenever the
  // weighted update does not lower its (exact) cost.
  bool monotone_deterministic = true;

  void validate() const;
};

struct ControlSequence {
  std::vector<double> doses;
};

}  // namespace tumorpic

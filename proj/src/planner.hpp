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
#include <span>
#include <vector>

#include "dynamics_kernel.hpp"
#include "tumorpic/pic.hpp"

namespace tumorpic::detail {

// Sampling planner for one path. Each iteration draws n_rollouts / S dose
// perturbations and S Brownian scenarios; every perturbation is scored by
// its mean cost over the same S scenarios.
// u_init (or zeros) truncated to `horizon`; checks the dose bounds.
std::vector<double> initial_plan(const PicConfig& cfg, const ModelParams& p, std::size_t horizon);

class Planner {
 public:
  // Plans may cover absolute steps [first_step, first_step + n_steps).
  Planner(const ModelParams& p, const PicConfig& cfg, double dt, const SeedSpec& seed,
          std::size_t first_step, std::size_t n_steps);

  // Runs `iterations` refinement passes on u (size = horizon) from state x
  // at absolute step `step`.
  void refine(const State& x, double theta, std::size_t step, std::vector<double>& u,
              std::size_t iterations, PlanDiagnostics* diag);

  // Batch of iteration `it` at `step` around base.
  void sample(const State& x, double theta, std::size_t step, std::span<const double> base,
              std::size_t it, RolloutBatch& out);

  // Cost of u with all Brownian increments zero (exact when noise-free).
  double evaluate(const State& x, double theta, std::size_t step, std::span<const double> u);

 private:
  void simulate(const State& x, double theta, std::size_t step, std::span<const double> u,
                const double* eps, const double* bank, std::size_t n_scen, std::size_t count,
                double* costs) const;

  const ModelParams* p_;
  DynamicsCoefs coefs_;
  PicConfig cfg_;
  double dt_;
  SeedSpec seed_;
  std::size_t first_step_;
  std::size_t n_steps_;
  std::vector<double> draws_;
  std::vector<double> scenarios_;  // index ((t * 3) + channel) * n_scenarios + scenario
};

}  // namespace tumorpic::detail

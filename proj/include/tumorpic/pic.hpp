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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tumorpic/grid.hpp"
#include "tumorpic/measures.hpp"
#include "tumorpic/model.hpp"
#include "tumorpic/pic_config.hpp"
#include "tumorpic/rng.hpp"
#include "tumorpic/simulate.hpp"

namespace tumorpic {

// path cost / lambda.
double path_action(const TrajectoryBundle& tr, double lambda, const ModelParams& p);

// Normalised exp(-(S_i - min S)). Throws DomainError on an empty or
// non-finite input.
std::vector<double> importance_weights(std::span<const double> actions);

struct PlanDiagnostics {
  std::vector<double> cost_trace;  // mean sampled cost per iteration
  bool divergence_warning = false;
};

struct PlanResult {
  ControlSequence plan;
  PlanDiagnostics diagnostics;
};

// True when the trace rises by more than 10% three iterations in a row.
bool divergence_detected(std::span<const double> cost_trace);

// One iteration's worth of sampled rollouts around a base sequence.
struct RolloutBatch {
  std::size_t n_rollouts = 0;
  std::size_t horizon = 0;
  std::vector<double> base;   // horizon
  std::vector<double> eps;    // dose perturbations, index t * n_rollouts + r
  std::vector<double> costs;  // path cost of each rollout

  double perturbation(std::size_t r, std::size_t t) const { return eps[t * n_rollouts + r]; }
};

// Samples cfg.n_rollouts perturbations of `base` (horizon = base.size()
// steps of size grid.dt()) and simulates them from st0 under a frozen
// coupling value.
RolloutBatch sample_batch(const ModelParams& p, const State& st0, const TimeGrid& grid,
                          const PicConfig& cfg, std::span<const double> base,
                          CouplingStat theta, const SeedSpec& seed);

// clamp(base + sum_r w_r eps_r) with w the importance weights of cost / lambda.
ControlSequence weighted_update(const RolloutBatch& batch, double lambda, const ModelParams& p);

// Open-loop plan over min(cfg.k_steps, grid.k_steps) steps of the grid,
// starting at absolute step `first_step`, with the coupling frozen at theta.
PlanResult mppi_plan(const ModelParams& p, const State& st0, const TimeGrid& grid,
                     const PicConfig& cfg, CouplingStat theta, const SeedSpec& seed,
                     std::size_t first_step = 0);

// As above with theta taken from the singleton law at st0.
PlanResult mppi_plan(const ModelParams& p, const State& st0, const TimeGrid& grid,
                     const PicConfig& cfg, const CouplingSpec& coupling, const SeedSpec& seed);

// Receding-horizon control of one path: replan from the observed state at
// every step and apply the first dose. Under a nonzero coupling the path is
// a single-particle ensemble whose own law supplies theta.
TrajectoryBundle mppi_feedback(const ModelParams& p, const State& st0, const TimeGrid& grid,
                               const PicConfig& cfg, const CouplingSpec& coupling,
                               const SeedSpec& seed);

// CSV `step,s,u`.
void write_plan_csv(const std::filesystem::path& path, const ControlSequence& plan,
                    const TimeGrid& grid, std::size_t first_step = 0);
std::string to_json(const PlanDiagnostics& diag);

}  // namespace tumorpic

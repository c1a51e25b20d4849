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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tumorpic/measures.hpp"
#include "tumorpic/model.hpp"
#include "tumorpic/policy.hpp"
#include "tumorpic/simulate.hpp"

namespace tumorpic {

struct CostReport {
  double mean_cost = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  double failure_rate = 0.0;
  double success_rate = 0.0;
  double mean_dose_integral = 0.0;
};

// Running cost rate h(u) = u + e.
double running_cost(double u, const ModelParams& p);

// 0 on success, M on failure; indeterminate states follow
// p.indeterminate_is_failure.
double terminal_cost(const State& st, const ModelParams& p);

// dt * sum(u_i) + e * t + terminal cost. The dose integral uses left
// endpoints; the constant part is integrated exactly.
double path_cost(const TrajectoryBundle& tr, const ModelParams& p);

double dose_integral(const TrajectoryBundle& tr);

// Per-sample outcome of a Monte Carlo cost evaluation.
struct CostSamples {
  std::vector<double> costs;
  std::vector<double> dose_integrals;
  std::vector<TerminalClass> terminals;
};

// n_samples paths from st0. With a zero coupling, sample i is an independent
// rollout on stream (master_seed, i); otherwise the samples form one
// interacting ensemble with the same stream assignment.
CostSamples sample_costs(const ModelParams& p, const Policy& policy, const State& st0,
                         const TimeGrid& grid, const CouplingSpec& coupling,
                         std::size_t n_samples, std::uint64_t master_seed);

CostReport summarize(const CostSamples& samples, const ModelParams& p);

// Whether a terminal class is charged the failure penalty.
bool charged_as_failure(TerminalClass c, const ModelParams& p);

CostReport estimate_J(const ModelParams& p, const Policy& policy, const State& st0,
                      const TimeGrid& grid, const CouplingSpec& coupling,
                      std::size_t n_samples, std::uint64_t master_seed);

// Largest deviation, over the recorded steps, between the path and the
// unprojected Euler-Maruyama sum st0 + sum(drift*dt + diffusion*dW). Zero
// when no step was clamped.
double lagrangian_residual(const TrajectoryBundle& tr, const ModelParams& p,
                           std::span<const double> theta_path);

std::string to_json(const CostReport& report);

}  // namespace tumorpic

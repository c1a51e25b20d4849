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
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "tumorpic/grid.hpp"
#include "tumorpic/model.hpp"
#include "tumorpic/pic_config.hpp"
#include "tumorpic/rng.hpp"

namespace tumorpic {

struct ValueGrid;

// Tag deriving a trajectory's planner seed from its noise seed.
inline constexpr std::uint64_t kPlannerSeedTag = 0x504c414e;

struct ZeroPolicy {};

struct ConstantPolicy {
  double dose = 0.0;
};

// Doses `high` while the GLY fraction exceeds x2_star, `low` otherwise.
struct ThresholdPolicy {
  double x2_star = 0.5;
  double low = 0.0;
  double high = 0.0;
};

// Dose per grid step, indexed by absolute step.
struct OpenLoopPolicy {
  std::vector<double> doses;
};

// Bang-bang feedback read off a solved value grid.
struct HjbFeedbackPolicy {
  std::shared_ptr<const ValueGrid> grid;
};

// Receding-horizon MPPI: replans from the observed state at every step.
struct MppiFeedbackPolicy {
  PicConfig config;
};

using Policy = std::variant<ZeroPolicy, ConstantPolicy, ThresholdPolicy, OpenLoopPolicy,
                            HjbFeedbackPolicy, MppiFeedbackPolicy>;

std::string describe(const Policy& policy);

// Per-trajectory evaluation state. Stateless policies just forward; the
// MPPI policy keeps its warm-start plan and planner noise here.
class PolicySession {
 public:
  // `grid` is the grid the trajectory runs on; its step 0 sits at absolute
  // step `first_step` of the experiment.
  PolicySession(const Policy& policy, const ModelParams& params, const TimeGrid& grid,
                std::size_t first_step, SeedSpec seed);
  ~PolicySession();
  PolicySession(PolicySession&&) noexcept;
  PolicySession& operator=(PolicySession&&) noexcept;

  // Dose for the current state at local step `step`.
  double dose(const State& st, std::size_t step, CouplingStat theta);

 private:
  struct MppiState;
  const Policy* policy_;
  const ModelParams* params_;
  TimeGrid grid_;
  std::size_t first_step_;
  SeedSpec seed_;
  std::unique_ptr<MppiState> mppi_;
};

}  // namespace tumorpic

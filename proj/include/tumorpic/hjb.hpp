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
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tumorpic/cost.hpp"
#include "tumorpic/measures.hpp"
#include "tumorpic/model.hpp"
#include "tumorpic/policy.hpp"

namespace tumorpic {

// Discretisation of the frozen-coupling (theta = 0) value function.
struct HjbGridSpec {
  std::size_t nx1 = 129;
  std::size_t nx2 = 129;
  std::size_t n_intervals = 500;  // stored time layers minus one
  std::size_t substeps = 0;       // explicit sweeps per stored interval; 0 = smallest stable
  double c_stab = 0.9;            // bound on the explicit scheme's step ratio

  void validate() const;
};

struct ValueGrid {
  ModelParams params;
  std::size_t nx1 = 0;
  std::size_t nx2 = 0;
  std::size_t nt = 0;       // stored layers; layer l sits at time l * dt
  double horizon = 0.0;
  double dt = 0.0;          // spacing of stored layers
  double dx1 = 0.0;
  double dx2 = 0.0;
  std::size_t substeps = 0;  // sweeps between stored layers
  double sweep_dt = 0.0;
  std::vector<double> values;  // index (l * nx1 + i1) * nx2 + i2

  double at(std::size_t layer, std::size_t i1, std::size_t i2) const {
    return values[(layer * nx1 + i1) * nx2 + i2];
  }
  std::span<const double> layer(std::size_t l) const {
    return {values.data() + l * nx1 * nx2, nx1 * nx2};
  }
  // Bilinear interpolation in a stored layer.
  double interpolate(std::size_t layer, const State& st) const;
};

// Largest sweep step the stability bound allows on this grid.
double hjb_max_stable_dt(const ModelParams& p, const HjbGridSpec& spec);

// Backward explicit sweeps from the terminal cost at `horizon` to 0.
// Throws StabilityError if the requested substeps violate the step bound.
ValueGrid hjb_solve(const ModelParams& p, const HjbGridSpec& spec, double horizon);

// Same, starting from the given terminal layer (nx1 * nx2 values).
ValueGrid hjb_solve_from(const ModelParams& p, const HjbGridSpec& spec, double horizon,
                         std::span<const double> terminal);

// 1 - x2 (1 - x2) dV/dx2 at a node (backward difference in x2). The
// Hamiltonian's dose term is u times this coefficient.
double control_coefficient(const ValueGrid& vg, std::size_t layer, std::size_t i1,
                           std::size_t i2);

// Bang-bang dose at time s and state st, from the nearest stored layer.
double hjb_dose(const ValueGrid& vg, double s, const State& st);

Policy hjb_policy(std::shared_ptr<const ValueGrid> vg);

struct ValueCheck {
  double value = 0.0;        // V(0, st0)
  CostReport report;         // Monte Carlo cost of the feedback policy
  double discrepancy = 0.0;  // |value - report.mean_cost|
};

// Rolls the feedback policy out on the stored-layer time grid. Throws
// ScopeError for a nonzero coupling.
ValueCheck value_vs_rollout(const ModelParams& p, std::shared_ptr<const ValueGrid> vg,
                            const State& st0, std::size_t n_samples, std::uint64_t seed,
                            const CouplingSpec& coupling = {});

// |V_fine(0, st0) - V_coarse(0, st0)|: truncation estimate for the fine grid.
double richardson_estimate(const ValueGrid& fine, const ValueGrid& coarse, const State& st0);

// CSV `i1,i2,layer,value` (every `layer_stride`-th layer plus the last) and
// a JSON header with the grid metadata.
void write_value_grid_csv(const std::filesystem::path& path, const ValueGrid& vg,
                          std::size_t layer_stride = 1);
std::string value_grid_header_json(const ValueGrid& vg, std::size_t layer_stride = 1);
// Reads a grid written by the two functions above (header + full CSV).
ValueGrid read_value_grid(const std::filesystem::path& header_json,
                          const std::filesystem::path& csv);

}  // namespace tumorpic

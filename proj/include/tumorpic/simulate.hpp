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

#include <array>
#include <concepts>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "tumorpic/grid.hpp"
#include "tumorpic/measures.hpp"
#include "tumorpic/model.hpp"
#include "tumorpic/policy.hpp"
#include "tumorpic/rng.hpp"

namespace tumorpic {

using NoiseIncrement = std::array<double, 3>;  // (dB_g, dB_d, dB_v)

struct Ensemble {
  std::vector<State> particles;
};

// One discretised path with everything needed to audit it afterwards.
struct TrajectoryBundle {
  TimeGrid grid;
  std::size_t first_step = 0;          // absolute index of local step 0
  std::vector<State> states;           // k + 1
  std::vector<double> controls;        // k
  std::vector<NoiseIncrement> noise;   // k
  std::vector<double> theta;           // k, coupling value used at each step
  std::vector<double> running_costs;   // k, rate u + e
  TerminalClass terminal = TerminalClass::Indeterminate;
  double total_cost = 0.0;
};

// An SDE dX = drift(X) ds + diffusion(X) dB with a projection applied after
// every step. The tumour model is one instance; tests plug in others.
template <class S>
concept SdeSystem = requires(const S& sys, const typename S::Vector& x) {
  { S::kNoiseDim } -> std::convertible_to<std::size_t>;
  { sys.drift(x) } -> std::same_as<typename S::Vector>;
  { sys.diffusion(x) } -> std::same_as<typename S::Matrix>;
  { sys.project(x) } -> std::same_as<typename S::Vector>;
};

// x + drift*dt + diffusion*dW, then projected.
template <SdeSystem S>
typename S::Vector euler_maruyama(const S& sys, const typename S::Vector& x, double dt,
                                  std::span<const double, S::kNoiseDim> dW) {
  const auto mu = sys.drift(x);
  const auto sig = sys.diffusion(x);
  typename S::Vector next = x;
  for (std::size_t i = 0; i < next.size(); ++i) {
    double shock = 0.0;
    for (std::size_t j = 0; j < S::kNoiseDim; ++j) shock += sig[i][j] * dW[j];
    next[i] = x[i] + mu[i] * dt + shock;
  }
  return sys.project(next);
}

// The tumour SDE at a fixed dose and coupling value, clamped to [0,1]^2.
struct TumorSde {
  using Vector = std::array<double, 2>;
  using Matrix = DiffusionMatrix;
  static constexpr std::size_t kNoiseDim = 3;

  const ModelParams* params;
  double dose;
  CouplingStat theta;

  Vector drift(const Vector& x) const;
  Matrix diffusion(const Vector& x) const;
  Vector project(const Vector& x) const;
};

State em_step(const State& st, double u, CouplingStat theta, double dt,
              const NoiseIncrement& dW, const ModelParams& p);

// Brownian increments for local steps [0, k) of a path whose step 0 is
// absolute step `first_step`. Step a uses block a of the stream.
std::vector<NoiseIncrement> brownian_increments(const SeedSpec& seed, std::size_t first_step,
                                                std::size_t k, double dt);

// One controlled path. theta_path holds the coupling value per step.
TrajectoryBundle rollout(const ModelParams& p, const Policy& policy, const State& st0,
                         const TimeGrid& grid, std::span<const double> theta_path,
                         const SeedSpec& seed, std::size_t first_step = 0);

// Interacting particles: at every step the coupling statistic of the current
// ensemble is frozen, then each particle i advances with stream
// (seed.master_seed, i). Returns the k + 1 ensembles.
std::vector<Ensemble> particle_evolve(const ModelParams& p, const Policy& policy,
                                      const Ensemble& ens0, const TimeGrid& grid,
                                      const CouplingSpec& coupling, const SeedSpec& seed);

// Same dynamics as particle_evolve, keeping each particle's full record.
std::vector<TrajectoryBundle> particle_bundles(const ModelParams& p, const Policy& policy,
                                               const Ensemble& ens0, const TimeGrid& grid,
                                               const CouplingSpec& coupling,
                                               const SeedSpec& seed);

// Noise-free replicator dynamics dm_i/ds = pi_i m_i for the GLY-vs-aerobic and
// DEF-vs-VOP competitions, integrated with classical RK4 and mapped back to
// (x1, x2). Ignores volatilities and coupling.
std::vector<State> replicator_ode(const ModelParams& p, const State& st0, const TimeGrid& grid,
                                  double u_const);

// CSV: step,s,x1,x2,u,dW_g,dW_d,dW_v,running_cost (the last row carries the
// terminal state with empty control fields).
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryBundle& tr);

}  // namespace tumorpic

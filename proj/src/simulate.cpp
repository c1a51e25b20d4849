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

#include "tumorpic/simulate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/os.h>

#include "tumorpic/cost.hpp"
#include "tumorpic/errors.hpp"
#include "tumorpic/parallel.hpp"

namespace tumorpic {

void TimeGrid::validate() const {
  if (!(horizon_t > 0.0) || !std::isfinite(horizon_t)) {
    throw DomainError("grid", "horizon_t must be positive and finite");
  }
  if (k_steps < 1) throw DomainError("grid", "k_steps must be >= 1");
}

TumorSde::Vector TumorSde::drift(const Vector& x) const {
  return tumorpic::drift({x[0], x[1]}, dose, theta, *params);
}

TumorSde::Matrix TumorSde::diffusion(const Vector& x) const {
  return tumorpic::diffusion({x[0], x[1]}, theta, *params);
}

TumorSde::Vector TumorSde::project(const Vector& x) const {
  return {std::clamp(x[0], 0.0, 1.0), std::clamp(x[1], 0.0, 1.0)};
}

State em_step(const State& st, double u, CouplingStat theta, double dt, const NoiseIncrement& dW,
              const ModelParams& p) {
  if (!(dt > 0.0)) throw DomainError("dt", "time step must be positive");
  for (double w : dW) {
    if (!std::isfinite(w)) throw DomainError("noise", "non-finite Brownian increment");
  }
  const TumorSde sys{&p, u, theta};
  const auto next = euler_maruyama(sys, {st.x1, st.x2}, dt, std::span<const double, 3>(dW));
  return {next[0], next[1]};
}

std::vector<NoiseIncrement> brownian_increments(const SeedSpec& seed, std::size_t first_step,
                                                std::size_t k, double dt) {
  std::vector<double> z(4 * k);
  normal_blocks(seed, first_step, z);
  const double scale = std::sqrt(dt);
  std::vector<NoiseIncrement> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = {scale * z[4 * i], scale * z[4 * i + 1], scale * z[4 * i + 2]};
  }
  return out;
}

namespace {

double checked_dose(double u, const ModelParams& p) {
  if (!(u >= 0.0 && u <= p.u_max)) {
    throw DomainError("dose", fmt::format("policy returned dose {} outside [0, {}]", u, p.u_max));
  }
  return u;
}

TrajectoryBundle empty_bundle(const TimeGrid& grid, std::size_t first_step, const State& st0) {
  TrajectoryBundle tr;
  tr.grid = grid;
  tr.first_step = first_step;
  tr.states.reserve(grid.k_steps + 1);
  tr.states.push_back(st0);
  tr.controls.reserve(grid.k_steps);
  tr.theta.reserve(grid.k_steps);
  tr.running_costs.reserve(grid.k_steps);
  return tr;
}

void finish_bundle(TrajectoryBundle& tr, const ModelParams& p) {
  tr.terminal = classify_terminal(tr.states.back(), p);
  tr.total_cost = path_cost(tr, p);
}

}  // namespace

TrajectoryBundle rollout(const ModelParams& p, const Policy& policy, const State& st0,
                         const TimeGrid& grid, std::span<const double> theta_path,
                         const SeedSpec& seed, std::size_t first_step) {
  grid.validate();
  require_valid(st0);
  if (theta_path.size() != grid.k_steps) {
    throw DomainError("theta", fmt::format("theta path has {} entries, grid has {} steps",
                                           theta_path.size(), grid.k_steps));
  }
  const double dt = grid.dt();
  TrajectoryBundle tr = empty_bundle(grid, first_step, st0);
  tr.noise = brownian_increments(seed, first_step, grid.k_steps, dt);
  PolicySession session(policy, p, grid, first_step, seed.child(kPlannerSeedTag));
  for (std::size_t i = 0; i < grid.k_steps; ++i) {
    const CouplingStat theta{theta_path[i]};
    const double u = checked_dose(session.dose(tr.states[i], i, theta), p);
    tr.controls.push_back(u);
    tr.theta.push_back(theta.value);
    tr.running_costs.push_back(running_cost(u, p));
    tr.states.push_back(em_step(tr.states[i], u, theta, dt, tr.noise[i], p));
  }
  finish_bundle(tr, p);
  return tr;
}

std::vector<TrajectoryBundle> particle_bundles(const ModelParams& p, const Policy& policy,
                                               const Ensemble& ens0, const TimeGrid& grid,
                                               const CouplingSpec& coupling,
                                               const SeedSpec& seed) {
  grid.validate();
  const std::size_t n = ens0.particles.size();
  if (n == 0) throw DomainError("ensemble", "ensemble has no particles");
  for (const State& s : ens0.particles) require_valid(s);

  const double dt = grid.dt();
  std::vector<TrajectoryBundle> bundles(n);
  std::vector<PolicySession> sessions;
  sessions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SeedSpec stream{seed.master_seed, i};
    bundles[i] = empty_bundle(grid, 0, ens0.particles[i]);
    sessions.emplace_back(policy, p, grid, 0, stream.child(kPlannerSeedTag));
  }
  parallel_for(n, [&](std::size_t i) {
    bundles[i].noise = brownian_increments(SeedSpec{seed.master_seed, i}, 0, grid.k_steps, dt);
  });

  std::vector<State> snapshot(n);
  for (std::size_t step = 0; step < grid.k_steps; ++step) {
    for (std::size_t i = 0; i < n; ++i) snapshot[i] = bundles[i].states[step];
    const CouplingStat theta = coupling_stat(snapshot, coupling);
    parallel_for(n, [&](std::size_t i) {
      TrajectoryBundle& tr = bundles[i];
      const double u = checked_dose(sessions[i].dose(tr.states[step], step, theta), p);
      tr.controls.push_back(u);
      tr.theta.push_back(theta.value);
      tr.running_costs.push_back(running_cost(u, p));
      tr.states.push_back(em_step(tr.states[step], u, theta, dt, tr.noise[step], p));
    });
  }
  for (auto& tr : bundles) finish_bundle(tr, p);
  return bundles;
}

std::vector<Ensemble> particle_evolve(const ModelParams& p, const Policy& policy,
                                      const Ensemble& ens0, const TimeGrid& grid,
                                      const CouplingSpec& coupling, const SeedSpec& seed) {
  const auto bundles = particle_bundles(p, policy, ens0, grid, coupling, seed);
  std::vector<Ensemble> out(grid.k_steps + 1);
  for (std::size_t step = 0; step <= grid.k_steps; ++step) {
    out[step].particles.reserve(bundles.size());
    for (const auto& tr : bundles) out[step].particles.push_back(tr.states[step]);
  }
  return out;
}

namespace {

// Counts (m_g, m_a, m_d, m_v): GLY and aerobic masses, and the DEF / VOP
// split of the aerobic compartment. Each pair is a two-type replicator
// system; the aerobic fitness is the VOP-share-weighted mean of its types.
using Counts = std::array<double, 4>;

struct Fitness {
  double gly, aerobic, def, vop;
};

Fitness fitness(const Counts& m, double u, const ModelParams& p) {
  const double group = static_cast<double>(p.n_neighbors + 1);
  const double aerobic_total = m[2] + m[3];
  const double x1 = aerobic_total > 0.0 ? m[3] / aerobic_total : 0.0;
  const double vop_advantage = p.beta_v / group * p.vop_benefit_factor - p.cost_c;
  const double def = (p.beta_v - p.cost_c) * x1 - x1 * vop_advantage;
  const double vop = def + vop_advantage;
  return {p.beta_alpha / group - u, x1 * vop + (1.0 - x1) * def, def, vop};
}

Counts rate(const Counts& m, double u, const ModelParams& p) {
  const Fitness f = fitness(m, u, p);
  return {f.gly * m[0], f.aerobic * m[1], f.def * m[2], f.vop * m[3]};
}

Counts axpy(const Counts& m, double h, const Counts& k) {
  return {m[0] + h * k[0], m[1] + h * k[1], m[2] + h * k[2], m[3] + h * k[3]};
}

State to_state(const Counts& m) {
  return {m[3] / (m[2] + m[3]), m[0] / (m[0] + m[1])};
}

}  // namespace

std::vector<State> replicator_ode(const ModelParams& p, const State& st0, const TimeGrid& grid,
                                  double u_const) {
  grid.validate();
  require_valid(st0);
  const double h = grid.dt();
  Counts m{st0.x2, 1.0 - st0.x2, 1.0 - st0.x1, st0.x1};
  std::vector<State> path;
  path.reserve(grid.k_steps + 1);
  path.push_back(st0);
  for (std::size_t i = 0; i < grid.k_steps; ++i) {
    const Counts k1 = rate(m, u_const, p);
    const Counts k2 = rate(axpy(m, h / 2, k1), u_const, p);
    const Counts k3 = rate(axpy(m, h / 2, k2), u_const, p);
    const Counts k4 = rate(axpy(m, h, k3), u_const, p);
    for (std::size_t c = 0; c < 4; ++c) {
      m[c] += h / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    }
    // Fitness depends on fractions only, so rescaling each pair is exact.
    const double gly_pair = m[0] + m[1];
    const double aer_pair = m[2] + m[3];
    m = {m[0] / gly_pair, m[1] / gly_pair, m[2] / aer_pair, m[3] / aer_pair};
    path.push_back(to_state(m));
  }
  return path;
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryBundle& tr) {
  auto out = fmt::output_file(path.string());
  out.print("step,s,x1,x2,u,dW_g,dW_d,dW_v,running_cost\n");
  const double dt = tr.grid.dt();
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const std::size_t step = tr.first_step + i;
    const State& st = tr.states[i];
    if (i < tr.controls.size()) {
      out.print("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", step,
                static_cast<double>(step) * dt, st.x1, st.x2, tr.controls[i], tr.noise[i][0],
                tr.noise[i][1], tr.noise[i][2], tr.running_costs[i]);
    } else {
      out.print("{},{:.17g},{:.17g},{:.17g},,,,,\n", step, static_cast<double>(step) * dt, st.x1,
                st.x2);
    }
  }
}

}  // namespace tumorpic

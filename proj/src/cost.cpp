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

#include "tumorpic/cost.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "tumorpic/errors.hpp"
#include "tumorpic/parallel.hpp"

namespace tumorpic {

double running_cost(double u, const ModelParams& p) { return u + p.stabilization_weight_e; }

bool charged_as_failure(TerminalClass c, const ModelParams& p) {
  return c == TerminalClass::Failure ||
         (c == TerminalClass::Indeterminate && p.indeterminate_is_failure);
}

double terminal_cost(const State& st, const ModelParams& p) {
  return charged_as_failure(classify_terminal(st, p), p) ? p.failure_penalty_M : 0.0;
}

double dose_integral(const TrajectoryBundle& tr) {
  double total = 0.0;
  for (double u : tr.controls) total += u;
  return total * tr.grid.dt();
}

double path_cost(const TrajectoryBundle& tr, const ModelParams& p) {
  if (tr.controls.size() != tr.grid.k_steps || tr.states.size() != tr.grid.k_steps + 1) {
    throw DomainError("bundle", "trajectory arrays disagree with its grid");
  }
  return dose_integral(tr) + p.stabilization_weight_e * tr.grid.horizon_t +
         terminal_cost(tr.states.back(), p);
}

CostSamples sample_costs(const ModelParams& p, const Policy& policy, const State& st0,
                         const TimeGrid& grid, const CouplingSpec& coupling,
                         std::size_t n_samples, std::uint64_t master_seed) {
  CostSamples out;
  out.costs.resize(n_samples);
  out.dose_integrals.resize(n_samples);
  out.terminals.resize(n_samples);
  auto record = [&](std::size_t i, const TrajectoryBundle& tr) {
    out.costs[i] = tr.total_cost;
    out.dose_integrals[i] = dose_integral(tr);
    out.terminals[i] = tr.terminal;
  };
  if (coupling.is_zero()) {
    const std::vector<double> theta(grid.k_steps, 0.0);
    parallel_for(n_samples, [&](std::size_t i) {
      record(i, rollout(p, policy, st0, grid, theta, SeedSpec{master_seed, i}));
    });
  } else {
    Ensemble ens{std::vector<State>(n_samples, st0)};
    const auto bundles = particle_bundles(p, policy, ens, grid, coupling, SeedSpec{master_seed, 0});
    for (std::size_t i = 0; i < n_samples; ++i) record(i, bundles[i]);
  }
  return out;
}

CostReport summarize(const CostSamples& samples, const ModelParams& p) {
  const std::size_t n = samples.costs.size();
  CostReport r;
  r.n_samples = n;
  if (n == 0) return r;
  // Shifting by the first sample keeps identical samples exact.
  const double shift = samples.costs.front();
  double acc = 0.0;
  for (double c : samples.costs) acc += c - shift;
  r.mean_cost = shift + acc / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double c : samples.costs) ss += (c - r.mean_cost) * (c - r.mean_cost);
    r.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  std::size_t fails = 0, wins = 0;
  for (auto t : samples.terminals) {
    if (t == TerminalClass::Success) ++wins;
    if (charged_as_failure(t, p)) ++fails;
  }
  r.failure_rate = static_cast<double>(fails) / static_cast<double>(n);
  r.success_rate = static_cast<double>(wins) / static_cast<double>(n);
  double dose = 0.0;
  for (double d : samples.dose_integrals) dose += d;
  r.mean_dose_integral = dose / static_cast<double>(n);
  return r;
}

CostReport estimate_J(const ModelParams& p, const Policy& policy, const State& st0,
                      const TimeGrid& grid, const CouplingSpec& coupling,
                      std::size_t n_samples, std::uint64_t master_seed) {
  if (n_samples < 2) throw DomainError("samples", "estimate_J needs at least two samples");
  return summarize(sample_costs(p, policy, st0, grid, coupling, n_samples, master_seed), p);
}

double lagrangian_residual(const TrajectoryBundle& tr, const ModelParams& p,
                           std::span<const double> theta_path) {
  const std::size_t k = tr.grid.k_steps;
  if (tr.noise.size() != k) throw DomainError("bundle", "trajectory carries no noise record");
  if (theta_path.size() != k) throw DomainError("theta", "theta path length differs from grid");
  const double dt = tr.grid.dt();
  double worst = 0.0;
  double acc1 = tr.states[0].x1;
  double acc2 = tr.states[0].x2;
  for (std::size_t i = 0; i < k; ++i) {
    const CouplingStat theta{theta_path[i]};
    const Vec2 mu = drift(tr.states[i], tr.controls[i], theta, p);
    const DiffusionMatrix sig = diffusion(tr.states[i], theta, p);
    const auto& dW = tr.noise[i];
    acc1 += mu[0] * dt + (sig[0][0] * dW[0] + sig[0][1] * dW[1] + sig[0][2] * dW[2]);
    acc2 += mu[1] * dt + (sig[1][0] * dW[0] + sig[1][1] * dW[1] + sig[1][2] * dW[2]);
    worst = std::max(worst, std::hypot(tr.states[i + 1].x1 - acc1, tr.states[i + 1].x2 - acc2));
  }
  return worst;
}

std::string to_json(const CostReport& r) {
  nlohmann::ordered_json j;
  j["mean_cost"] = r.mean_cost;
  j["std_error"] = r.std_error;
  j["n_samples"] = r.n_samples;
  j["failure_rate"] = r.failure_rate;
  j["success_rate"] = r.success_rate;
  j["mean_dose_integral"] = r.mean_dose_integral;
  return j.dump(2);
}

}  // namespace tumorpic

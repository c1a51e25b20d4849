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

#include "tumorpic/pic.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/os.h>
#include <json.hpp>

#include "planner.hpp"
#include "tumorpic/cost.hpp"
#include "tumorpic/errors.hpp"
#include "tumorpic/parallel.hpp"

namespace tumorpic {

namespace {

constexpr std::uint64_t kScenarioTag = 0x5343454e;
constexpr std::uint64_t kProposalTag = 0x50524f50;
constexpr std::size_t kChunk = 64;

double clamp_dose(double u, double u_max) { return u < 0.0 ? 0.0 : (u > u_max ? u_max : u); }

bool noise_free(const ModelParams& p, double theta) {
  return p.sigma_g == 0.0 && p.sigma_d == 0.0 && p.sigma_v == 0.0 && theta == 0.0;
}

}  // namespace

void PicConfig::validate() const {
  auto fail = [](const char* what) { throw DomainError("pic", fmt::format("PicConfig: {}", what)); };
  if (k_steps < 1) fail("k_steps must be >= 1");
  if (n_rollouts < 2) fail("n_rollouts must be >= 2");
  if (n_scenarios < 1 || n_rollouts % n_scenarios != 0 || n_rollouts / n_scenarios < 2) {
    fail("n_scenarios must divide n_rollouts into at least two groups");
  }
  if (!(temperature_lambda > 0.0) || !std::isfinite(temperature_lambda)) {
    fail("temperature_lambda must be > 0");
  }
  if (!(proposal_std > 0.0) || !std::isfinite(proposal_std)) fail("proposal_std must be > 0");
  if (perturbation_block < 1) fail("perturbation_block must be >= 1");
  if (n_iterations < 1) fail("n_iterations must be >= 1");
  if (n_iterations_replan < 1) fail("n_iterations_replan must be >= 1");
  if (!u_init.empty() && u_init.size() != k_steps) fail("u_init must be empty or hold k_steps doses");
}

double path_action(const TrajectoryBundle& tr, double lambda, const ModelParams& p) {
  if (!(lambda > 0.0)) throw DomainError("lambda", "temperature must be positive");
  return path_cost(tr, p) / lambda;
}

std::vector<double> importance_weights(std::span<const double> actions) {
  if (actions.empty()) throw DomainError("weights", "no actions to weight");
  double lo = actions[0];
  for (double a : actions) {
    if (!std::isfinite(a)) throw DomainError("weights", "non-finite path action");
    lo = std::min(lo, a);
  }
  std::vector<double> w(actions.size());
  double total = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    w[i] = std::exp(-(actions[i] - lo));
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

bool divergence_detected(std::span<const double> trace) {
  int run = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    run = trace[i] > 1.1 * trace[i - 1] ? run + 1 : 0;
    if (run >= 3) return true;
  }
  return false;
}

namespace detail {

Planner::Planner(const ModelParams& p, const PicConfig& cfg, double dt, const SeedSpec& seed,
                 std::size_t first_step, std::size_t n_steps)
    : p_(&p), coefs_(p), cfg_(cfg), dt_(dt), seed_(seed), first_step_(first_step),
      n_steps_(n_steps) {
  cfg_.validate();
}

// Simulates rollouts [0, count) with doses clamp(u + eps[t * count + r])
// (eps may be null) and writes their path costs. Rollout r follows scenario
// r % n_scen of `bank`, laid out as ((t * 3) + channel) * n_scen + scenario;
// a null bank means zero noise.
void Planner::simulate(const State& x, double theta, std::size_t step,
                       std::span<const double> u, const double* eps, const double* bank,
                       std::size_t n_scen, std::size_t count, double* costs) const {
  const std::size_t H = u.size();
  if (step < first_step_ || step + H > first_step_ + n_steps_) {
    throw DomainError("planner", "planning window leaves the planner's step range");
  }
  const DynamicsCoefs c = coefs_;
  const double dt = dt_;
  const double u_max = p_->u_max;
  const double th = theta;
  const double fixed = p_->stabilization_weight_e * (static_cast<double>(H) * dt);
  static const double zeros[kChunk] = {};

  parallel_for((count + kChunk - 1) / kChunk, [&](std::size_t chunk) {
    const std::size_t lo = chunk * kChunk;
    const std::size_t n = std::min(count, lo + kChunk) - lo;
    double x1[kChunk], x2[kChunk], acc[kChunk];
    std::size_t sc[kChunk];
    for (std::size_t i = 0; i < n; ++i) {
      x1[i] = x.x1;
      x2[i] = x.x2;
      acc[i] = 0.0;
      sc[i] = bank ? (lo + i) % n_scen : 0;
    }
    for (std::size_t t = 0; t < H; ++t) {
      const double ut = u[t];
      const double* e = eps ? eps + t * count + lo : zeros;
      const double* w0 = bank ? bank + (t * 3 + 0) * n_scen : zeros;
      const double* w1 = bank ? bank + (t * 3 + 1) * n_scen : zeros;
      const double* w2 = bank ? bank + (t * 3 + 2) * n_scen : zeros;
      double g0[kChunk], g1[kChunk], g2[kChunk];
      for (std::size_t i = 0; i < n; ++i) {
        g0[i] = w0[sc[i]];
        g1[i] = w1[sc[i]];
        g2[i] = w2[sc[i]];
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double a = x1[i];
        const double b = x2[i];
        const double uu = clamp_dose(ut + e[i], u_max);
        acc[i] += uu;
        const double mu1 = drift_x1(c, a, th);
        const double mu2 = drift_x2(c, a, b, uu, th);
        double s[2][3];
        diffusion_rows(c, a, b, th, s);
        const double d0 = g0[i], d1 = g1[i], d2 = g2[i];
        const double n1 = a + mu1 * dt + (s[0][0] * d0 + s[0][1] * d1 + s[0][2] * d2);
        const double n2 = b + mu2 * dt + (s[1][0] * d0 + s[1][1] * d1 + s[1][2] * d2);
        x1[i] = n1 < 0.0 ? 0.0 : (n1 > 1.0 ? 1.0 : n1);
        x2[i] = n2 < 0.0 ? 0.0 : (n2 > 1.0 ? 1.0 : n2);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      costs[lo + i] = acc[i] * dt + fixed + terminal_cost({x1[i], x2[i]}, *p_);
    }
  });
}

void Planner::sample(const State& x, double theta, std::size_t step,
                     std::span<const double> base, std::size_t it, RolloutBatch& out) {
  const std::size_t R = cfg_.n_rollouts;
  const std::size_t S = cfg_.n_scenarios;
  const std::size_t G = R / S;
  const std::size_t H = base.size();
  const SeedSpec key = seed_.child(kProposalTag).child(step).child(it);

  // G distinct perturbation sequences, each shared by S consecutive rollouts
  // and held constant over blocks of perturbation_block steps.
  const std::size_t L = cfg_.perturbation_block;
  const std::size_t blocks = (H + L - 1) / L;
  draws_.resize(blocks * G);
  normals(key, 0, draws_);
  out.n_rollouts = R;
  out.horizon = H;
  out.base.assign(base.begin(), base.end());
  out.eps.resize(H * R);
  for (std::size_t t = 0; t < H; ++t) {
    for (std::size_t r = 0; r < R; ++r) {
      out.eps[t * R + r] = cfg_.proposal_std * draws_[(t / L) * G + r / S];
    }
  }

  // S Brownian scenarios, fresh for every iteration; rollout r follows
  // scenario r % S, so every group sees the same S scenarios.
  const SeedSpec scen_seed = seed_.child(kScenarioTag).child(step).child(it);
  const double scale = std::sqrt(dt_);
  draws_.resize(4 * H);
  scenarios_.resize(H * 3 * S);
  for (std::size_t sc = 0; sc < S; ++sc) {
    normal_blocks(scen_seed.child(sc), 0, draws_);
    for (std::size_t t = 0; t < H; ++t) {
      for (std::size_t c = 0; c < 3; ++c) scenarios_[(t * 3 + c) * S + sc] = scale * draws_[4 * t + c];
    }
  }

  out.costs.resize(R);
  simulate(x, theta, step, base, out.eps.data(), scenarios_.data(), S, R, out.costs.data());
  if (S > 1) {
    for (std::size_t g = 0; g < R; g += S) {
      double mean = 0.0;
      for (std::size_t k = 0; k < S; ++k) mean += out.costs[g + k];
      mean /= static_cast<double>(S);
      for (std::size_t k = 0; k < S; ++k) out.costs[g + k] = mean;
    }
  }
}

double Planner::evaluate(const State& x, double theta, std::size_t step,
                         std::span<const double> u) {
  double cost = 0.0;
  simulate(x, theta, step, u, nullptr, nullptr, 1, 1, &cost);
  return cost;
}

void Planner::refine(const State& x, double theta, std::size_t step, std::vector<double>& u,
                     std::size_t iterations, PlanDiagnostics* diag) {
  const bool monotone = cfg_.monotone_deterministic && noise_free(*p_, theta);
  double incumbent = monotone ? evaluate(x, theta, step, u) : 0.0;
  RolloutBatch batch;
  for (std::size_t it = 0; it < iterations; ++it) {
    sample(x, theta, step, u, it, batch);
    double mean = 0.0;
    for (double c : batch.costs) mean += c;
    mean /= static_cast<double>(batch.n_rollouts);
    if (diag) diag->cost_trace.push_back(mean);
    ControlSequence next = weighted_update(batch, cfg_.temperature_lambda, *p_);
    if (monotone) {
      const double cand = evaluate(x, theta, step, next.doses);
      if (!(cand < incumbent)) continue;
      incumbent = cand;
    }
    u = std::move(next.doses);
  }
  if (diag) diag->divergence_warning = divergence_detected(diag->cost_trace);
}

}  // namespace detail

ControlSequence weighted_update(const RolloutBatch& batch, double lambda, const ModelParams& p) {
  if (!(lambda > 0.0)) throw DomainError("lambda", "temperature must be positive");
  const std::size_t R = batch.n_rollouts;
  std::vector<double> actions(R);
  for (std::size_t r = 0; r < R; ++r) actions[r] = batch.costs[r] / lambda;
  const std::vector<double> w = importance_weights(actions);
  ControlSequence out;
  out.doses.resize(batch.horizon);
  for (std::size_t t = 0; t < batch.horizon; ++t) {
    const double* e = batch.eps.data() + t * R;
    double shift = 0.0;
    for (std::size_t r = 0; r < R; ++r) shift += w[r] * e[r];
    out.doses[t] = clamp_dose(batch.base[t] + shift, p.u_max);
  }
  return out;
}

RolloutBatch sample_batch(const ModelParams& p, const State& st0, const TimeGrid& grid,
                          const PicConfig& cfg, std::span<const double> base,
                          CouplingStat theta, const SeedSpec& seed) {
  grid.validate();
  require_valid(st0);
  detail::Planner planner(p, cfg, grid.dt(), seed, 0, base.size());
  RolloutBatch batch;
  planner.sample(st0, theta.value, 0, base, 0, batch);
  return batch;
}

std::vector<double> detail::initial_plan(const PicConfig& cfg, const ModelParams& p,
                                         std::size_t horizon) {
  std::vector<double> u(horizon, 0.0);
  for (std::size_t t = 0; t < horizon && t < cfg.u_init.size(); ++t) {
    if (!(cfg.u_init[t] >= 0.0 && cfg.u_init[t] <= p.u_max)) {
      throw DomainError("pic", "u_init dose outside [0, u_max]");
    }
    u[t] = cfg.u_init[t];
  }
  return u;
}

PlanResult mppi_plan(const ModelParams& p, const State& st0, const TimeGrid& grid,
                     const PicConfig& cfg, CouplingStat theta, const SeedSpec& seed,
                     std::size_t first_step) {
  grid.validate();
  cfg.validate();
  require_valid(st0);
  const std::size_t H = std::min(cfg.k_steps, grid.k_steps);
  detail::Planner planner(p, cfg, grid.dt(), seed.child(kPlannerSeedTag), first_step, H);
  PlanResult res;
  res.plan.doses = detail::initial_plan(cfg, p, H);
  planner.refine(st0, theta.value, first_step, res.plan.doses, cfg.n_iterations, &res.diagnostics);
  return res;
}

PlanResult mppi_plan(const ModelParams& p, const State& st0, const TimeGrid& grid,
                     const PicConfig& cfg, const CouplingSpec& coupling, const SeedSpec& seed) {
  const State self[1] = {st0};
  return mppi_plan(p, st0, grid, cfg, coupling_stat(self, coupling), seed);
}

TrajectoryBundle mppi_feedback(const ModelParams& p, const State& st0, const TimeGrid& grid,
                               const PicConfig& cfg, const CouplingSpec& coupling,
                               const SeedSpec& seed) {
  cfg.validate();
  const Policy policy = MppiFeedbackPolicy{cfg};
  if (coupling.is_zero()) {
    const std::vector<double> theta(grid.k_steps, 0.0);
    return rollout(p, policy, st0, grid, theta, seed);
  }
  auto bundles = particle_bundles(p, policy, Ensemble{{st0}}, grid, coupling, seed);
  return std::move(bundles.front());
}

void write_plan_csv(const std::filesystem::path& path, const ControlSequence& plan,
                    const TimeGrid& grid, std::size_t first_step) {
  auto out = fmt::output_file(path.string());
  out.print("step,s,u\n");
  for (std::size_t i = 0; i < plan.doses.size(); ++i) {
    out.print("{},{:.17g},{:.17g}\n", first_step + i, grid.time(first_step + i), plan.doses[i]);
  }
}

std::string to_json(const PlanDiagnostics& diag) {
  nlohmann::ordered_json j;
  j["cost_trace"] = diag.cost_trace;
  j["divergence_warning"] = diag.divergence_warning;
  return j.dump(2);
}

}  // namespace tumorpic

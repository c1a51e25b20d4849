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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <random>
#include <vector>

#include "tumorpic/cost.hpp"
#include "tumorpic/errors.hpp"
#include "tumorpic/hjb.hpp"
#include "tumorpic/parallel.hpp"
#include "tumorpic/pic.hpp"

using namespace tumorpic;

namespace {

PicConfig small_cfg(std::size_t k) {
  PicConfig c;
  c.k_steps = k;
  c.n_rollouts = 128;
  c.n_iterations = 6;
  c.u_init.assign(k, 1.0);
  return c;
}

double dose_of(const RolloutBatch& b, std::size_t r, std::size_t t, double u_max) {
  return std::clamp(b.base[t] + b.perturbation(r, t), 0.0, u_max);
}

}  // namespace

TEST_SUITE("pic") {

TEST_CASE("path action") {
  ModelParams p;
  p.failure_penalty_M = 0.0;
  p.stabilization_weight_e = 0.5;
  TrajectoryBundle tr;
  tr.grid = {4.0, 4};
  tr.controls.assign(4, 0.0);
  tr.states.assign(5, {0.5, 0.5});
  CHECK(path_action(tr, 1.0, p) == 2.0);
  CHECK(path_action(tr, 2.0, p) == 1.0);
  CHECK_THROWS_AS(path_action(tr, 0.0, p), DomainError);
}

TEST_CASE("importance weights") {
  const std::vector<double> eq{3.0, 3.0, 3.0, 3.0};
  for (double w : importance_weights(eq)) CHECK(w == 0.25);
  const std::vector<double> two{0.0, std::log(2.0)};
  const auto w = importance_weights(two);
  CHECK(std::abs(w[0] - 2.0 / 3) < 1e-15);
  CHECK(std::abs(w[1] - 1.0 / 3) < 1e-15);
  CHECK_THROWS_AS(importance_weights(std::vector<double>{0.0, NAN}), DomainError);
  CHECK_THROWS_AS(importance_weights(std::vector<double>{}), DomainError);
  // Large actions must not overflow.
  const auto big = importance_weights(std::vector<double>{1e6, 1e6 + 1, 2e6});
  CHECK(std::abs(big[0] + big[1] + big[2] - 1.0) < 1e-12);
}

TEST_CASE("weights are a probability vector and shift invariant") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(0.0, 50.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> a(1 + rng() % 100);
    for (double& x : a) x = U(rng);
    const auto w = importance_weights(a);
    double total = 0.0;
    for (double x : w) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
      total += x;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    std::vector<double> b = a;
    const double c = U(rng) * 100;
    for (double& x : b) x += c;
    const auto v = importance_weights(b);
    CHECK(std::max_element(w.begin(), w.end()) - w.begin() ==
          std::max_element(v.begin(), v.end()) - v.begin());
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(w[i] - v[i]) < 1e-12);
  }
}

TEST_CASE("divergence detector") {
  CHECK_FALSE(divergence_detected(std::vector<double>{5, 4, 3, 2}));
  CHECK_FALSE(divergence_detected(std::vector<double>{1, 1.2, 1.4, 1.5}));
  CHECK(divergence_detected(std::vector<double>{1, 1.2, 1.4, 1.6}));
  CHECK_FALSE(divergence_detected(std::vector<double>{1, 1.2, 1.4, 1.0, 1.2, 1.4}));
}

TEST_CASE("config validation") {
  PicConfig c;
  CHECK_NOTHROW(c.validate());
  c.n_rollouts = 1;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = PicConfig{};
  c.n_scenarios = 3;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c.n_scenarios = c.n_rollouts;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = PicConfig{};
  c.perturbation_block = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = PicConfig{};
  c.temperature_lambda = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = PicConfig{};
  c.u_init = {1.0};
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("batch structure") {
  const ModelParams p;
  PicConfig cfg = small_cfg(20);
  cfg.n_scenarios = 4;
  const std::vector<double> base(20, 0.7);
  const auto b = sample_batch(p, {0.5, 0.5}, {2.0, 20}, cfg, base, {}, {4, 0});
  REQUIRE(b.costs.size() == 128);
  for (std::size_t g = 0; g < 128; g += 4) {
    for (std::size_t k = 1; k < 4; ++k) {
      CHECK(b.costs[g + k] == b.costs[g]);
      for (std::size_t t = 0; t < 20; ++t) CHECK(b.perturbation(g + k, t) == b.perturbation(g, t));
    }
  }
  CHECK(b.perturbation(0, 0) != b.perturbation(4, 0));
  // Draws are held over blocks of perturbation_block steps.
  for (std::size_t t = 0; t < 20; ++t) {
    const std::size_t start = t - t % cfg.perturbation_block;
    CHECK(b.perturbation(8, t) == b.perturbation(8, start));
  }
  CHECK(b.perturbation(8, 0) != b.perturbation(8, cfg.perturbation_block));

  // Single-scenario batches are plain path costs of clamp(base + eps).
  cfg.n_scenarios = 1;
  ModelParams q;
  q.sigma_g = q.sigma_d = q.sigma_v = 0.0;
  const auto c = sample_batch(q, {0.5, 0.5}, {2.0, 20}, cfg, base, {}, {4, 0});
  for (std::size_t r = 0; r < 128; r += 17) {
    std::vector<double> doses(20);
    for (std::size_t t = 0; t < 20; ++t) doses[t] = dose_of(c, r, t, q.u_max);
    const auto tr = rollout(q, OpenLoopPolicy{doses}, {0.5, 0.5}, {2.0, 20},
                            std::vector<double>(20, 0.0), {0, 0});
    CHECK(std::abs(tr.total_cost - c.costs[r]) < 1e-12);
  }
}

TEST_CASE("weighted update stays in bounds and concentrates as lambda shrinks") {
  const ModelParams p;
  PicConfig cfg = small_cfg(10);
  cfg.n_rollouts = 32;
  cfg.n_scenarios = 1;
  cfg.proposal_std = 1.5;
  const std::vector<double> base(10, 1.0);
  const auto b = sample_batch(p, {0.5, 0.6}, {1.0, 10}, cfg, base, {}, {9, 0});
  const std::size_t best = std::min_element(b.costs.begin(), b.costs.end()) - b.costs.begin();
  double spread = 0.0;
  for (std::size_t r = 0; r < b.n_rollouts; ++r) {
    for (std::size_t t = 0; t < 10; ++t) {
      spread = std::max(spread, std::abs(b.perturbation(r, t) - b.perturbation(best, t)));
    }
  }
  // Clamping is 1-Lipschitz, so the update is within (1 - w_best) * spread
  // of the best sample's doses,
  // and w_best grows as lambda shrinks.
  double last_rest = 1.0;
  double gap = 0.0;
  for (double lambda : {1.0, 0.1, 0.01, 1e-4, 1e-6}) {
    std::vector<double> actions(b.costs.size());
    for (std::size_t r = 0; r < actions.size(); ++r) actions[r] = b.costs[r] / lambda;
    const double rest = 1.0 - importance_weights(actions)[best];
    CHECK(rest <= last_rest);
    last_rest = rest;
    const auto u = weighted_update(b, lambda, p);
    gap = 0.0;
    for (std::size_t t = 0; t < 10; ++t) {
      CHECK(u.doses[t] >= 0.0);
      CHECK(u.doses[t] <= p.u_max);
      gap = std::max(gap, std::abs(u.doses[t] - dose_of(b, best, t, p.u_max)));
    }
    CHECK(gap <= rest * spread + 1e-12);
  }
  CHECK(gap <= cfg.proposal_std * 1e-3);

  // Adding a constant to every cost leaves the update unchanged.
  RolloutBatch shifted = b;
  for (double& c : shifted.costs) c += 37.0;
  const auto u1 = weighted_update(b, 0.5, p);
  const auto u2 = weighted_update(shifted, 0.5, p);
  for (std::size_t t = 0; t < 10; ++t) CHECK(std::abs(u1.doses[t] - u2.doses[t]) < 1e-12);
}

TEST_CASE("plans are reproducible and thread independent") {
  ModelParams p;
  p.sigma_g = p.sigma_d = p.sigma_v = 0.2;
  const PicConfig cfg = small_cfg(30);
  const TimeGrid g{3.0, 30};
  const std::size_t saved = thread_count();
  set_thread_count(1);
  const auto a = mppi_plan(p, {0.5, 0.5}, g, cfg, CouplingStat{}, {5, 1});
  set_thread_count(4);
  const auto b = mppi_plan(p, {0.5, 0.5}, g, cfg, CouplingStat{}, {5, 1});
  set_thread_count(saved);
  CHECK(a.plan.doses == b.plan.doses);
  CHECK(a.diagnostics.cost_trace == b.diagnostics.cost_trace);
  CHECK(a.diagnostics.cost_trace.size() == cfg.n_iterations);
  for (double u : a.plan.doses) {
    CHECK(u >= 0.0);
    CHECK(u <= p.u_max);
  }
  const auto c = mppi_plan(p, {0.5, 0.5}, g, cfg, CouplingStat{}, {6, 1});
  CHECK(a.plan.doses != c.plan.doses);
}

TEST_CASE("plan stays at u_init when weights carry no information") {
  ModelParams p;
  PicConfig cfg = small_cfg(10);
  cfg.temperature_lambda = 1e9;
  cfg.proposal_std = 0.1;
  cfg.n_iterations = 1;
  const TimeGrid g{1.0, 10};
  double mean = 0.0;
  const int n = 200;
  for (int s = 0; s < n; ++s) {
    const auto r = mppi_plan(p, {0.5, 0.5}, g, cfg, CouplingStat{}, {static_cast<std::uint64_t>(s), 0});
    for (double u : r.plan.doses) mean += u / (10.0 * n);
  }
  // Each plan averages groups * blocks independent draws of std 0.1.
  const double groups = static_cast<double>(cfg.n_rollouts / cfg.n_scenarios);
  const double blocks = std::ceil(10.0 / static_cast<double>(cfg.perturbation_block));
  CHECK(std::abs(mean - 1.0) < 4 * 0.1 / std::sqrt(groups * blocks * n));
}

TEST_CASE("noise-free plan doses early like the bang-bang oracle") {
  ModelParams p;
  p.sigma_g = p.sigma_d = p.sigma_v = 0.0;
  p.failure_penalty_M = 500.0;
  const State st0{0.5, 0.75};
  const TimeGrid g{2.0, 40};
  PicConfig cfg = small_cfg(40);
  cfg.n_iterations = 30;
  // From st0 only near-maximal dosing avoids failure, and a local sampler
  // centred on a low plan never sees a surviving rollout; start at the cap.
  cfg.u_init.assign(40, p.u_max);
  const auto plan = mppi_plan(p, st0, g, cfg, CouplingStat{}, {1, 0});

  HjbGridSpec spec;
  spec.nx1 = spec.nx2 = 65;
  spec.n_intervals = 40;
  const auto vg = hjb_solve(p, spec, 2.0);
  CHECK(hjb_dose(vg, 0.0, st0) == p.u_max);
  CHECK(plan.plan.doses[0] > 0.9 * p.u_max);
  const auto tr = rollout(p, OpenLoopPolicy{plan.plan.doses}, st0, g, std::vector<double>(40, 0.0), {});
  CHECK(tr.terminal != TerminalClass::Failure);
  const auto capped = rollout(p, OpenLoopPolicy{std::vector<double>(40, p.u_max)}, st0, g,
                              std::vector<double>(40, 0.0), {});
  CHECK(tr.total_cost <= capped.total_cost);
}

TEST_CASE("noise-free feedback never does worse than its open-loop plan") {
  ModelParams p;
  p.sigma_g = p.sigma_d = p.sigma_v = 0.0;
  const TimeGrid g{3.0, 30};
  const PicConfig cfg = small_cfg(30);
  for (std::uint64_t s = 0; s < 5; ++s) {
    for (const State st0 : {State{0.5, 0.5}, State{0.2, 0.7}}) {
      const SeedSpec seed{s, 0};
      const auto plan = mppi_plan(p, st0, g, cfg, CouplingStat{}, seed);
      const auto open = rollout(p, OpenLoopPolicy{plan.plan.doses}, st0, g,
                                std::vector<double>(30, 0.0), seed);
      const auto fb = mppi_feedback(p, st0, g, cfg, {}, seed);
      CHECK(fb.total_cost <= open.total_cost + 1e-9);
    }
  }
}

TEST_CASE("feedback beats the zero policy when failure dominates") {
  ModelParams p;
  p.sigma_g = p.sigma_d = p.sigma_v = 0.2;
  const TimeGrid g{2.0, 20};
  p.failure_penalty_M = 100 * p.u_max * g.horizon_t;
  PicConfig cfg = small_cfg(20);
  cfg.n_iterations = 4;
  const State st0{0.5, 0.5};
  const std::size_t n = 1000;
  std::vector<double> diff(n);
  const std::vector<double> theta(20, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const SeedSpec seed{77, i};
    const auto fb = mppi_feedback(p, st0, g, cfg, {}, seed);
    const auto zero = rollout(p, ZeroPolicy{}, st0, g, theta, seed);
    diff[i] = fb.total_cost - zero.total_cost;
  });
  double mean = 0.0;
  for (double d : diff) mean += d / n;
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double se = std::sqrt(ss / (n - 1) / n);
  CHECK(mean + 1.645 * se < 0.0);
}

TEST_CASE("one-step horizon and coupled feedback") {
  ModelParams p;
  PicConfig cfg = small_cfg(1);
  const TimeGrid g{1.0, 10};
  const auto tr = mppi_feedback(p, {0.5, 0.5}, g, cfg, {}, {3, 0});
  CHECK(tr.controls.size() == 10);
  const auto mf = mppi_feedback(p, {0.5, 0.5}, g, cfg, {CouplingKind::MeanX2}, {3, 0});
  for (std::size_t s = 0; s < 10; ++s) CHECK(mf.theta[s] == mf.states[s].x2);
}

TEST_CASE("diagnostics json") {
  PlanDiagnostics d{{3.0, 2.5}, false};
  const auto j = nlohmann::json::parse(to_json(d));
  CHECK(j["cost_trace"].size() == 2);
  CHECK(j["divergence_warning"] == false);
}

}

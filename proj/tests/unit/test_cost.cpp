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

#include <cmath>
#include <json.hpp>
#include <vector>

#include "tumorpic/cost.hpp"
#include "tumorpic/errors.hpp"
#include "tumorpic/parallel.hpp"

using namespace tumorpic;

namespace {

TrajectoryBundle constant_bundle(double u, double t, std::size_t k, State end) {
  TrajectoryBundle tr;
  tr.grid = {t, k};
  tr.controls.assign(k, u);
  tr.states.assign(k + 1, end);
  tr.noise.assign(k, {0, 0, 0});
  return tr;
}

}  // namespace

TEST_SUITE("cost") {

TEST_CASE("running and terminal costs") {
  ModelParams p;
  p.stabilization_weight_e = 0.1;
  CHECK(running_cost(0.0, p) == 0.1);
  CHECK(running_cost(0.3, p) == doctest::Approx(0.4).epsilon(1e-15));
  p.stabilization_weight_e = 0.0;
  CHECK(running_cost(1.0, p) == 1.0);

  p.failure_penalty_M = 100.0;
  CHECK(terminal_cost({0.5, 0.0}, p) == 0.0);
  CHECK(terminal_cost({0.5, 1.0}, p) == 100.0);
  CHECK(terminal_cost({0.5, 0.5}, p) == 100.0);
  p.indeterminate_is_failure = false;
  CHECK(terminal_cost({0.5, 0.5}, p) == 0.0);
}

TEST_CASE("path cost examples") {
  ModelParams p;
  p.stabilization_weight_e = 0.1;
  p.failure_penalty_M = 0.0;
  CHECK(path_cost(constant_bundle(0.0, 1.0, 10, {0.5, 0.5}), p) == 0.1);
  p.stabilization_weight_e = 0.0;
  p.u_max = 1.0;
  CHECK(path_cost(constant_bundle(1.0, 2.0, 20, {0.5, 0.0}), p) == doctest::Approx(2.0).epsilon(1e-15));

  ModelParams q;
  q.sigma_g = q.sigma_d = q.sigma_v = 0.4;
  const TimeGrid g{3.0, 60};
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto tr = rollout(q, ThresholdPolicy{0.5, 0.0, 1.0}, {0.5, 0.5}, g,
                            std::vector<double>(60, 0.0), {s, 0});
    CHECK(tr.total_cost >= q.stabilization_weight_e * g.horizon_t);
    CHECK(tr.total_cost == path_cost(tr, q));
  }
}

TEST_CASE("zero policy without penalty costs e t exactly") {
  ModelParams p;
  p.failure_penalty_M = 0.0;
  p.sigma_g = p.sigma_d = p.sigma_v = 0.3;
  const TimeGrid g{5.0, 100};
  const double et = p.stabilization_weight_e * g.horizon_t;
  const std::size_t saved = thread_count();
  for (std::size_t threads : {1u, 2u, 8u}) {
    set_thread_count(threads);
    const auto r = estimate_J(p, ZeroPolicy{}, {0.4, 0.6}, g, {}, 200, 17);
    CHECK(r.mean_cost == et);
    CHECK(r.std_error == 0.0);
    CHECK(r.mean_dose_integral == 0.0);
  }
  set_thread_count(saved);
}

TEST_CASE("noise-free deterministic policy has no spread") {
  ModelParams p;
  p.sigma_g = p.sigma_d = p.sigma_v = 0.0;
  const auto r = estimate_J(p, ConstantPolicy{0.7}, {0.5, 0.5}, {5.0, 50}, {}, 10, 3);
  CHECK(r.std_error == 0.0);
  CHECK(r.failure_rate + r.success_rate <= 1.0);
  CHECK_THROWS_AS(estimate_J(p, ZeroPolicy{}, {0.5, 0.5}, {5.0, 50}, {}, 1, 3), DomainError);
}

TEST_CASE("report serializes to six fields") {
  CostReport r{1.5, 0.25, 10, 0.1, 0.8, 0.75};
  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j.size() == 6);
  CHECK(j["mean_cost"] == 1.5);
  CHECK(j["n_samples"] == 10);
  CHECK(j["mean_dose_integral"] == 0.75);
}

TEST_CASE("mean cost is monotone in the failure penalty") {
  ModelParams p;
  p.sigma_g = p.sigma_d = p.sigma_v = 0.3;
  const TimeGrid g{5.0, 50};
  double last = -1.0;
  for (double M : {0.0, 1.0, 10.0, 50.0, 200.0}) {
    p.failure_penalty_M = M;
    const auto r = estimate_J(p, ThresholdPolicy{0.5, 0.0, 1.0}, {0.5, 0.5}, g, {}, 200, 5);
    CHECK(r.mean_cost >= last);
    last = r.mean_cost;
  }
}

TEST_CASE("standard error shrinks like one over root n") {
  ModelParams p;
  p.sigma_g = p.sigma_d = p.sigma_v = 0.2;
  const TimeGrid g{2.0, 40};
  double ratio = 0.0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const auto a = estimate_J(p, ThresholdPolicy{0.5, 0.0, 1.0}, {0.5, 0.5}, g, {}, 200, 1000 + rep);
    const auto b = estimate_J(p, ThresholdPolicy{0.5, 0.0, 1.0}, {0.5, 0.5}, g, {}, 400, 2000 + rep);
    ratio += a.std_error / b.std_error / 20.0;
  }
  CHECK(ratio > 1.2);
  CHECK(ratio < 1.7);
}

TEST_CASE("cost is additive over a horizon split") {
  ModelParams p;
  p.failure_penalty_M = 0.0;
  p.sigma_g = p.sigma_d = p.sigma_v = 0.3;
  const std::size_t k = 100;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const SeedSpec seed{s, 3};
    const ThresholdPolicy pol{0.45, 0.2, 1.4};
    const auto full = rollout(p, pol, {0.5, 0.5}, {4.0, k}, std::vector<double>(k, 0.0), seed);
    const std::vector<double> th(k / 2, 0.0);
    const auto a = rollout(p, pol, {0.5, 0.5}, {2.0, k / 2}, th, seed);
    const auto b = rollout(p, pol, a.states.back(), {2.0, k / 2}, th, seed, k / 2);
    CHECK(b.states.back() == full.states.back());
    CHECK(std::abs(full.total_cost - (a.total_cost + b.total_cost)) < 1e-12);
  }
}

TEST_CASE("lagrangian residual") {
  ModelParams p;
  p.sigma_g = p.sigma_d = p.sigma_v = 0.02;
  const TimeGrid g{1.0, 100};
  const std::vector<double> th(100, 0.0);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto tr = rollout(p, ConstantPolicy{0.5}, {0.5, 0.5}, g, th, {s, 0});
    CHECK(lagrangian_residual(tr, p, th) < 1e-12);
  }

  ModelParams q;
  q.sigma_g = q.sigma_d = q.sigma_v = 0.0;
  const auto corner = rollout(q, ZeroPolicy{}, {0.0, 1.0}, g, th, {});
  CHECK(lagrangian_residual(corner, q, th) == 0.0);

  // Find paths with exactly one clamped step; the residual is that step's
  // projection distance.
  q.sigma_g = q.sigma_d = q.sigma_v = 1.5;
  const TimeGrid short_grid{0.2, 4};
  const std::vector<double> th4(4, 0.0);
  int found = 0;
  for (std::uint64_t s = 0; s < 2000 && found < 20; ++s) {
    const auto tr = rollout(q, ZeroPolicy{}, {0.5, 0.97}, short_grid, th4, {s, 0});
    int clamps = 0;
    double dist = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const Vec2 mu = drift(tr.states[i], 0.0, {}, q);
      const auto sig = diffusion(tr.states[i], {}, q);
      const auto& dW = tr.noise[i];
      const double y1 = tr.states[i].x1 + mu[0] * 0.05 + sig[0][0] * dW[0] + sig[0][1] * dW[1] + sig[0][2] * dW[2];
      const double y2 = tr.states[i].x2 + mu[1] * 0.05 + sig[1][0] * dW[0] + sig[1][1] * dW[1] + sig[1][2] * dW[2];
      const double d = std::hypot(y1 - tr.states[i + 1].x1, y2 - tr.states[i + 1].x2);
      if (d > 0.0) {
        ++clamps;
        dist = d;
      }
    }
    if (clamps != 1) continue;
    ++found;
    // Once clamped onto x2 = 1 the path stays there, so the offset persists.
    if (tr.states.back().x2 == 1.0) CHECK(std::abs(lagrangian_residual(tr, q, th4) - dist) < 1e-12);
  }
  CHECK(found > 0);

  auto broken = rollout(p, ZeroPolicy{}, {0.5, 0.5}, g, th, {});
  broken.noise.clear();
  CHECK_THROWS_AS(lagrangian_residual(broken, p, th), DomainError);
}

}

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
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include "tumorpic/errors.hpp"
#include "tumorpic/hjb.hpp"
#include "tumorpic/io.hpp"

using namespace tumorpic;

namespace {

ModelParams noisy(double sigma) {
  ModelParams p;
  p.sigma_g = p.sigma_d = p.sigma_v = sigma;
  p.failure_penalty_M = 100 * p.stabilization_weight_e * 2.0;
  return p;
}

HjbGridSpec small_grid(std::size_t n = 33, std::size_t intervals = 50) {
  HjbGridSpec s;
  s.nx1 = s.nx2 = n;
  s.n_intervals = intervals;
  return s;
}

// Linear interpolation of a node function of x2 alone.
double interp_x2(const std::vector<double>& f, double x2, double dx) {
  const double pos = std::clamp(x2, 0.0, 1.0) / dx;
  const std::size_t j = std::min(static_cast<std::size_t>(pos), f.size() - 2);
  const double g = pos - static_cast<double>(j);
  return (1 - g) * f[j] + g * f[j + 1];
}

}  // namespace

TEST_SUITE("hjb") {

TEST_CASE("zero cost problem has zero value and zero dose") {
  ModelParams p = noisy(0.0);
  p.stabilization_weight_e = 0.0;
  p.failure_penalty_M = 0.0;
  const auto vg = std::make_shared<ValueGrid>(hjb_solve(p, small_grid(), 2.0));
  for (double v : vg->values) CHECK(v == 0.0);
  for (double x : {0.1, 0.5, 0.9}) CHECK(hjb_dose(*vg, 0.3, {x, x}) == 0.0);
}

TEST_CASE("terminal layer and value bounds") {
  const ModelParams p = noisy(0.2);
  const double t = 2.0;
  const auto vg = hjb_solve(p, small_grid(), t);
  const std::size_t last = vg.nt - 1;
  const double upper = p.failure_penalty_M + (p.u_max + p.stabilization_weight_e) * t;
  for (std::size_t i = 0; i < vg.nx1; ++i) {
    for (std::size_t j = 0; j < vg.nx2; ++j) {
      const State st{static_cast<double>(i) * vg.dx1, static_cast<double>(j) * vg.dx2};
      CHECK(vg.at(last, i, j) == terminal_cost(st, p));
    }
  }
  for (double v : vg.values) {
    CHECK(v >= 0.0);
    CHECK(v <= upper);
  }
  CHECK(vg.at(last, 5, 0) == 0.0);
  CHECK(vg.at(last, 5, vg.nx2 - 1) == p.failure_penalty_M);
}

TEST_CASE("one noise-free sweep equals brute-force minimisation over two doses") {
  ModelParams p = noisy(0.0);
  p.beta_alpha = 0.0;  // keeps the dose-free x2 drift nonpositive
  p.failure_penalty_M = 7.0;
  HjbGridSpec spec = small_grid(41, 1);
  spec.substeps = 1;
  const double h = 0.5 * hjb_max_stable_dt(p, spec);
  const auto vg = hjb_solve(p, spec, h);
  REQUIRE(vg.substeps == 1);

  std::vector<double> term(vg.nx2);
  for (std::size_t j = 0; j < vg.nx2; ++j) term[j] = vg.at(1, 0, j);
  for (std::size_t i = 0; i < vg.nx1; ++i) {
    const double x1 = static_cast<double>(i) * vg.dx1;
    for (std::size_t j = 0; j < vg.nx2; ++j) {
      const double x2 = static_cast<double>(j) * vg.dx2;
      double best = INFINITY;
      for (double u : {0.0, p.u_max}) {
        const double mu2 = drift({x1, x2}, u, {}, p)[1];
        best = std::min(best, (u + p.stabilization_weight_e) * h + interp_x2(term, x2 + mu2 * h, vg.dx2));
      }
      CHECK(std::abs(vg.at(0, i, j) - best) < 1e-12);
    }
  }
}

TEST_CASE("value is monotone in the failure penalty") {
  ModelParams lo = noisy(0.15), hi = noisy(0.15);
  lo.failure_penalty_M = 5.0;
  hi.failure_penalty_M = 20.0;
  const auto a = hjb_solve(lo, small_grid(), 2.0);
  const auto b = hjb_solve(hi, small_grid(), 2.0);
  for (std::size_t k = 0; k < a.values.size(); ++k) CHECK(a.values[k] <= b.values[k]);
}

TEST_CASE("chosen dose minimises the affine dose term") {
  const ModelParams p = noisy(0.2);
  const auto vg = hjb_solve(p, small_grid(), 2.0);
  for (std::size_t l = 0; l < vg.nt; l += 10) {
    for (std::size_t i = 0; i < vg.nx1; ++i) {
      for (std::size_t j = 0; j < vg.nx2; ++j) {
        const double kappa = control_coefficient(vg, l, i, j);
        const State st{static_cast<double>(i) * vg.dx1, static_cast<double>(j) * vg.dx2};
        const double chosen = hjb_dose(vg, static_cast<double>(l) * vg.dt, st);
        CHECK((chosen == 0.0 || chosen == p.u_max));
        double best = INFINITY;
        for (int k = 0; k <= 100; ++k) best = std::min(best, kappa * p.u_max * k / 100.0);
        CHECK(kappa * chosen <= best + 1e-12);
      }
    }
  }
}

TEST_CASE("dynamic programming split") {
  const ModelParams p = noisy(0.2);
  const auto whole = hjb_solve(p, small_grid(33, 40), 2.0);
  const auto tail = hjb_solve(p, small_grid(33, 20), 1.0);
  REQUIRE(whole.sweep_dt == tail.sweep_dt);
  const auto head = hjb_solve_from(p, small_grid(33, 20), 1.0, tail.layer(0));
  const auto w0 = whole.layer(0);
  const auto h0 = head.layer(0);
  for (std::size_t k = 0; k < w0.size(); ++k) CHECK(std::abs(w0[k] - h0[k]) < 1e-9);
}

TEST_CASE("policy edge cases") {
  ValueGrid flat;
  flat.params.u_max = 2.0;
  flat.nx1 = flat.nx2 = 17;
  flat.nt = 2;
  flat.horizon = 1.0;
  flat.dt = 1.0;
  flat.dx1 = flat.dx2 = 1.0 / 16;
  flat.values.assign(2 * 17 * 17, 3.5);
  for (double x : {0.0, 0.3, 0.77, 1.0}) CHECK(hjb_dose(flat, 0.2, {x, 1 - x}) == 0.0);

  const auto vg = hjb_solve(noisy(0.2), small_grid(), 2.0);
  for (double x1 : {0.0, 0.4, 1.0}) {
    CHECK(hjb_dose(vg, 0.0, {x1, 0.0}) == 0.0);
    CHECK(hjb_dose(vg, 0.0, {x1, 1.0}) == 0.0);
  }
  CHECK_THROWS_AS(hjb_dose(vg, 0.0, {0.5, 1.2}), DomainError);
  CHECK_THROWS_AS(hjb_policy(nullptr), DomainError);
}

// Known to fail: first-order upwinding smears the jump of the terminal cost,
// so both switching curves converge roughly like sqrt(dx) and move by more
// than a coarse cell between 33 and 129 nodes. Kept so the drift is visible.
TEST_CASE("switching surface is stable under refinement" * doctest::may_fail()) {
  const ModelParams p = noisy(0.1);
  const auto coarse = hjb_solve(p, small_grid(33, 100), 2.0);
  const auto fine = hjb_solve(p, small_grid(129, 100), 2.0);
  const double cell = coarse.dx2;
  for (double s : {0.0, 1.0}) {
    for (int a = 0; a <= 10; ++a) {
      const double x1 = a / 10.0;
      // Every x2 where the two policies disagree lies within one coarse cell
      // of a switch of the coarse policy.
      std::vector<double> switches;
      double prev = hjb_dose(coarse, s, {x1, 0.0});
      for (int b = 1; b <= 2000; ++b) {
        const double x2 = b / 2000.0;
        const double d = hjb_dose(coarse, s, {x1, x2});
        if (d != prev) switches.push_back(x2);
        prev = d;
      }
      for (int b = 0; b <= 2000; ++b) {
        const double x2 = b / 2000.0;
        if (hjb_dose(coarse, s, {x1, x2}) == hjb_dose(fine, s, {x1, x2})) continue;
        double nearest = INFINITY;
        for (double w : switches) nearest = std::min(nearest, std::abs(w - x2));
        CHECK(nearest < cell);
      }
    }
  }
}

TEST_CASE("value matches rollouts in the exact noise-free case") {
  ModelParams p = noisy(0.0);
  p.failure_penalty_M = 0.0;
  const auto vg = std::make_shared<ValueGrid>(hjb_solve(p, small_grid(), 2.0));
  const auto chk = value_vs_rollout(p, vg, {0.5, 0.5}, 10, 1);
  CHECK(std::abs(chk.value - p.stabilization_weight_e * 2.0) < 1e-12);
  CHECK(chk.discrepancy < 1e-12);
  CHECK_THROWS_AS(value_vs_rollout(p, vg, {0.5, 0.5}, 10, 1, {CouplingKind::MeanX2}), ScopeError);
}

TEST_CASE("refinement does not increase the median discrepancy") {
  const ModelParams p = noisy(0.15);
  const State st0{0.5, 0.5};
  std::vector<double> coarse, fine;
  const auto vc = std::make_shared<ValueGrid>(hjb_solve(p, small_grid(17, 100), 2.0));
  const auto vf = std::make_shared<ValueGrid>(hjb_solve(p, small_grid(65, 100), 2.0));
  for (std::uint64_t s = 0; s < 10; ++s) {
    coarse.push_back(value_vs_rollout(p, vc, st0, 400, 100 + s).discrepancy);
    fine.push_back(value_vs_rollout(p, vf, st0, 400, 100 + s).discrepancy);
  }
  std::nth_element(coarse.begin(), coarse.begin() + 5, coarse.end());
  std::nth_element(fine.begin(), fine.begin() + 5, fine.end());
  CHECK(fine[5] <= coarse[5]);
}

TEST_CASE("stability guard") {
  HjbGridSpec spec = small_grid(65, 1);
  spec.substeps = 1;
  try {
    hjb_solve(noisy(0.3), spec, 5.0);
    FAIL("expected a stability error");
  } catch (const StabilityError& e) {
    CHECK(std::string(e.what()).find("drift ratio") != std::string::npos);
    CHECK(std::string(e.what()).find("diffusion ratio") != std::string::npos);
  }
  HjbGridSpec tiny = small_grid(8, 10);
  CHECK_THROWS_AS(hjb_solve(noisy(0.1), tiny, 1.0), DomainError);
}

TEST_CASE("value grid export round trip") {
  const auto vg = hjb_solve(noisy(0.2), small_grid(17, 20), 1.0);
  const auto dir = std::filesystem::temp_directory_path() / "tumorpic_test_hjb";
  std::filesystem::create_directories(dir);
  write_value_grid_csv(dir / "v.csv", vg, 5);
  write_text_file(dir / "v.json", value_grid_header_json(vg, 5));
  const auto back = read_value_grid(dir / "v.json", dir / "v.csv");
  CHECK(back.nt == 5);
  CHECK(back.dt == doctest::Approx(vg.dt * 5));
  for (std::size_t l = 0; l < back.nt; ++l) {
    for (std::size_t i = 0; i < vg.nx1; ++i) {
      for (std::size_t j = 0; j < vg.nx2; ++j) CHECK(back.at(l, i, j) == vg.at(5 * l, i, j));
    }
  }
  CHECK_THROWS_AS(write_value_grid_csv(dir / "w.csv", vg, 3), DomainError);
  {
    std::ofstream bad(dir / "v.csv", std::ios::app);
    bad << "1,2,oops\n";
  }
  CHECK_THROWS_AS(read_value_grid(dir / "v.json", dir / "v.csv"), ConfigError);
  std::filesystem::remove_all(dir);
}

}

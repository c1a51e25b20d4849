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

#include "tumorpic/model.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "dynamics_kernel.hpp"
#include "tumorpic/errors.hpp"

namespace tumorpic {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError("params", fmt::format("ModelParams: {}", what));
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void ModelParams::validate() const {
  require(finite_nonneg(beta_v), "beta_v must be a finite rate >= 0");
  require(finite_nonneg(beta_alpha), "beta_alpha must be a finite rate >= 0");
  require(finite_nonneg(cost_c), "cost_c must be a finite rate >= 0");
  require(finite_nonneg(vop_benefit_factor), "vop_benefit_factor must be >= 0");
  require(finite_nonneg(sigma_g) && finite_nonneg(sigma_d) && finite_nonneg(sigma_v),
          "volatilities must be finite and >= 0");
  require(n_neighbors >= 1, "n_neighbors must be >= 1");
  // Zero e or M is allowed: the zero-cost limits are exact test cases.
  require(finite_nonneg(stabilization_weight_e), "stabilization_weight_e must be >= 0");
  require(finite_nonneg(failure_penalty_M), "failure_penalty_M must be >= 0");
  require(std::isfinite(u_max) && u_max > 0.0, "u_max must be > 0");
  require(0.0 <= x2_success && x2_success <= x2_fail && x2_fail <= 1.0,
          "thresholds must satisfy 0 <= x2_success <= x2_fail <= 1");
}

std::string_view to_string(TerminalClass c) {
  switch (c) {
    case TerminalClass::Success: return "success";
    case TerminalClass::Failure: return "failure";
    case TerminalClass::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

bool is_valid(const State& st) {
  return st.x1 >= 0.0 && st.x1 <= 1.0 && st.x2 >= 0.0 && st.x2 <= 1.0;
}

void require_valid(const State& st) {
  if (!is_valid(st)) {
    throw DomainError("state", fmt::format("state ({}, {}) outside [0,1]^2", st.x1, st.x2));
  }
}

Fractions fractions_from_counts(double m_g, double m_d, double m_v) {
  if (!(finite_nonneg(m_g) && finite_nonneg(m_d) && finite_nonneg(m_v))) {
    throw DomainError("counts", "subpopulation counts must be finite and >= 0");
  }
  const double total = m_g + m_d + m_v;
  if (total <= 0.0) throw DomainError("counts", "all subpopulation counts are zero");
  return {m_g / total, m_d / total, m_v / total};
}

State state_from_fractions(const Fractions& f) {
  if (f.b_g == 1.0) {
    throw DomainError("aerobic-extinct", "no aerobic cells: VOP share among aerobic cells undefined");
  }
  const double aerobic = f.b_v + f.b_d;
  if (!(aerobic > 0.0)) {
    throw DomainError("fractions", "b_v + b_d must be positive");
  }
  return {f.b_v / aerobic, f.b_g};
}

Fractions counts_from_state(const State& st, double total_mass) {
  require_valid(st);
  const double aerobic = total_mass * (1.0 - st.x2);
  return {total_mass * st.x2, aerobic * (1.0 - st.x1), aerobic * st.x1};
}

double vop_benefit_factor_from_geometric(double q, int d) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("geometric", "q must lie in [0, 1)");
  if (d < 0) throw DomainError("geometric", "d must be >= 0");
  return (1.0 - std::pow(q, d + 1)) / (1.0 - q);
}

Vec2 drift(const State& st, double u, CouplingStat theta, const ModelParams& p) {
  const detail::DynamicsCoefs c(p);
  return {detail::drift_x1(c, st.x1, theta.value),
          detail::drift_x2(c, st.x1, st.x2, u, theta.value)};
}

DiffusionMatrix diffusion(const State& st, CouplingStat theta, const ModelParams& p) {
  const detail::DynamicsCoefs c(p);
  double s[2][3];
  detail::diffusion_rows(c, st.x1, st.x2, theta.value, s);
  return {{{s[0][0], s[0][1], s[0][2]}, {s[1][0], s[1][1], s[1][2]}}};
}

TerminalClass classify_terminal(const State& st, const ModelParams& p) {
  if (st.x2 <= p.x2_success) return TerminalClass::Success;
  if (st.x2 >= p.x2_fail) return TerminalClass::Failure;
  return TerminalClass::Indeterminate;
}

}  // namespace tumorpic

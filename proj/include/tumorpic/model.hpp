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
#include <string_view>

namespace tumorpic {

// Constants of the three-type (GLY / DEF / VOP) tumour game with drug
// dosing, its noise amplitudes and the treatment-cost weights.
struct ModelParams {
  double beta_v = 2.0;                // benefit per unit vascularisation
  double beta_alpha = 4.5;            // benefit per acidification
  double cost_c = 0.5;                // VEGF production cost
  int n_neighbors = 2;                // interaction group size minus one
  double vop_benefit_factor = 1.0;    // geometric public-good sum
  double sigma_g = 0.1;               // GLY channel volatility
  double sigma_d = 0.1;               // DEF channel volatility
  double sigma_v = 0.1;               // VOP channel volatility
  double stabilization_weight_e = 0.1;
  double failure_penalty_M = 50.0;    // finite stand-in for an infinite penalty
  double u_max = 2.0;
  double x2_success = 0.2;
  double x2_fail = 0.8;
  // Adds the coupling term to diffusion entry (2,3) as well.
  bool symmetrize_theta = false;
  // Terminal states strictly between the thresholds are charged as failures.
  bool indeterminate_is_failure = true;

  // Throws DomainError naming the first violated invariant.
  void validate() const;
};

// (x1, x2): VOP share of the aerobic cells, GLY share of the tumour.
struct State {
  double x1 = 0.0;
  double x2 = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

struct Fractions {
  double b_g = 0.0;
  double b_d = 0.0;
  double b_v = 0.0;
};

// Scalar statistic of the population law entering the dynamics.
struct CouplingStat {
  double value = 0.0;
};

enum class TerminalClass { Success, Failure, Indeterminate };

std::string_view to_string(TerminalClass c);

using Vec2 = std::array<double, 2>;
// Rows: state components (x1, x2); columns: noise channels (g, d, v).
using DiffusionMatrix = std::array<std::array<double, 3>, 2>;

bool is_valid(const State& st);
void require_valid(const State& st);

Fractions fractions_from_counts(double m_g, double m_d, double m_v);
State state_from_fractions(const Fractions& f);
// One population with the given total mass whose fractions map back to st.
Fractions counts_from_state(const State& st, double total_mass);

// sum_{j=0}^{d} q^j.
double vop_benefit_factor_from_geometric(double q, int d);

Vec2 drift(const State& st, double u, CouplingStat theta, const ModelParams& p);
DiffusionMatrix diffusion(const State& st, CouplingStat theta,
                          const ModelParams& p);

TerminalClass classify_terminal(const State& st, const ModelParams& p);

}  // namespace tumorpic

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

// Inline drift/diffusion arithmetic shared by the scalar model functions and
// the batched planner and value-function loops, so all of them agree to the
// last bit on a given compiler.

#include "tumorpic/model.hpp"

namespace tumorpic::detail {

struct DynamicsCoefs {
  double vop_gain;   // beta_v / (n+1) * V - c
  double gly_base;   // beta_alpha / (n+1)
  double bvc;        // beta_v - c
  double sg, sd, sv;
  double sg2, sd2, sv2;
  double sym;        // 1 if theta enters diffusion entry (2,3), else 0

  explicit DynamicsCoefs(const ModelParams& p)
      : vop_gain(p.beta_v / static_cast<double>(p.n_neighbors + 1) * p.vop_benefit_factor -
                 p.cost_c),
        gly_base(p.beta_alpha / static_cast<double>(p.n_neighbors + 1)),
        bvc(p.beta_v - p.cost_c),
        sg(p.sigma_g),
        sd(p.sigma_d),
        sv(p.sigma_v),
        sg2(p.sigma_g * p.sigma_g),
        sd2(p.sigma_d * p.sigma_d),
        sv2(p.sigma_v * p.sigma_v),
        sym(p.symmetrize_theta ? 1.0 : 0.0) {}
};

inline double drift_x1(const DynamicsCoefs& c, double x1, double th) {
  return x1 * (1.0 - x1) * (c.vop_gain + th + (1.0 - x1) * c.sd2 - x1 * c.sv2);
}

inline double drift_x2(const DynamicsCoefs& c, double x1, double x2, double u, double th) {
  const double gly_gain = c.gly_base - c.bvc * x1 - u;
  const double noise_term = c.sg2 * x2 - c.sd2 * (1.0 - x2) * (1.0 - x1) * (1.0 - x1) -
                            c.sv2 * (1.0 - x2) * x1 * x1;
  return x2 * (1.0 - x2) * (gly_gain + th - noise_term);
}

inline void diffusion_rows(const DynamicsCoefs& c, double x1, double x2, double th,
                           double s[2][3]) {
  const double h1 = x1 * (1.0 - x1);
  const double h2 = x2 * (1.0 - x2);
  s[0][0] = 0.0;
  s[0][1] = -c.sd * h1 + th;
  s[0][2] = c.sv * h1 + th;
  s[1][0] = c.sg * h2 + th;
  s[1][1] = c.sg * h2 * (1.0 - x1) + th;
  s[1][2] = c.sg * h2 * x1 + c.sym * th;
}

}  // namespace tumorpic::detail

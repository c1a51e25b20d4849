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

#include "tumorpic/policy.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "planner.hpp"
#include "tumorpic/errors.hpp"
#include "tumorpic/hjb.hpp"

namespace tumorpic {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

std::string describe(const Policy& policy) {
  return std::visit(
      Overloaded{
          [](const ZeroPolicy&) { return std::string("zero"); },
          [](const ConstantPolicy& c) { return fmt::format("constant:{}", c.dose); },
          [](const ThresholdPolicy& t) {
            return fmt::format("threshold:{},{},{}", t.x2_star, t.low, t.high);
          },
          [](const OpenLoopPolicy& o) { return fmt::format("open_loop[{}]", o.doses.size()); },
          [](const HjbFeedbackPolicy&) { return std::string("hjb"); },
          [](const MppiFeedbackPolicy&) { return std::string("mppi"); },
      },
      policy);
}

struct PolicySession::MppiState {
  detail::Planner planner;
  std::vector<double> plan;
  std::size_t next_step = 0;
};

PolicySession::PolicySession(const Policy& policy, const ModelParams& params,
                             const TimeGrid& grid, std::size_t first_step, SeedSpec seed)
    : policy_(&policy), params_(&params), grid_(grid), first_step_(first_step), seed_(seed) {}

PolicySession::~PolicySession() = default;
PolicySession::PolicySession(PolicySession&&) noexcept = default;
PolicySession& PolicySession::operator=(PolicySession&&) noexcept = default;

double PolicySession::dose(const State& st, std::size_t step, CouplingStat theta) {
  return std::visit(
      Overloaded{
          [](const ZeroPolicy&) { return 0.0; },
          [](const ConstantPolicy& c) { return c.dose; },
          [&](const ThresholdPolicy& t) { return st.x2 > t.x2_star ? t.high : t.low; },
          [&](const OpenLoopPolicy& o) {
            const std::size_t abs = first_step_ + step;
            if (abs >= o.doses.size()) {
              throw DomainError("policy", fmt::format("open-loop plan has no dose for step {}", abs));
            }
            return o.doses[abs];
          },
          [&](const HjbFeedbackPolicy& h) {
            if (!h.grid) throw DomainError("policy", "HJB policy without a value grid");
            return hjb_dose(*h.grid, grid_.time(first_step_ + step), st);
          },
          [&](const MppiFeedbackPolicy& m) {
            const PicConfig& cfg = m.config;
            const std::size_t horizon = std::min(cfg.k_steps, grid_.k_steps - step);
            std::size_t iterations = cfg.n_iterations_replan;
            if (!mppi_) {
              if (step != 0) throw DomainError("policy", "MPPI session must start at step 0");
              mppi_ = std::make_unique<MppiState>(MppiState{
                  detail::Planner(*params_, cfg, grid_.dt(), seed_, first_step_, grid_.k_steps),
                  detail::initial_plan(cfg, *params_, horizon), 0});
              iterations = cfg.n_iterations;
            } else {
              if (step != mppi_->next_step) {
                throw DomainError("policy", "MPPI session queried out of order");
              }
              // Warm start: drop the applied dose, hold the last one.
              auto& plan = mppi_->plan;
              plan.erase(plan.begin());
              while (plan.size() < horizon) plan.push_back(plan.empty() ? 0.0 : plan.back());
              plan.resize(horizon);
            }
            mppi_->planner.refine(st, theta.value, first_step_ + step, mppi_->plan, iterations,
                                  nullptr);
            mppi_->next_step = step + 1;
            return mppi_->plan.front();
          },
      },
      *policy_);
}

}  // namespace tumorpic

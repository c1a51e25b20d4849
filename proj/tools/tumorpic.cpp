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

// Batch front end: tumorpic <simulate|control|hjb|evaluate|wasserstein> ...
//
// Exit codes: 0 ok, 2 configuration or input error, 3 request outside an
// algorithm's scope, 4 numerical stability violation.

#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tumorpic/config.hpp"
#include "tumorpic/cost.hpp"
#include "tumorpic/errors.hpp"
#include "tumorpic/hjb.hpp"
#include "tumorpic/io.hpp"
#include "tumorpic/measures.hpp"
#include "tumorpic/parallel.hpp"
#include "tumorpic/pic.hpp"
#include "tumorpic/simulate.hpp"

namespace {

using namespace tumorpic;
using json = nlohmann::ordered_json;

struct CommonOptions {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t threads = 1;
  std::vector<std::string> sets;
};

RunConfig resolve(const CommonOptions& o) {
  std::vector<std::string> overrides = o.sets;
  if (!o.out.empty()) overrides.push_back("io.out_dir=" + o.out);
  if (o.seed_set) overrides.push_back(fmt::format("run.seed={}", o.seed));
  return o.config.empty() ? parse_config("", overrides) : load_config(o.config, overrides);
}

std::vector<double> split_numbers(const std::string& s, std::size_t expected,
                                  const std::string& spec) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("policy '{}': '{}' is not a number", spec, item));
    }
  }
  if (out.size() != expected) {
    throw ConfigError(fmt::format("policy '{}' expects {} numbers", spec, expected));
  }
  return out;
}

std::shared_ptr<const ValueGrid> solve_hjb(const RunConfig& cfg) {
  if (!cfg.coupling.is_zero()) {
    throw ScopeError("oracle valid only for frozen mean field: set [coupling] kind = zero");
  }
  return std::make_shared<const ValueGrid>(hjb_solve(cfg.model, cfg.hjb, cfg.grid.horizon_t));
}

Policy make_policy(const std::string& spec, const RunConfig& cfg) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  Policy policy;
  if (name == "zero" && arg.empty()) {
    policy = ZeroPolicy{};
  } else if (name == "constant") {
    policy = ConstantPolicy{split_numbers(arg, 1, spec)[0]};
  } else if (name == "threshold") {
    const auto v = split_numbers(arg, 3, spec);
    policy = ThresholdPolicy{v[0], v[1], v[2]};
  } else if (name == "hjb" && !arg.empty()) {
    std::filesystem::path header(arg);
    std::filesystem::path csv = header;
    csv.replace_extension(".csv");
    policy = HjbFeedbackPolicy{std::make_shared<const ValueGrid>(read_value_grid(header, csv))};
  } else if (name == "hjb") {
    policy = HjbFeedbackPolicy{solve_hjb(cfg)};
  } else if (name == "mppi" && arg.empty()) {
    policy = MppiFeedbackPolicy{cfg.pic};
  } else {
    throw ConfigError(fmt::format(
        "unknown policy '{}' (expected zero, constant:<v>, threshold:<x2*,lo,hi>, "
        "hjb[:<grid.json>] or mppi)",
        spec));
  }
  auto check = [&](double u) {
    if (!(u >= 0.0 && u <= cfg.model.u_max)) {
      throw ConfigError(fmt::format("policy '{}': doses must lie in [0, u_max]", spec));
    }
  };
  if (auto* c = std::get_if<ConstantPolicy>(&policy)) check(c->dose);
  if (auto* t = std::get_if<ThresholdPolicy>(&policy)) {
    check(t->low);
    check(t->high);
  }
  return policy;
}

json report_json(const CostReport& r) { return json::parse(to_json(r)); }

void write_json(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2));
}

int cmd_simulate(const RunConfig& cfg, const std::string& policy_override) {
  const std::string spec = policy_override.empty() ? cfg.policy : policy_override;
  const Policy policy = make_policy(spec, cfg);
  const auto dir = cfg.out_dir;
  std::filesystem::create_directories(dir);
  std::vector<TrajectoryBundle> bundles;
  const std::size_t n = cfg.n_samples;
  if (cfg.coupling.is_zero()) {
    bundles.resize(n);
    const std::vector<double> theta(cfg.grid.k_steps, 0.0);
    parallel_for(n, [&](std::size_t i) {
      bundles[i] = rollout(cfg.model, policy, cfg.initial, cfg.grid, theta, SeedSpec{cfg.seed, i});
    });
  } else {
    bundles = particle_bundles(cfg.model, policy, Ensemble{std::vector<State>(n, cfg.initial)},
                               cfg.grid, cfg.coupling, SeedSpec{cfg.seed, 0});
  }
  CostSamples samples;
  std::vector<State> finals;
  for (std::size_t i = 0; i < n; ++i) {
    write_trajectory_csv(dir / indexed_name("trajectory", i, n, "csv"), bundles[i]);
    samples.costs.push_back(bundles[i].total_cost);
    samples.dose_integrals.push_back(dose_integral(bundles[i]));
    samples.terminals.push_back(bundles[i].terminal);
    finals.push_back(bundles[i].states.back());
  }
  write_measure_csv(dir / "final_measure.csv", empirical_from_samples(finals));
  json summary = report_json(summarize(samples, cfg.model));
  write_json(dir / "summary.json", summary);
  write_text_file(dir / "config.ini", to_ini(cfg));
  return 0;
}

int cmd_control(const RunConfig& cfg) {
  const auto dir = cfg.out_dir;
  std::filesystem::create_directories(dir);
  const SeedSpec seed{cfg.seed, 0};
  const PlanResult plan = mppi_plan(cfg.model, cfg.initial, cfg.grid, cfg.pic, cfg.coupling, seed);
  write_plan_csv(dir / "plan.csv", plan.plan, cfg.grid);
  write_text_file(dir / "plan_diagnostics.json", to_json(plan.diagnostics));
  if (plan.diagnostics.divergence_warning) {
    std::cerr << "warning: planner cost trace rose three iterations in a row\n";
  }
  const TrajectoryBundle fb =
      mppi_feedback(cfg.model, cfg.initial, cfg.grid, cfg.pic, cfg.coupling, seed);
  write_trajectory_csv(dir / "feedback.csv", fb);
  json summary;
  summary["feedback_cost"] = fb.total_cost;
  summary["feedback_terminal"] = std::string(to_string(fb.terminal));
  summary["feedback_dose_integral"] = dose_integral(fb);
  summary["plan_final_mean_cost"] =
      plan.diagnostics.cost_trace.empty() ? 0.0 : plan.diagnostics.cost_trace.back();
  write_json(dir / "control_summary.json", summary);
  write_text_file(dir / "config.ini", to_ini(cfg));
  return 0;
}

int cmd_hjb(const RunConfig& cfg) {
  const auto vg = solve_hjb(cfg);
  const auto dir = cfg.out_dir;
  std::filesystem::create_directories(dir);
  std::size_t stride = cfg.hjb_export_stride;
  while ((vg->nt - 1) % stride != 0) --stride;
  write_value_grid_csv(dir / "value_grid.csv", *vg, stride);
  write_text_file(dir / "value_grid.json", value_grid_header_json(*vg, stride));

  HjbGridSpec coarse = cfg.hjb;
  coarse.nx1 = (cfg.hjb.nx1 + 1) / 2;
  coarse.nx2 = (cfg.hjb.nx2 + 1) / 2;
  coarse.substeps = 0;
  const ValueGrid vc = hjb_solve(cfg.model, coarse, cfg.grid.horizon_t);
  const ValueCheck check =
      value_vs_rollout(cfg.model, vg, cfg.initial, std::max<std::size_t>(cfg.n_samples, 2),
                       cfg.seed, cfg.coupling);
  json out;
  out["value_at_initial_state"] = check.value;
  out["rollout"] = report_json(check.report);
  out["discrepancy"] = check.discrepancy;
  out["richardson_truncation_estimate"] = richardson_estimate(*vg, vc, cfg.initial);
  out["initial_dose"] = hjb_dose(*vg, 0.0, cfg.initial);
  write_json(dir / "hjb_check.json", out);
  write_text_file(dir / "config.ini", to_ini(cfg));
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  const auto dir = cfg.out_dir;
  std::filesystem::create_directories(dir);
  json out;
  out["n_samples"] = cfg.n_samples;
  out["seed"] = cfg.seed;
  json policies = json::object();
  std::stringstream list(cfg.evaluate_policies);
  std::string spec;
  const std::size_t n = std::max<std::size_t>(cfg.n_samples, 2);
  while (list >> spec) {
    const Policy policy = make_policy(spec, cfg);
    policies[spec] = report_json(
        estimate_J(cfg.model, policy, cfg.initial, cfg.grid, cfg.coupling, n, cfg.seed));
  }
  out["policies"] = policies;
  write_json(dir / "evaluate.json", out);
  write_text_file(dir / "config.ini", to_ini(cfg));
  return 0;
}

int cmd_wasserstein(const std::string& a, const std::string& b, double rho, bool with_coupling,
                    const std::string& out_dir) {
  const EmpiricalMeasure mu = read_measure_csv(a);
  const EmpiricalMeasure nu = read_measure_csv(b);
  if (mu.dim != nu.dim) throw ConfigError("measures have different dimensions");
  if (!(rho >= 1.0)) throw ConfigError("rho must be >= 1");
  json out;
  out["rho"] = rho;
  out["dim"] = mu.dim;
  if (mu.dim == 1 && !with_coupling) {
    out["method"] = "closed_form";
    out["distance"] = wasserstein_1d(rho, mu, nu);
  } else {
    const TransportResult tr = wasserstein_lp(rho, mu, nu);
    out["method"] = "lp";
    out["distance"] = tr.distance;
    if (with_coupling) {
      json plan = json::array();
      for (const auto& e : tr.coupling) plan.push_back({e.from, e.to, e.mass});
      out["coupling"] = plan;
    }
  }
  const std::string text = out.dump(2);
  std::cout << text << "\n";
  if (!out_dir.empty()) write_text_file(std::filesystem::path(out_dir) / "wasserstein.json", text);
  return 0;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Config file (INI sections)")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output directory (overrides io.out_dir)");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&o](std::uint64_t s) { o.seed = s; o.seed_set = true; },
      "Master seed (overrides run.seed)");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--set", o.sets, "Override a key: section.key=value")->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic tumour-control experiments"};
  app.require_subcommand(1);
  CommonOptions opts;

  auto* sim = app.add_subcommand("simulate", "Roll out a policy and report its cost");
  add_common(sim, opts);
  std::string policy;
  sim->add_option("--policy", policy,
                  "zero | constant:<v> | threshold:<x2*,lo,hi> | hjb[:<grid.json>] | mppi");

  auto* ctl = app.add_subcommand("control", "Plan with MPPI and run it in feedback");
  add_common(ctl, opts);
  auto* hjb = app.add_subcommand("hjb", "Solve the value function and check it by rollouts");
  add_common(hjb, opts);
  auto* eva = app.add_subcommand("evaluate", "Compare policies on paired seeds");
  add_common(eva, opts);

  auto* was = app.add_subcommand("wasserstein", "Distance between two measure CSV files");
  std::string file_a, file_b, was_out;
  double rho = 2.0;
  bool with_coupling = false;
  std::size_t was_threads = 1;
  was->add_option("file_a", file_a)->required();
  was->add_option("file_b", file_b)->required();
  was->add_option("--rho", rho, "Order of the distance");
  was->add_flag("--coupling", with_coupling, "Also print the optimal coupling");
  was->add_option("--out", was_out, "Also write wasserstein.json here");
  was->add_option("--threads", was_threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (was->parsed()) {
      set_thread_count(was_threads);
      return cmd_wasserstein(file_a, file_b, rho, with_coupling, was_out);
    }
    set_thread_count(opts.threads);
    const RunConfig cfg = resolve(opts);
    if (sim->parsed()) return cmd_simulate(cfg, policy);
    if (ctl->parsed()) return cmd_control(cfg);
    if (hjb->parsed()) return cmd_hjb(cfg);
    if (eva->parsed()) return cmd_evaluate(cfg);
  } catch (const ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  } catch (const SizeError& ex) {
    std::cerr << "input too large: " << ex.what() << "\n";
    return 2;
  } catch (const DomainError& ex) {
    std::cerr << "invalid input (" << ex.tag() << "): " << ex.what() << "\n";
    return 2;
  } catch (const ScopeError& ex) {
    std::cerr << "scope error: " << ex.what() << "\n";
    return 3;
  } catch (const StabilityError& ex) {
    std::cerr << "stability error: " << ex.what() << "\n";
    return 4;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

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

#include "tumorpic/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "tumorpic/errors.hpp"

namespace tumorpic {

namespace {

struct Binding {
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(fmt::format("'{}' is not a number", s));
  }
  return v;
}

template <class Int>
Int to_int(const std::string& s) {
  Int v = 0;
  const auto t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(fmt::format("'{}' is not a valid integer", s));
  }
  return v;
}

bool to_bool(const std::string& s) {
  const auto t = trim(s);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError(fmt::format("'{}' is not a boolean (true/false)", s));
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(trim(s));
  while (std::getline(in, item, ',')) {
    if (!trim(item).empty()) out.push_back(to_double(item));
  }
  return out;
}

std::string from_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += fmt::format("{}{}", i ? "," : "", v[i]);
  return out;
}

std::string kind_name(CouplingKind k) {
  switch (k) {
    case CouplingKind::Zero: return "zero";
    case CouplingKind::MeanX1: return "mean_x1";
    case CouplingKind::MeanX2: return "mean_x2";
    case CouplingKind::ScaledMean: return "scaled_mean";
  }
  return "zero";
}

CouplingKind to_kind(const std::string& s) {
  const auto t = trim(s);
  if (t == "zero") return CouplingKind::Zero;
  if (t == "mean_x1") return CouplingKind::MeanX1;
  if (t == "mean_x2") return CouplingKind::MeanX2;
  if (t == "scaled_mean") return CouplingKind::ScaledMean;
  throw ConfigError(fmt::format("unknown coupling kind '{}'", s));
}

// Keyed "section.key"; ordered so to_ini output is stable.
std::vector<std::pair<std::string, Binding>> bindings(RunConfig& c) {
  std::vector<std::pair<std::string, Binding>> b;
  auto real = [&b](std::string key, double& field) {
    b.push_back({std::move(key), {[&field](const std::string& s) { field = to_double(s); },
                                  [&field] { return fmt::format("{}", field); }}});
  };
  auto size = [&b](std::string key, std::size_t& field) {
    b.push_back({std::move(key),
                 {[&field](const std::string& s) { field = to_int<std::size_t>(s); },
                  [&field] { return fmt::format("{}", field); }}});
  };
  auto flag = [&b](std::string key, bool& field) {
    b.push_back({std::move(key), {[&field](const std::string& s) { field = to_bool(s); },
                                  [&field] { return std::string(field ? "true" : "false"); }}});
  };
  auto text = [&b](std::string key, std::string& field) {
    b.push_back({std::move(key), {[&field](const std::string& s) { field = trim(s); },
                                  [&field] { return field; }}});
  };

  ModelParams& m = c.model;
  real("model.beta_v", m.beta_v);
  real("model.beta_alpha", m.beta_alpha);
  real("model.cost_c", m.cost_c);
  b.push_back({"model.n_neighbors", {[&m](const std::string& s) { m.n_neighbors = to_int<int>(s); },
                                     [&m] { return fmt::format("{}", m.n_neighbors); }}});
  real("model.vop_benefit_factor", m.vop_benefit_factor);
  real("model.sigma_g", m.sigma_g);
  real("model.sigma_d", m.sigma_d);
  real("model.sigma_v", m.sigma_v);
  real("model.stabilization_weight_e", m.stabilization_weight_e);
  real("model.failure_penalty_M", m.failure_penalty_M);
  real("model.u_max", m.u_max);
  real("model.x2_success", m.x2_success);
  real("model.x2_fail", m.x2_fail);
  flag("model.symmetrize_theta", m.symmetrize_theta);
  flag("model.indeterminate_is_failure", m.indeterminate_is_failure);

  real("grid.horizon_t", c.grid.horizon_t);
  size("grid.k_steps", c.grid.k_steps);

  real("state.x1", c.initial.x1);
  real("state.x2", c.initial.x2);

  CouplingSpec& cp = c.coupling;
  b.push_back({"coupling.kind", {[&cp](const std::string& s) { cp.kind = to_kind(s); },
                                 [&cp] { return kind_name(cp.kind); }}});
  b.push_back({"coupling.coordinate",
               {[&cp](const std::string& s) {
                  const auto t = trim(s);
                  if (t != "x1" && t != "x2") {
                    throw ConfigError(fmt::format("coordinate must be x1 or x2, got '{}'", s));
                  }
                  cp.coordinate = t == "x1" ? 1 : 2;
                },
                [&cp] { return std::string(cp.coordinate == 1 ? "x1" : "x2"); }}});
  real("coupling.gain", cp.gain);

  PicConfig& pc = c.pic;
  size("pic.k_steps", pc.k_steps);
  size("pic.n_rollouts", pc.n_rollouts);
  size("pic.n_scenarios", pc.n_scenarios);
  size("pic.perturbation_block", pc.perturbation_block);
  real("pic.temperature_lambda", pc.temperature_lambda);
  real("pic.proposal_std", pc.proposal_std);
  size("pic.n_iterations", pc.n_iterations);
  size("pic.n_iterations_replan", pc.n_iterations_replan);
  flag("pic.monotone_deterministic", pc.monotone_deterministic);
  b.push_back({"pic.u_init", {[&pc](const std::string& s) { pc.u_init = to_list(s); },
                              [&pc] { return from_list(pc.u_init); }}});

  size("hjb.nx1", c.hjb.nx1);
  size("hjb.nx2", c.hjb.nx2);
  size("hjb.n_intervals", c.hjb.n_intervals);
  size("hjb.substeps", c.hjb.substeps);
  real("hjb.c_stab", c.hjb.c_stab);
  size("hjb.export_stride", c.hjb_export_stride);

  b.push_back({"io.out_dir", {[&c](const std::string& s) { c.out_dir = trim(s); },
                              [&c] { return c.out_dir.string(); }}});
  text("io.label", c.label);

  b.push_back({"run.seed", {[&c](const std::string& s) { c.seed = to_int<std::uint64_t>(s); },
                            [&c] { return fmt::format("{}", c.seed); }}});
  size("run.n_samples", c.n_samples);
  text("run.policy", c.policy);
  text("run.evaluate", c.evaluate_policies);
  return b;
}

void apply(std::vector<std::pair<std::string, Binding>>& table, const std::string& key,
           const std::string& value, const std::string& where) {
  for (auto& [name, binding] : table) {
    if (name == key) {
      try {
        binding.set(value);
      } catch (const ConfigError& ex) {
        throw ConfigError(fmt::format("{}: {}: {}", where, key, ex.what()));
      }
      return;
    }
  }
  throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
}

}  // namespace

void RunConfig::validate() const {
  auto wrap = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const DomainError& ex) {
      throw ConfigError(fmt::format("[{}] {}", section, ex.what()));
    }
  };
  wrap("model", [&] { model.validate(); });
  wrap("grid", [&] { grid.validate(); });
  wrap("pic", [&] { pic.validate(); });
  wrap("hjb", [&] { hjb.validate(); });
  if (!is_valid(initial)) throw ConfigError("[state] x1 and x2 must lie in [0, 1]");
  for (double u : pic.u_init) {
    if (!(u >= 0.0 && u <= model.u_max)) throw ConfigError("[pic] u_init doses must lie in [0, u_max]");
  }
  if (!std::isfinite(coupling.gain)) throw ConfigError("[coupling] gain must be finite");
  if (n_samples < 1) throw ConfigError("[run] n_samples must be >= 1");
  if (hjb_export_stride < 1) throw ConfigError("[hjb] export_stride must be >= 1");
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                       const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& ex) {
    throw ConfigError(fmt::format("{}:{}: {}", source, ex.line(), ex.message()));
  }
  RunConfig cfg;
  auto table = bindings(cfg);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(fmt::format("{}: key '{}' outside any section", source, section));
    }
    for (const auto& [key, value] : body) {
      apply(table, section + "." + key, value.data(), source);
    }
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("override '{}' is not section.key=value", ov));
    }
    apply(table, trim(ov.substr(0, eq)), ov.substr(eq + 1), "override");
  }
  // A single u_init value means a constant initial plan.
  if (cfg.pic.u_init.size() == 1) cfg.pic.u_init.assign(cfg.pic.k_steps, cfg.pic.u_init[0]);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides, path.string());
}

std::string to_ini(const RunConfig& cfg) {
  RunConfig copy = cfg;
  auto table = bindings(copy);
  std::string out;
  std::string section;
  for (const auto& [name, binding] : table) {
    const auto dot = name.find('.');
    const std::string sec = name.substr(0, dot);
    if (sec != section) {
      out += fmt::format("{}[{}]\n", section.empty() ? "" : "\n", sec);
      section = sec;
    }
    out += fmt::format("{} = {}\n", name.substr(dot + 1), binding.get());
  }
  return out;
}

}  // namespace tumorpic

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

#include "tumorpic/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/os.h>
#include <json.hpp>

#include "dynamics_kernel.hpp"
#include "tumorpic/errors.hpp"
#include "tumorpic/parallel.hpp"

namespace tumorpic {

namespace {

constexpr double kTie = 1e-12;

// Per-node coefficients of the u-free generator.
struct NodeCoefs {
  double mu1, mu2, a11, a22, a12, h2;
};

struct Stencil {
  std::size_t nx1, nx2;
  double dx1, dx2;
  std::vector<NodeCoefs> nodes;
};

Stencil build_stencil(const ModelParams& p, std::size_t nx1, std::size_t nx2) {
  const detail::DynamicsCoefs c(p);
  Stencil s{nx1, nx2, 1.0 / static_cast<double>(nx1 - 1), 1.0 / static_cast<double>(nx2 - 1), {}};
  s.nodes.resize(nx1 * nx2);
  for (std::size_t i = 0; i < nx1; ++i) {
    for (std::size_t j = 0; j < nx2; ++j) {
      const double x1 = static_cast<double>(i) * s.dx1;
      const double x2 = static_cast<double>(j) * s.dx2;
      double sig[2][3];
      detail::diffusion_rows(c, x1, x2, 0.0, sig);
      NodeCoefs& n = s.nodes[i * nx2 + j];
      n.mu1 = detail::drift_x1(c, x1, 0.0);
      n.mu2 = detail::drift_x2(c, x1, x2, 0.0, 0.0);
      n.a11 = 0.5 * (sig[0][0] * sig[0][0] + sig[0][1] * sig[0][1] + sig[0][2] * sig[0][2]);
      n.a22 = 0.5 * (sig[1][0] * sig[1][0] + sig[1][1] * sig[1][1] + sig[1][2] * sig[1][2]);
      n.a12 = 0.5 * (sig[0][0] * sig[1][0] + sig[0][1] * sig[1][1] + sig[0][2] * sig[1][2]);
      n.h2 = x2 * (1.0 - x2);
    }
  }
  return s;
}

struct Ratios {
  double drift = 0.0;
  double diffusion = 0.0;
};

// Worst per-unit-dt drift and diffusion rates of the explicit scheme.
Ratios step_rates(const Stencil& s, double u_max) {
  Ratios worst;
  double worst_total = -1.0;
  for (const NodeCoefs& n : s.nodes) {
    const double drift = std::abs(n.mu1) / s.dx1 + (std::abs(n.mu2) + u_max * n.h2) / s.dx2;
    const double diff = 2.0 * n.a11 / (s.dx1 * s.dx1) + 2.0 * n.a22 / (s.dx2 * s.dx2);
    if (drift + diff > worst_total) {
      worst_total = drift + diff;
      worst = {drift, diff};
    }
  }
  return worst;
}

// Mirror ghost nodes: index -1 maps to 1 and n to n - 2.
inline std::size_t mirror(std::ptrdiff_t i, std::size_t n) {
  if (i < 0) return static_cast<std::size_t>(-i);
  if (i >= static_cast<std::ptrdiff_t>(n)) return 2 * n - 2 - static_cast<std::size_t>(i);
  return static_cast<std::size_t>(i);
}

double dose_from_coefficient(double kappa, double u_max) {
  return kappa < -kTie ? u_max : 0.0;
}

// One backward sweep: out = in + dt * H(in).
void sweep(const Stencil& s, const ModelParams& p, double dt, const std::vector<double>& in,
           std::vector<double>& out) {
  const std::size_t nx1 = s.nx1;
  const std::size_t nx2 = s.nx2;
  const double e = p.stabilization_weight_e;
  const double u_max = p.u_max;
  const double inv1 = 1.0 / s.dx1;
  const double inv2 = 1.0 / s.dx2;
  const double inv11 = inv1 * inv1;
  const double inv22 = inv2 * inv2;
  const double inv12 = 0.25 * inv1 * inv2;
  parallel_for(nx1, [&](std::size_t i) {
    const std::ptrdiff_t ii = static_cast<std::ptrdiff_t>(i);
    const double* up = in.data() + mirror(ii + 1, nx1) * nx2;
    const double* mid = in.data() + i * nx2;
    const double* dn = in.data() + mirror(ii - 1, nx1) * nx2;
    for (std::size_t j = 0; j < nx2; ++j) {
      const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(j);
      const std::size_t jp = mirror(jj + 1, nx2);
      const std::size_t jm = mirror(jj - 1, nx2);
      const NodeCoefs& n = s.nodes[i * nx2 + j];
      const double v = mid[j];
      const double d1p = (up[j] - v) * inv1;
      const double d1m = (v - dn[j]) * inv1;
      const double d2p = (mid[jp] - v) * inv2;
      const double d2m = (v - mid[jm]) * inv2;
      const double adv = (n.mu1 >= 0.0 ? n.mu1 * d1p : n.mu1 * d1m) +
                         (n.mu2 >= 0.0 ? n.mu2 * d2p : n.mu2 * d2m);
      const double diff = n.a11 * (up[j] - 2.0 * v + dn[j]) * inv11 +
                          n.a22 * (mid[jp] - 2.0 * v + mid[jm]) * inv22 +
                          2.0 * n.a12 * (up[jp] - up[jm] - dn[jp] + dn[jm]) * inv12;
      const double kappa = 1.0 - n.h2 * d2m;
      const double control = dose_from_coefficient(kappa, u_max) * kappa;
      out[i * nx2 + j] = v + dt * (e + adv + diff + control);
    }
  });
}

ValueGrid solve(const ModelParams& p, const HjbGridSpec& spec, double horizon,
                std::vector<double> terminal) {
  p.validate();
  spec.validate();
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("hjb", "horizon must be positive");
  }
  const Stencil s = build_stencil(p, spec.nx1, spec.nx2);
  const Ratios rates = step_rates(s, p.u_max);
  const double layer_dt = horizon / static_cast<double>(spec.n_intervals);
  std::size_t substeps = spec.substeps;
  if (substeps == 0) {
    const double max_dt = spec.c_stab / (rates.drift + rates.diffusion);
    substeps = static_cast<std::size_t>(std::ceil(layer_dt / max_dt));
    substeps = std::max<std::size_t>(substeps, 1);
  }
  const double dt = layer_dt / static_cast<double>(substeps);
  const double ratio = dt * (rates.drift + rates.diffusion);
  if (ratio > spec.c_stab) {
    throw StabilityError(fmt::format(
        "HJB sweep dt={:.6g} unstable: drift ratio {:.6g} + diffusion ratio {:.6g} = {:.6g} "
        "exceeds c_stab={}",
        dt, dt * rates.drift, dt * rates.diffusion, ratio, spec.c_stab));
  }

  ValueGrid vg;
  vg.params = p;
  vg.nx1 = spec.nx1;
  vg.nx2 = spec.nx2;
  vg.nt = spec.n_intervals + 1;
  vg.horizon = horizon;
  vg.dt = layer_dt;
  vg.dx1 = s.dx1;
  vg.dx2 = s.dx2;
  vg.substeps = substeps;
  vg.sweep_dt = dt;
  const std::size_t layer_size = spec.nx1 * spec.nx2;
  vg.values.resize(vg.nt * layer_size);

  std::vector<double> cur = std::move(terminal);
  std::vector<double> next(layer_size);
  std::copy(cur.begin(), cur.end(), vg.values.begin() + static_cast<std::ptrdiff_t>(spec.n_intervals * layer_size));
  for (std::size_t l = spec.n_intervals; l-- > 0;) {
    for (std::size_t k = 0; k < substeps; ++k) {
      sweep(s, p, dt, cur, next);
      std::swap(cur, next);
    }
    std::copy(cur.begin(), cur.end(), vg.values.begin() + static_cast<std::ptrdiff_t>(l * layer_size));
  }
  for (double v : vg.values) {
    if (!std::isfinite(v)) throw StabilityError("HJB sweep produced a non-finite value");
  }
  return vg;
}

// Locates x in a uniform [0,1] grid of n nodes: cell index and fraction.
void locate(double x, std::size_t n, double dx, std::size_t& i, double& f) {
  const double pos = x / dx;
  i = std::min(static_cast<std::size_t>(pos), n - 2);
  f = pos - static_cast<double>(i);
}

std::size_t nearest_layer(const ValueGrid& vg, double s) {
  const double pos = std::round(s / vg.dt);
  if (!(pos > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(pos), vg.nt - 1);
}

}  // namespace

void HjbGridSpec::validate() const {
  if (nx1 < 16 || nx2 < 16) throw DomainError("hjb", "grid sizes must be >= 16");
  if (n_intervals < 1) throw DomainError("hjb", "n_intervals must be >= 1");
  if (!(c_stab > 0.0) || !std::isfinite(c_stab)) throw DomainError("hjb", "c_stab must be > 0");
}

double ValueGrid::interpolate(std::size_t l, const State& st) const {
  require_valid(st);
  std::size_t i = 0, j = 0;
  double f = 0.0, g = 0.0;
  locate(st.x1, nx1, dx1, i, f);
  locate(st.x2, nx2, dx2, j, g);
  return (1 - f) * (1 - g) * at(l, i, j) + (1 - f) * g * at(l, i, j + 1) +
         f * (1 - g) * at(l, i + 1, j) + f * g * at(l, i + 1, j + 1);
}

double hjb_max_stable_dt(const ModelParams& p, const HjbGridSpec& spec) {
  spec.validate();
  const Stencil s = build_stencil(p, spec.nx1, spec.nx2);
  const Ratios r = step_rates(s, p.u_max);
  return spec.c_stab / (r.drift + r.diffusion);
}

ValueGrid hjb_solve(const ModelParams& p, const HjbGridSpec& spec, double horizon) {
  spec.validate();
  std::vector<double> terminal(spec.nx1 * spec.nx2);
  const double dx1 = 1.0 / static_cast<double>(spec.nx1 - 1);
  const double dx2 = 1.0 / static_cast<double>(spec.nx2 - 1);
  for (std::size_t i = 0; i < spec.nx1; ++i) {
    for (std::size_t j = 0; j < spec.nx2; ++j) {
      terminal[i * spec.nx2 + j] =
          terminal_cost({static_cast<double>(i) * dx1, static_cast<double>(j) * dx2}, p);
    }
  }
  return solve(p, spec, horizon, std::move(terminal));
}

ValueGrid hjb_solve_from(const ModelParams& p, const HjbGridSpec& spec, double horizon,
                         std::span<const double> terminal) {
  spec.validate();
  if (terminal.size() != spec.nx1 * spec.nx2) {
    throw DomainError("hjb", "terminal layer size differs from the grid");
  }
  return solve(p, spec, horizon, std::vector<double>(terminal.begin(), terminal.end()));
}

double control_coefficient(const ValueGrid& vg, std::size_t layer, std::size_t i1,
                           std::size_t i2) {
  const std::size_t jm = mirror(static_cast<std::ptrdiff_t>(i2) - 1, vg.nx2);
  const double x2 = static_cast<double>(i2) * vg.dx2;
  const double d2m = (vg.at(layer, i1, i2) - vg.at(layer, i1, jm)) / vg.dx2;
  return 1.0 - x2 * (1.0 - x2) * d2m;
}

double hjb_dose(const ValueGrid& vg, double s, const State& st) {
  if (!is_valid(st)) {
    throw DomainError("state", fmt::format("HJB policy queried at ({}, {}) outside [0,1]^2",
                                           st.x1, st.x2));
  }
  const std::size_t l = nearest_layer(vg, s);
  std::size_t i = 0, j = 0;
  double f = 0.0, g = 0.0;
  locate(st.x1, vg.nx1, vg.dx1, i, f);
  locate(st.x2, vg.nx2, vg.dx2, j, g);
  auto grad = [&](std::size_t a, std::size_t b) {
    const std::size_t bm = mirror(static_cast<std::ptrdiff_t>(b) - 1, vg.nx2);
    return (vg.at(l, a, b) - vg.at(l, a, bm)) / vg.dx2;
  };
  const double dv = (1 - f) * (1 - g) * grad(i, j) + (1 - f) * g * grad(i, j + 1) +
                    f * (1 - g) * grad(i + 1, j) + f * g * grad(i + 1, j + 1);
  const double kappa = 1.0 - st.x2 * (1.0 - st.x2) * dv;
  return dose_from_coefficient(kappa, vg.params.u_max);
}

Policy hjb_policy(std::shared_ptr<const ValueGrid> vg) {
  if (!vg || vg->values.empty()) throw DomainError("hjb", "policy needs a solved value grid");
  return HjbFeedbackPolicy{std::move(vg)};
}

ValueCheck value_vs_rollout(const ModelParams& p, std::shared_ptr<const ValueGrid> vg,
                            const State& st0, std::size_t n_samples, std::uint64_t seed,
                            const CouplingSpec& coupling) {
  if (!coupling.is_zero()) {
    throw ScopeError("oracle valid only for frozen mean field (coupling must be zero)");
  }
  ValueCheck out;
  out.value = vg->interpolate(0, st0);
  const TimeGrid grid{vg->horizon, vg->nt - 1};
  out.report = estimate_J(p, hjb_policy(vg), st0, grid, coupling, n_samples, seed);
  out.discrepancy = std::abs(out.value - out.report.mean_cost);
  return out;
}

double richardson_estimate(const ValueGrid& fine, const ValueGrid& coarse, const State& st0) {
  return std::abs(fine.interpolate(0, st0) - coarse.interpolate(0, st0));
}

namespace {

void check_stride(const ValueGrid& vg, std::size_t stride) {
  if (stride < 1 || (vg.nt - 1) % stride != 0) {
    throw DomainError("hjb", fmt::format("layer stride {} does not divide {} intervals", stride,
                                         vg.nt - 1));
  }
}

}  // namespace

void write_value_grid_csv(const std::filesystem::path& path, const ValueGrid& vg,
                          std::size_t layer_stride) {
  check_stride(vg, layer_stride);
  auto out = fmt::output_file(path.string());
  out.print("i1,i2,layer,value\n");
  for (std::size_t l = 0; l < vg.nt; l += layer_stride) {
    for (std::size_t i = 0; i < vg.nx1; ++i) {
      for (std::size_t j = 0; j < vg.nx2; ++j) {
        out.print("{},{},{},{:.17g}\n", i, j, l, vg.at(l, i, j));
      }
    }
  }
}

std::string value_grid_header_json(const ValueGrid& vg, std::size_t layer_stride) {
  check_stride(vg, layer_stride);
  nlohmann::ordered_json j;
  j["nx1"] = vg.nx1;
  j["nx2"] = vg.nx2;
  j["nt"] = vg.nt;
  j["layer_stride"] = layer_stride;
  j["horizon"] = vg.horizon;
  j["dt"] = vg.dt;
  j["dx1"] = vg.dx1;
  j["dx2"] = vg.dx2;
  j["substeps"] = vg.substeps;
  j["sweep_dt"] = vg.sweep_dt;
  j["u_max"] = vg.params.u_max;
  j["failure_penalty_M"] = vg.params.failure_penalty_M;
  j["stabilization_weight_e"] = vg.params.stabilization_weight_e;
  return j.dump(2);
}

ValueGrid read_value_grid(const std::filesystem::path& header_json,
                          const std::filesystem::path& csv) {
  std::ifstream hin(header_json);
  if (!hin) throw ConfigError(fmt::format("cannot open value-grid header {}", header_json.string()));
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(hin);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(fmt::format("{}: {}", header_json.string(), ex.what()));
  }
  ValueGrid vg;
  try {
    const auto stride = h.at("layer_stride").get<std::size_t>();
    vg.nx1 = h.at("nx1").get<std::size_t>();
    vg.nx2 = h.at("nx2").get<std::size_t>();
    vg.nt = (h.at("nt").get<std::size_t>() - 1) / stride + 1;
    vg.horizon = h.at("horizon").get<double>();
    vg.dt = h.at("dt").get<double>() * static_cast<double>(stride);
    vg.dx1 = h.at("dx1").get<double>();
    vg.dx2 = h.at("dx2").get<double>();
    vg.substeps = h.at("substeps").get<std::size_t>() * stride;
    vg.sweep_dt = h.at("sweep_dt").get<double>();
    vg.params.u_max = h.at("u_max").get<double>();
    vg.params.failure_penalty_M = h.at("failure_penalty_M").get<double>();
    vg.params.stabilization_weight_e = h.at("stabilization_weight_e").get<double>();
    if (stride == 0 || vg.nx1 < 2 || vg.nx2 < 2) throw ConfigError("bad grid sizes");
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(fmt::format("{}: {}", header_json.string(), ex.what()));
  }
  const std::size_t stride = h.at("layer_stride").get<std::size_t>();
  vg.values.assign(vg.nt * vg.nx1 * vg.nx2, std::nan(""));
  std::ifstream in(csv);
  if (!in) throw ConfigError(fmt::format("cannot open value grid {}", csv.string()));
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t i = 0, j = 0, l = 0;
    double v = 0.0;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream ss(line);
    if (!(ss >> i >> c1 >> j >> c2 >> l >> c3 >> v) || c1 != ',' || c2 != ',' || c3 != ',' ||
        i >= vg.nx1 || j >= vg.nx2 || l % stride != 0 || l / stride >= vg.nt) {
      throw ConfigError(fmt::format("{}:{}: malformed value-grid row", csv.string(), line_no));
    }
    vg.values[((l / stride) * vg.nx1 + i) * vg.nx2 + j] = v;
    ++count;
  }
  if (count != vg.values.size()) {
    throw ConfigError(fmt::format("{}: expected {} values, found {}", csv.string(),
                                  vg.values.size(), count));
  }
  return vg;
}

}  // namespace tumorpic

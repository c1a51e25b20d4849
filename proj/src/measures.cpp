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

#include "tumorpic/measures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <fmt/os.h>

#include "tumorpic/errors.hpp"

namespace tumorpic {

namespace {

constexpr double kWeightTolerance = 1e-12;

void check_rho(double rho) {
  if (!(rho >= 1.0) || !std::isfinite(rho)) {
    throw DomainError("rho", fmt::format("Wasserstein exponent must be finite and >= 1, got {}", rho));
  }
}

double ground_cost(double rho, const EmpiricalMeasure& mu, std::size_t i,
                   const EmpiricalMeasure& nu, std::size_t j) {
  double dist;
  if (mu.dim == 1) {
    dist = std::abs(mu.coord(i, 0) - nu.coord(j, 0));
  } else {
    dist = std::hypot(mu.coord(i, 0) - nu.coord(j, 0), mu.coord(i, 1) - nu.coord(j, 1));
  }
  return rho == 1.0 ? dist : (rho == 2.0 ? dist * dist : std::pow(dist, rho));
}

std::vector<std::size_t> sorted_order(const EmpiricalMeasure& m) {
  std::vector<std::size_t> idx(m.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return m.coord(a, 0) < m.coord(b, 0); });
  return idx;
}

}  // namespace

void EmpiricalMeasure::validate() const {
  if (dim != 1 && dim != 2) throw DomainError("measure", "dimension must be 1 or 2");
  if (weights.empty()) throw DomainError("measure", "measure has no atoms");
  if (support.size() != weights.size() * static_cast<std::size_t>(dim)) {
    throw DomainError("measure", "support and weight sizes disagree");
  }
  for (double x : support) {
    if (!std::isfinite(x)) throw DomainError("measure", "support point is not finite");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("measure", "negative or non-finite weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw DomainError("measure", fmt::format("weights sum to {:.17g}, not 1", total));
  }
}

EmpiricalMeasure make_measure(int dim, std::vector<double> support,
                              std::vector<double> weights) {
  EmpiricalMeasure m{dim, std::move(support), std::move(weights)};
  m.validate();
  return m;
}

EmpiricalMeasure empirical_from_samples(std::span<const double> points_1d) {
  if (points_1d.empty()) throw DomainError("measure", "cannot build a measure from no samples");
  const double w = 1.0 / static_cast<double>(points_1d.size());
  return make_measure(1, {points_1d.begin(), points_1d.end()},
                      std::vector<double>(points_1d.size(), w));
}

EmpiricalMeasure empirical_from_samples(std::span<const State> points) {
  if (points.empty()) throw DomainError("measure", "cannot build a measure from no samples");
  std::vector<double> support;
  support.reserve(2 * points.size());
  for (const State& s : points) {
    support.push_back(s.x1);
    support.push_back(s.x2);
  }
  const double w = 1.0 / static_cast<double>(points.size());
  return make_measure(2, std::move(support), std::vector<double>(points.size(), w));
}

double wasserstein_1d(double rho, const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  check_rho(rho);
  mu.validate();
  nu.validate();
  if (mu.dim != 1 || nu.dim != 1) throw DomainError("measure", "wasserstein_1d needs 1-D measures");

  const auto a = sorted_order(mu);
  const auto b = sorted_order(nu);
  std::size_t i = 0, j = 0;
  double left_a = mu.weights[a[0]];
  double left_b = nu.weights[b[0]];
  double total = 0.0;
  while (i < a.size() && j < b.size()) {
    const double gap = std::abs(mu.coord(a[i], 0) - nu.coord(b[j], 0));
    const double c = rho == 1.0 ? gap : std::pow(gap, rho);
    if (left_a <= left_b) {
      total += left_a * c;
      left_b -= left_a;
      if (++i < a.size()) left_a = mu.weights[a[i]];
    } else {
      total += left_b * c;
      left_a -= left_b;
      if (++j < b.size()) left_b = nu.weights[b[j]];
    }
  }
  return std::pow(total, 1.0 / rho);
}

TransportResult wasserstein_lp(double rho, const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  check_rho(rho);
  mu.validate();
  nu.validate();
  if (mu.dim != nu.dim) throw DomainError("measure", "measures live in different dimensions");
  const std::size_t n = mu.size();
  const std::size_t m = nu.size();
  if (n > kMaxLpSupport || m > kMaxLpSupport) {
    throw SizeError(fmt::format("exact transport supports at most {} atoms per side, got {} and {}",
                                kMaxLpSupport, n, m));
  }

  std::vector<double> cost(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) cost[i * m + j] = ground_cost(rho, mu, i, nu, j);

  // Residual network: left i -> right j always open, right j -> left i open
  // while flow(i, j) > 0. Node potentials keep reduced costs nonnegative.
  constexpr double kEps = 1e-15;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> flow(n * m, 0.0);
  std::vector<double> supply(mu.weights);
  std::vector<double> demand(nu.weights);
  std::vector<double> pot_left(n, 0.0), pot_right(m, 0.0);
  std::vector<double> dist_left(n), dist_right(m);
  std::vector<std::size_t> pred_right(m);  // left node preceding right j
  std::vector<std::size_t> pred_left(n);   // right node preceding left i (or n/a)
  std::vector<char> done_left(n), done_right(m);

  auto open_supply = [&] {
    for (double s : supply)
      if (s > kEps) return true;
    return false;
  };

  while (open_supply()) {
    std::fill(dist_left.begin(), dist_left.end(), kInf);
    std::fill(dist_right.begin(), dist_right.end(), kInf);
    std::fill(done_left.begin(), done_left.end(), 0);
    std::fill(done_right.begin(), done_right.end(), 0);
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < n; ++i) {
      if (supply[i] > kEps) {
        dist_left[i] = 0.0;
        pred_left[i] = kNone;
      }
    }

    std::size_t target = kNone;
    double target_dist = kInf;
    while (true) {
      // Dense Dijkstra: pick the closest unfinished node on either side.
      double best = kInf;
      std::size_t best_node = kNone;
      bool best_is_left = true;
      for (std::size_t i = 0; i < n; ++i)
        if (!done_left[i] && dist_left[i] < best) best = dist_left[i], best_node = i, best_is_left = true;
      for (std::size_t j = 0; j < m; ++j)
        if (!done_right[j] && dist_right[j] < best) best = dist_right[j], best_node = j, best_is_left = false;
      if (best_node == kNone) break;

      if (best_is_left) {
        const std::size_t i = best_node;
        done_left[i] = 1;
        for (std::size_t j = 0; j < m; ++j) {
          if (done_right[j]) continue;
          const double rc = std::max(0.0, cost[i * m + j] + pot_left[i] - pot_right[j]);
          if (dist_left[i] + rc < dist_right[j]) {
            dist_right[j] = dist_left[i] + rc;
            pred_right[j] = i;
          }
        }
      } else {
        const std::size_t j = best_node;
        done_right[j] = 1;
        if (demand[j] > kEps) {
          target = j;
          target_dist = dist_right[j];
          break;
        }
        for (std::size_t i = 0; i < n; ++i) {
          if (done_left[i] || flow[i * m + j] <= kEps) continue;
          const double rc = std::max(0.0, -cost[i * m + j] + pot_right[j] - pot_left[i]);
          if (dist_right[j] + rc < dist_left[i]) {
            dist_left[i] = dist_right[j] + rc;
            pred_left[i] = j;
          }
        }
      }
    }
    if (target == kNone) break;  // only round-off supply left

    for (std::size_t i = 0; i < n; ++i) pot_left[i] += std::min(dist_left[i], target_dist);
    for (std::size_t j = 0; j < m; ++j) pot_right[j] += std::min(dist_right[j], target_dist);

    // Bottleneck along the path target <- i <- j' <- i' ... <- source.
    double push = demand[target];
    std::size_t j = target;
    std::size_t i = pred_right[j];
    while (true) {
      if (pred_left[i] == kNone) {
        push = std::min(push, supply[i]);
        break;
      }
      const std::size_t jp = pred_left[i];
      push = std::min(push, flow[i * m + jp]);
      j = jp;
      i = pred_right[j];
    }

    j = target;
    i = pred_right[j];
    demand[target] -= push;
    while (true) {
      flow[i * m + j] += push;
      if (pred_left[i] == kNone) {
        supply[i] -= push;
        break;
      }
      const std::size_t jp = pred_left[i];
      flow[i * m + jp] -= push;
      j = jp;
      i = pred_right[j];
    }
  }

  TransportResult result;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double f = flow[i * m + j];
      if (f > kEps) {
        result.cost += f * cost[i * m + j];
        result.coupling.push_back({i, j, f});
      }
    }
  }
  result.distance = std::pow(result.cost, 1.0 / rho);
  return result;
}

double coupling_cost(double rho, const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                     std::span<const CouplingEntry> plan) {
  double total = 0.0;
  for (const auto& e : plan) total += e.mass * ground_cost(rho, mu, e.from, nu, e.to);
  return total;
}

CouplingSpec parse_coupling(const std::string& text) {
  if (text == "zero") return {CouplingKind::Zero, 1, 1.0};
  if (text == "mean_x1") return {CouplingKind::MeanX1, 1, 1.0};
  if (text == "mean_x2") return {CouplingKind::MeanX2, 2, 1.0};
  const std::string prefix = "scaled_mean:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string rest = text.substr(prefix.size());
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      const std::string coord = rest.substr(0, colon);
      const std::string gain_text = rest.substr(colon + 1);
      double gain = 0.0;
      const auto [ptr, ec] = std::from_chars(gain_text.data(), gain_text.data() + gain_text.size(), gain);
      if ((coord == "x1" || coord == "x2") && ec == std::errc{} &&
          ptr == gain_text.data() + gain_text.size() && std::isfinite(gain)) {
        return {CouplingKind::ScaledMean, coord == "x1" ? 1 : 2, gain};
      }
    }
  }
  throw ConfigError(fmt::format("unknown coupling kind '{}'", text));
}

std::string to_string(const CouplingSpec& spec) {
  switch (spec.kind) {
    case CouplingKind::Zero: return "zero";
    case CouplingKind::MeanX1: return "mean_x1";
    case CouplingKind::MeanX2: return "mean_x2";
    case CouplingKind::ScaledMean:
      return fmt::format("scaled_mean:x{}:{}", spec.coordinate, spec.gain);
  }
  return "unknown";
}

namespace {

int stat_coordinate(const CouplingSpec& spec) {
  switch (spec.kind) {
    case CouplingKind::Zero: return 0;
    case CouplingKind::MeanX1: return 1;
    case CouplingKind::MeanX2: return 2;
    case CouplingKind::ScaledMean:
      if (spec.coordinate != 1 && spec.coordinate != 2) {
        throw ConfigError("scaled_mean coordinate must be x1 or x2");
      }
      return spec.coordinate;
  }
  throw ConfigError("unknown coupling kind");
}

double stat_gain(const CouplingSpec& spec) {
  return spec.kind == CouplingKind::ScaledMean ? spec.gain : 1.0;
}

}  // namespace

CouplingStat coupling_stat(const EmpiricalMeasure& m, const CouplingSpec& spec) {
  const int c = stat_coordinate(spec);
  if (c == 0) return {0.0};
  if (m.dim != 2) throw DomainError("measure", "coupling statistics need a 2-D measure");
  double mean = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) mean += m.weights[i] * m.coord(i, c - 1);
  return {stat_gain(spec) * mean};
}

CouplingStat coupling_stat(std::span<const State> particles, const CouplingSpec& spec) {
  const int c = stat_coordinate(spec);
  if (c == 0) return {0.0};
  if (particles.empty()) throw DomainError("measure", "empty ensemble");
  const double w = 1.0 / static_cast<double>(particles.size());
  double mean = 0.0;
  for (const State& s : particles) mean += w * (c == 1 ? s.x1 : s.x2);
  return {stat_gain(spec) * mean};
}

EmpiricalMeasure read_measure_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open measure file '{}'", path.string()));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t");
      const auto last = cell.find_last_not_of(" \t");
      cell = first == std::string::npos ? "" : cell.substr(first, last - first + 1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (line_no == 1) continue;  // header
      throw ConfigError(fmt::format("{}:{}: non-numeric field", path.string(), line_no));
    }
    if (row.size() != 2 && row.size() != 3) {
      throw ConfigError(fmt::format("{}:{}: expected 2 or 3 columns, got {}", path.string(),
                                    line_no, row.size()));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError(fmt::format("{}:{}: inconsistent column count", path.string(), line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError(fmt::format("{}: no atoms", path.string()));
  const int dim = static_cast<int>(rows.front().size()) - 1;
  std::vector<double> support, weights;
  for (const auto& r : rows) {
    support.insert(support.end(), r.begin(), r.end() - 1);
    weights.push_back(r.back());
  }
  try {
    return make_measure(dim, std::move(support), std::move(weights));
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_measure_csv(const std::filesystem::path& path, const EmpiricalMeasure& m) {
  auto out = fmt::output_file(path.string());
  if (m.dim == 1) {
    out.print("x1,weight\n");
  } else {
    out.print("x1,x2,weight\n");
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.dim == 1) {
      out.print("{:.17g},{:.17g}\n", m.coord(i, 0), m.weights[i]);
    } else {
      out.print("{:.17g},{:.17g},{:.17g}\n", m.coord(i, 0), m.coord(i, 1), m.weights[i]);
    }
  }
}

}  // namespace tumorpic

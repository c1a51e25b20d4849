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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tumorpic/model.hpp"

namespace tumorpic {

// Finitely supported probability measure on R^1 or R^2. Points are stored
// row-major in `support` (dim values per point).
struct EmpiricalMeasure {
  int dim = 1;
  std::vector<double> support;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  double coord(std::size_t i, int c) const { return support[i * dim + c]; }

  // Throws DomainError unless weights are >= 0 and sum to 1 within 1e-12,
  // points are finite, dim is 1 or 2 and the sizes agree.
  void validate() const;
};

EmpiricalMeasure make_measure(int dim, std::vector<double> support,
                              std::vector<double> weights);

// Uniform weights 1/N; duplicated points are kept as separate atoms.
EmpiricalMeasure empirical_from_samples(std::span<const double> points_1d);
EmpiricalMeasure empirical_from_samples(std::span<const State> points);

// Closed-form rho-Wasserstein distance between measures on the line,
// integrating |F^-1 - G^-1|^rho over merged quantile segments.
double wasserstein_1d(double rho, const EmpiricalMeasure& mu,
                      const EmpiricalMeasure& nu);

struct CouplingEntry {
  std::size_t from;
  std::size_t to;
  double mass;
};

struct TransportResult {
  double distance = 0.0;  // (optimal cost)^(1/rho)
  double cost = 0.0;      // optimal sum of mass * |x - y|^rho
  std::vector<CouplingEntry> coupling;  // nonzero entries of the optimal plan
};

inline constexpr std::size_t kMaxLpSupport = 256;

// Exact optimal transport between two finitely supported measures with
// Euclidean ground cost |x - y|^rho, by successive shortest augmenting paths
// on the transportation network. Supports up to kMaxLpSupport atoms each.
TransportResult wasserstein_lp(double rho, const EmpiricalMeasure& mu,
                               const EmpiricalMeasure& nu);

// Total cost of a given coupling (used to audit plans).
double coupling_cost(double rho, const EmpiricalMeasure& mu,
                     const EmpiricalMeasure& nu,
                     std::span<const CouplingEntry> plan);

enum class CouplingKind { Zero, MeanX1, MeanX2, ScaledMean };

struct CouplingSpec {
  CouplingKind kind = CouplingKind::Zero;
  int coordinate = 1;  // used by ScaledMean: 1 -> x1, 2 -> x2
  double gain = 1.0;   // used by ScaledMean

  bool is_zero() const { return kind == CouplingKind::Zero; }
};

// Accepts "zero", "mean_x1", "mean_x2", "scaled_mean:x1:<gain>",
// "scaled_mean:x2:<gain>".
CouplingSpec parse_coupling(const std::string& text);
std::string to_string(const CouplingSpec& spec);

CouplingStat coupling_stat(const EmpiricalMeasure& m, const CouplingSpec& spec);
// Same value as coupling_stat(empirical_from_samples(particles), spec).
CouplingStat coupling_stat(std::span<const State> particles, const CouplingSpec& spec);

// CSV with header `x1,weight` or `x1,x2,weight`.
EmpiricalMeasure read_measure_csv(const std::filesystem::path& path);
void write_measure_csv(const std::filesystem::path& path, const EmpiricalMeasure& m);

}  // namespace tumorpic

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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tumorpic/grid.hpp"
#include "tumorpic/hjb.hpp"
#include "tumorpic/measures.hpp"
#include "tumorpic/model.hpp"
#include "tumorpic/pic_config.hpp"

namespace tumorpic {

// Everything an experiment needs, read from one INI-style file with the
// sections [model] [grid] [state] [coupling] [pic] [hjb] [io] [run].
struct RunConfig {
  ModelParams model;
  TimeGrid grid{5.0, 100};
  State initial{0.5, 0.5};
  CouplingSpec coupling;
  PicConfig pic;
  HjbGridSpec hjb;
  std::size_t hjb_export_stride = 50;  // stored layers written per exported layer
  std::filesystem::path out_dir = "out";
  std::string label = "run";
  std::uint64_t seed = 0;
  std::size_t n_samples = 100;
  std::string policy = "zero";
  std::string evaluate_policies = "zero hjb mppi";  // space separated

  // Throws ConfigError naming the offending section.key.
  void validate() const;
};

// Parses the file text; `overrides` are "section.key=value" strings applied
// on top. Unknown sections or keys are rejected with ConfigError.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                       const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

// The resolved configuration in the same format (round-trips through
// parse_config).
std::string to_ini(const RunConfig& cfg);

}  // namespace tumorpic

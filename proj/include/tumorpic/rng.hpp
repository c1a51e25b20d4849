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
#include <cstddef>
#include <cstdint>
#include <span>

namespace tumorpic {

// Identifies one reproducible noise stream. Streams with distinct
// (master_seed, stream_id) pairs are statistically independent.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  // A fresh seed for a sub-task (e.g. the planner inside one trajectory),
  // derived by hashing this spec together with `tag`.
  SeedSpec child(std::uint64_t tag) const;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32-10 block function (Salmon et al., SC'11).
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

// Standard normal draws from the counter-based stream `seed`.
//
// Block b of a stream yields four normals; `out` receives the blocks
// first_block, first_block+1, ... so out.size() must be a multiple of 4.
// The value produced for a given (seed, block) does not depend on how the
// request is batched, which is what makes parallel batches reproducible.
void normal_blocks(const SeedSpec& seed, std::uint64_t first_block,
                   std::span<double> out);

// Convenience for arbitrary lengths: the first `out.size()` normals of the
// stream starting at block `first_block`.
void normals(const SeedSpec& seed, std::uint64_t first_block,
             std::span<double> out);

}  // namespace tumorpic

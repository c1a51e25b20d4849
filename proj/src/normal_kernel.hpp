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
#include <cstdint>

namespace tumorpic::detail {

// Number of Philox blocks (four normals each) produced per kernel call.
inline constexpr std::size_t kKernelBlocks = 8;

// Writes 4 * kKernelBlocks normals for blocks first_block.. of the stream.
void normal_kernel(std::uint32_t key0, std::uint32_t key1,
                   std::uint64_t stream, std::uint64_t first_block,
                   double* out);

}  // namespace tumorpic::detail
